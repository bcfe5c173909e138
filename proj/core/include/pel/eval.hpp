#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pel/datasets.hpp"

namespace pel {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Mann-Whitney ROC-AUC with midrank tie handling, scaled to [0, 100].
/// Entailment is the positive class; higher scores rank as more positive.
/// Throws Error(single_class) unless both classes are present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// AUC plus the ROC polyline from (0,0) to (1,1).
std::pair<double, std::vector<RocPoint>> roc_curve(const std::vector<double>& scores,
                                                   const std::vector<int>& labels);

/// AUC of the negated scores; auc + flipped_auc = 100 under midranks.
double flipped_roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct LengthBaseline {
  double best_flipped_auc = 0.0;
  std::string which;  // premise_length | hypothesis_length | inverse_*
  std::array<double, 4> candidate_flipped_auc{};
};

/// Best of the four character-length scores (premise/hypothesis length and
/// their inverses) under the flipped AUC.
LengthBaseline length_baseline(const std::vector<EntailmentInstance>& instances);

struct TestCoefficients {
  std::array<double, 4> weights{};  // over lp_xy, lp_xeot, lp_yy, lp_yeot
  double bias = 0.0;
  std::string provenance;  // theoretical | flipped | learned

  static TestCoefficients theoretical() { return {{1.0, -1.0, -1.0, 1.0}, 0.0, "theoretical"}; }
  static TestCoefficients flipped() { return {{-1.0, 1.0, 1.0, -1.0}, 0.0, "flipped"}; }
};

struct EvalReport {
  std::string test_variant = "original";
  int n_repetitions = 1;
  double auc = 0.0;
  double flipped_auc = 0.0;
  std::vector<RocPoint> roc_points;
  int n_pos = 0;
  int n_neg = 0;
  double baseline_flipped_auc = 0.0;
  std::string baseline_which;
  std::optional<TestCoefficients> coefficients;
  std::string config_echo_json = "{}";  // resolved run configuration
};

std::string eval_report_to_json(const EvalReport& report);

struct LearnedTest {
  TestCoefficients coefficients;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  bool no_holdout = false;
  EvalReport holdout;  // metrics on the holdout split (train split when no_holdout)
  double theoretical_auc = 0.0;  // best orientation of the fixed-coefficient test on the holdout
};

/// L2-regularized logistic regression of the label on the four log-prob
/// features plus a free bias. Newton iterations until the gradient norm
/// drops to 1e-8 or 10,000 iterations (then flagged, never silent).
LearnedTest fit_learned_test(const std::vector<std::array<double, 4>>& features,
                             const std::vector<int>& labels, double l2,
                             std::uint64_t split_seed, double holdout_fraction,
                             bool no_holdout = false);

struct DistractorTrend {
  std::vector<int> ks;
  std::vector<double> mean_score;
  std::vector<int> counts;
  double slope = 0.0;  // least-squares slope of mean score over k
};

DistractorTrend distractor_trend(const std::vector<std::pair<int, double>>& k_scores);

/// Deterministic plot emission; axes labeled, no interactivity.
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& points);
void write_roc_svg(const std::string& path, const std::vector<RocPoint>& points,
                   const std::string& title);
void write_histogram_csv(const std::string& path, const std::vector<double>& scores,
                         const std::vector<int>& labels, int bins = 30);
void write_histogram_svg(const std::string& path, const std::vector<double>& scores,
                         const std::vector<int>& labels, const std::string& title,
                         int bins = 30);

}  // namespace pel
