#include "pel/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "pel/rng.hpp"

namespace pel {

using ordered_json = nlohmann::ordered_json;

namespace {

void check_two_class(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    fail(ErrorCode::invalid_argument, "scores and labels must align");
  if (scores.empty()) fail(ErrorCode::invalid_argument, "empty score list");
  const int pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0 || pos == static_cast<int>(labels.size()))
    fail(ErrorCode::single_class, "ROC-AUC needs both classes present");
  for (double s : scores)
    if (std::isnan(s)) fail(ErrorCode::invalid_argument, "NaN score");
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_two_class(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Midranks over ties, then the Mann-Whitney U statistic.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    i = j;
  }
  for (int l : labels) n_pos += (l == 1);
  const std::size_t n_neg = n - n_pos;
  const double u = rank_sum_pos -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return 100.0 * u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::pair<double, std::vector<RocPoint>> roc_curve(const std::vector<double>& scores,
                                                   const std::vector<int>& labels) {
  const double auc = roc_auc(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double n_pos = 0, n_neg = 0;
  for (int l : labels) (l == 1 ? n_pos : n_neg) += 1;
  std::vector<RocPoint> points{{0.0, 0.0}};
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) (labels[order[k]] == 1 ? tp : fp) += 1;
    points.push_back({fp / n_neg, tp / n_pos});
    i = j;
  }
  return {auc, points};
}

double flipped_roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> neg(scores.size());
  std::transform(scores.begin(), scores.end(), neg.begin(), [](double s) { return -s; });
  return roc_auc(neg, labels);
}

LengthBaseline length_baseline(const std::vector<EntailmentInstance>& instances) {
  std::vector<int> labels;
  std::vector<double> px, hx;
  labels.reserve(instances.size());
  for (const auto& inst : instances) {
    labels.push_back(inst.label == Label::entailment ? 1 : 0);
    px.push_back(static_cast<double>(inst.premise.size()));
    hx.push_back(static_cast<double>(inst.hypothesis.size()));
  }
  auto inverse = [](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return 1.0 / x; });
    return out;
  };
  const std::array<std::pair<std::string, std::vector<double>>, 4> candidates = {
      std::make_pair(std::string("premise_length"), px),
      std::make_pair(std::string("hypothesis_length"), hx),
      std::make_pair(std::string("inverse_premise_length"), inverse(px)),
      std::make_pair(std::string("inverse_hypothesis_length"), inverse(hx)),
  };
  LengthBaseline out;
  out.best_flipped_auc = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double a = flipped_roc_auc(candidates[i].second, labels);
    out.candidate_flipped_auc[i] = a;
    if (a > out.best_flipped_auc) {
      out.best_flipped_auc = a;
      out.which = candidates[i].first;
    }
  }
  return out;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Negative log-likelihood plus the ridge term (bias unpenalized).
double logistic_loss(const std::vector<std::array<double, 4>>& x, const std::vector<int>& y,
                     const std::array<double, 5>& theta, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double z = theta[4];
    for (int d = 0; d < 4; ++d) z += theta[static_cast<std::size_t>(d)] * x[i][static_cast<std::size_t>(d)];
    // log(1 + exp(-m)) with the stable branch
    const double m = (y[i] == 1) ? z : -z;
    loss += m >= 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  for (int d = 0; d < 4; ++d) loss += 0.5 * l2 * theta[static_cast<std::size_t>(d)] * theta[static_cast<std::size_t>(d)];
  return loss;
}

// Solve the 5x5 system in place; returns false if singular.
bool solve5(std::array<std::array<double, 5>, 5>& a, std::array<double, 5>& b) {
  for (int col = 0; col < 5; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 5; ++r)
      if (std::fabs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::fabs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
        pivot = r;
    if (std::fabs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]) < 1e-300)
      return false;
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
    std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
    for (int r = 0; r < 5; ++r) {
      if (r == col) continue;
      const double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                       a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      if (f == 0.0) continue;
      for (int c = col; c < 5; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int d = 0; d < 5; ++d)
    b[static_cast<std::size_t>(d)] /= a[static_cast<std::size_t>(d)][static_cast<std::size_t>(d)];
  return true;
}

struct FitResult {
  std::array<double, 5> theta{};
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

FitResult fit_logistic(const std::vector<std::array<double, 4>>& x, const std::vector<int>& y,
                       double l2, int max_iters, double grad_tol) {
  FitResult res;
  std::array<double, 5>& theta = res.theta;
  double loss = logistic_loss(x, y, theta, l2);
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    std::array<double, 5> grad{};
    std::array<std::array<double, 5>, 5> hess{};
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::array<double, 5> f{x[i][0], x[i][1], x[i][2], x[i][3], 1.0};
      double z = 0.0;
      for (int d = 0; d < 5; ++d) z += theta[static_cast<std::size_t>(d)] * f[static_cast<std::size_t>(d)];
      const double p = sigmoid(z);
      const double r = p - (y[i] == 1 ? 1.0 : 0.0);
      const double wgt = std::max(p * (1.0 - p), 1e-12);
      for (int d = 0; d < 5; ++d) {
        grad[static_cast<std::size_t>(d)] += r * f[static_cast<std::size_t>(d)];
        for (int c = 0; c < 5; ++c)
          hess[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)] +=
              wgt * f[static_cast<std::size_t>(d)] * f[static_cast<std::size_t>(c)];
      }
    }
    for (int d = 0; d < 4; ++d) {
      grad[static_cast<std::size_t>(d)] += l2 * theta[static_cast<std::size_t>(d)];
      hess[static_cast<std::size_t>(d)][static_cast<std::size_t>(d)] += l2;
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    res.grad_norm = gnorm;
    if (gnorm <= grad_tol) {
      res.converged = true;
      return res;
    }
    std::array<double, 5> step = grad;
    auto h = hess;
    if (!solve5(h, step)) {
      // Fall back to a plain gradient step if the Hessian degenerates.
      for (int d = 0; d < 5; ++d) step[static_cast<std::size_t>(d)] = grad[static_cast<std::size_t>(d)];
    }
    double scale = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::array<double, 5> cand = theta;
      for (int d = 0; d < 5; ++d) cand[static_cast<std::size_t>(d)] -= scale * step[static_cast<std::size_t>(d)];
      const double cand_loss = logistic_loss(x, y, cand, l2);
      if (cand_loss <= loss) {
        theta = cand;
        loss = cand_loss;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) return res;  // stalled; grad_norm reported as-is
  }
  return res;
}

EvalReport metrics_for(const std::vector<double>& scores, const std::vector<int>& labels) {
  EvalReport rep;
  auto [auc, points] = roc_curve(scores, labels);
  rep.auc = auc;
  rep.flipped_auc = flipped_roc_auc(scores, labels);
  rep.roc_points = std::move(points);
  for (int l : labels) (l == 1 ? rep.n_pos : rep.n_neg) += 1;
  return rep;
}

}  // namespace

LearnedTest fit_learned_test(const std::vector<std::array<double, 4>>& features,
                             const std::vector<int>& labels, double l2,
                             std::uint64_t split_seed, double holdout_fraction,
                             bool no_holdout) {
  if (features.size() != labels.size())
    fail(ErrorCode::invalid_argument, "features and labels must align");
  if (features.size() < 20)
    fail(ErrorCode::invalid_argument, "learned test needs at least 20 instances");
  for (const auto& f : features)
    for (double v : f)
      if (!std::isfinite(v))
        fail(ErrorCode::degenerate_probability, "non-finite feature in learned test input");

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> train_idx, hold_idx;
  if (no_holdout) {
    train_idx = order;
    hold_idx = order;
  } else {
    Rng rng(split_seed);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
    const std::size_t n_hold = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(order.size()))));
    hold_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
  }
  auto class_count = [&](const std::vector<std::size_t>& idx) {
    int pos = 0;
    for (std::size_t i : idx) pos += (labels[i] == 1);
    return std::make_pair(pos, static_cast<int>(idx.size()) - pos);
  };
  auto [tp, tn] = class_count(train_idx);
  auto [hp, hn] = class_count(hold_idx);
  if (tp == 0 || tn == 0 || hp == 0 || hn == 0)
    fail(ErrorCode::single_class, "both classes must be present in both splits");

  std::vector<std::array<double, 4>> xtr;
  std::vector<int> ytr;
  for (std::size_t i : train_idx) {
    xtr.push_back(features[i]);
    ytr.push_back(labels[i]);
  }
  FitResult fit = fit_logistic(xtr, ytr, l2, 10000, 1e-8);

  LearnedTest out;
  out.coefficients.weights = {fit.theta[0], fit.theta[1], fit.theta[2], fit.theta[3]};
  out.coefficients.bias = fit.theta[4];
  out.coefficients.provenance = "learned";
  out.converged = fit.converged;
  out.iterations = fit.iterations;
  out.grad_norm = fit.grad_norm;
  out.no_holdout = no_holdout;

  std::vector<double> hold_scores;
  std::vector<int> hold_labels;
  for (std::size_t i : hold_idx) {
    double z = fit.theta[4];
    for (int d = 0; d < 4; ++d) z += fit.theta[static_cast<std::size_t>(d)] * features[i][static_cast<std::size_t>(d)];
    hold_scores.push_back(z);
    hold_labels.push_back(labels[i]);
  }
  out.holdout = metrics_for(hold_scores, hold_labels);
  out.holdout.test_variant = "learned";
  out.holdout.coefficients = out.coefficients;

  // Reference: the fixed-coefficient test on the same split, in whichever
  // orientation ranks better. The learned rule searches a family containing
  // both orientations, so it should not fall meaningfully below this.
  std::vector<double> theo;
  const auto tw = TestCoefficients::theoretical().weights;
  for (std::size_t i : hold_idx) {
    double z = 0.0;
    for (int d = 0; d < 4; ++d) z += tw[static_cast<std::size_t>(d)] * features[i][static_cast<std::size_t>(d)];
    theo.push_back(z);
  }
  out.theoretical_auc = std::max(roc_auc(theo, hold_labels), flipped_roc_auc(theo, hold_labels));
  return out;
}

DistractorTrend distractor_trend(const std::vector<std::pair<int, double>>& k_scores) {
  if (k_scores.empty()) fail(ErrorCode::invalid_argument, "no distractor scores");
  DistractorTrend out;
  std::vector<int> ks;
  for (const auto& [k, s] : k_scores) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [kk, s] : k_scores) {
      if (kk == k) {
        sum += s;
        ++count;
      }
    }
    out.ks.push_back(k);
    out.mean_score.push_back(sum / count);
    out.counts.push_back(count);
  }
  if (out.ks.size() >= 2) {
    // Least squares of mean score on k.
    double mk = 0, ms = 0;
    const double n = static_cast<double>(out.ks.size());
    for (std::size_t i = 0; i < out.ks.size(); ++i) {
      mk += out.ks[i];
      ms += out.mean_score[i];
    }
    mk /= n;
    ms /= n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < out.ks.size(); ++i) {
      num += (out.ks[i] - mk) * (out.mean_score[i] - ms);
      den += (out.ks[i] - mk) * (out.ks[i] - mk);
    }
    out.slope = num / den;
  }
  return out;
}

std::string eval_report_to_json(const EvalReport& report) {
  ordered_json j;
  j["test_variant"] = report.test_variant;
  j["n_repetitions"] = report.n_repetitions;
  j["auc"] = report.auc;
  j["flipped_auc"] = report.flipped_auc;
  j["n_pos"] = report.n_pos;
  j["n_neg"] = report.n_neg;
  j["baseline_flipped_auc"] = report.baseline_flipped_auc;
  j["baseline_which"] = report.baseline_which;
  if (report.coefficients) {
    ordered_json c;
    c["weights"] = report.coefficients->weights;
    c["bias"] = report.coefficients->bias;
    c["provenance"] = report.coefficients->provenance;
    j["coefficients"] = std::move(c);
  }
  ordered_json pts = ordered_json::array();
  for (const auto& p : report.roc_points) pts.push_back({p.fpr, p.tpr});
  j["roc_points"] = std::move(pts);
  j["config"] = ordered_json::parse(report.config_echo_json);
  return j.dump(2) + "\n";
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& points) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  f << "fpr,tpr\n";
  for (const auto& p : points) f << fmt(p.fpr) << "," << fmt(p.tpr) << "\n";
}

void write_roc_svg(const std::string& path, const std::vector<RocPoint>& points,
                   const std::string& title) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  const double w = 480, h = 480, m = 56;
  auto X = [&](double v) { return m + v * (w - 2 * m); };
  auto Y = [&](double v) { return h - m - v * (h - 2 * m); };
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  f << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(1) << "\" y2=\"" << Y(0)
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(0) << "\" y2=\"" << Y(1)
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(1) << "\" y2=\"" << Y(1)
    << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">false positive rate</text>\n";
  f << "<text x=\"16\" y=\"" << h / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << h / 2
    << ")\">true positive rate</text>\n";
  f << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& p : points) f << fmt(X(p.fpr)) << "," << fmt(Y(p.tpr)) << " ";
  f << "\"/>\n</svg>\n";
}

void write_histogram_csv(const std::string& path, const std::vector<double>& scores,
                         const std::vector<int>& labels, int bins) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) hi = lo + 1.0;
  const double step = (hi - lo) / bins;
  std::vector<int> pos(static_cast<std::size_t>(bins), 0), neg(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int b = static_cast<int>((scores[i] - lo) / step);
    b = std::clamp(b, 0, bins - 1);
    (labels[i] == 1 ? pos : neg)[static_cast<std::size_t>(b)] += 1;
  }
  f << "bin_lo,bin_hi,entailment,non_entailment\n";
  for (int b = 0; b < bins; ++b)
    f << fmt(lo + b * step) << "," << fmt(lo + (b + 1) * step) << ","
      << pos[static_cast<std::size_t>(b)] << "," << neg[static_cast<std::size_t>(b)] << "\n";
}

void write_histogram_svg(const std::string& path, const std::vector<double>& scores,
                         const std::vector<int>& labels, const std::string& title, int bins) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) hi = lo + 1.0;
  const double step = (hi - lo) / bins;
  std::vector<int> pos(static_cast<std::size_t>(bins), 0), neg(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int b = static_cast<int>((scores[i] - lo) / step);
    b = std::clamp(b, 0, bins - 1);
    (labels[i] == 1 ? pos : neg)[static_cast<std::size_t>(b)] += 1;
  }
  int peak = 1;
  for (int b = 0; b < bins; ++b)
    peak = std::max({peak, pos[static_cast<std::size_t>(b)], neg[static_cast<std::size_t>(b)]});
  const double w = 560, h = 360, m = 56;
  const double bw = (w - 2 * m) / bins;
  auto Y = [&](int c) { return h - m - (static_cast<double>(c) / peak) * (h - 2 * m); };
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  f << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">score</text>\n";
  f << "<text x=\"16\" y=\"" << h / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << h / 2
    << ")\">count</text>\n";
  for (int b = 0; b < bins; ++b) {
    const double x = m + b * bw;
    f << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(Y(pos[static_cast<std::size_t>(b)]))
      << "\" width=\"" << fmt(bw) << "\" height=\""
      << fmt(h - m - Y(pos[static_cast<std::size_t>(b)]))
      << "\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
    f << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(Y(neg[static_cast<std::size_t>(b)]))
      << "\" width=\"" << fmt(bw) << "\" height=\""
      << fmt(h - m - Y(neg[static_cast<std::size_t>(b)]))
      << "\" fill=\"#d62728\" fill-opacity=\"0.55\"/>\n";
  }
  f << "<rect x=\"" << w - m - 170 << "\" y=\"36\" width=\"12\" height=\"12\" fill=\"#1f77b4\" "
       "fill-opacity=\"0.55\"/>\n";
  f << "<text x=\"" << w - m - 152 << "\" y=\"47\" font-size=\"12\">entailment</text>\n";
  f << "<rect x=\"" << w - m - 170 << "\" y=\"54\" width=\"12\" height=\"12\" fill=\"#d62728\" "
       "fill-opacity=\"0.55\"/>\n";
  f << "<text x=\"" << w - m - 152 << "\" y=\"65\" font-size=\"12\">non-entailment</text>\n";
  f << "</svg>\n";
}

}  // namespace pel
