#pragma once

#include <map>
#include <string>
#include <vector>

#include "pel/worlds.hpp"

namespace pel {

struct SampledText;

/// Sentence-unit n-gram model with add-lambda smoothing. Histories are
/// padded with a begin-of-text symbol; the outcome space is the vocabulary
/// plus the end-of-text sentence.
class SentenceNgram {
 public:
  static constexpr int kBos = -1;

  SentenceNgram() = default;
  SentenceNgram(std::vector<std::string> vocabulary, int order, double smoothing_lambda);

  int order() const { return order_; }
  double smoothing_lambda() const { return lambda_; }
  void set_smoothing_lambda(double l);
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  int eot_id() const { return static_cast<int>(vocab_.size()); }

  void observe(const SentenceSeq& text);

  /// Smoothed conditional p(next | history); next = eot_id() for $.
  double conditional(const std::vector<int>& history, int next) const;

  /// Total log-probability of the sequence (plus the $ factor when
  /// terminated), with histories truncated to order-1.
  double logprob(const SentenceSeq& z) const;

  long long count(const std::vector<int>& history, int next) const;

  std::string to_json() const;
  static SentenceNgram from_json(const std::string& text);
  void save(const std::string& path) const;
  static SentenceNgram load(const std::string& path);

 private:
  std::vector<int> trim_history(const std::vector<int>& history) const;

  std::vector<std::string> vocab_;
  int order_ = 2;
  double lambda_ = 1e-6;
  std::map<std::vector<int>, std::map<int, long long>> counts_;
  std::map<std::vector<int>, long long> totals_;
};

/// Fit on a corpus of terminated sequences over the vocabulary ids.
SentenceNgram fit_ngram(const std::vector<SampledText>& corpus,
                        std::vector<std::string> vocabulary, int order,
                        double smoothing_lambda);

}  // namespace pel
