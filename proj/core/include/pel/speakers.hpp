#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pel/worlds.hpp"

namespace pel {

enum class SpeakerFamily { gricean, noise_tolerant, explanatory };
enum class UtilityForm { expected_information, expected_exp_information };

const char* speaker_family_name(SpeakerFamily f);
SpeakerFamily speaker_family_from_name(const std::string& name);

/// Context-dependent utterance costs c(y | ctx), keyed on the last context
/// sentence. The end-of-text cost is the model's eot_cost in every context.
struct ContextualCosts {
  std::vector<double> empty_ctx;           // c(y | empty context)
  std::vector<std::vector<double>> after;  // after[prev][y] = c(y | ... prev)

  static ContextualCosts from_base(const WorldModel& model);
  double cost(const SentenceSeq& ctx, SentenceId y) const;
};

struct SpeakerSpec {
  SpeakerFamily family = SpeakerFamily::gricean;
  std::vector<double> noise;  // per-sentence miss probability; noise_tolerant only
  std::optional<ContextualCosts> contextual_cost;  // explanatory only
  UtilityForm utility_form = UtilityForm::expected_information;
  double temperature = 1.0;  // experimental knob; 1 = model as written
  int comprehension_cap = 12;
  std::uint64_t enumeration_budget = 1'000'000'000ULL;

  void validate(const WorldModel& model) const;

  static SpeakerSpec gricean();
  static SpeakerSpec noise_tolerant(std::vector<double> eps);
  static SpeakerSpec noise_tolerant_uniform(const WorldModel& model, double eps);
  static SpeakerSpec explanatory(ContextualCosts costs);
};

/// Next-sentence distribution at a (context, world) pair. Probabilities over
/// the lexicon plus the end-of-text sentence; sums to 1.
struct NextSentenceDist {
  std::vector<double> sentence_prob;
  double eot_prob = 0.0;
};

struct SampledText {
  SentenceSeq seq;  // always terminated
  WorldIndex world = 0;
  bool forced_termination = false;
  double path_logprob = 0.0;  // log prior(world) + sum of sampled conditionals
};

/// Comprehension pattern over a sequence: the subset of positions a noisy
/// listener actually interprets, with its probability.
struct ComprehensionPattern {
  std::vector<int> indices;
  double probability = 0.0;
};

std::vector<ComprehensionPattern> comprehension_patterns(const SpeakerSpec& spec,
                                                         const SentenceSeq& z);

/// Exact inference for one speaker over one world model. All methods are
/// const and thread-safe; internal caches are guarded.
class SpeakerEngine {
 public:
  SpeakerEngine(const WorldModel& model, SpeakerSpec spec);

  const WorldModel& model() const { return *model_; }
  const SpeakerSpec& spec() const { return spec_; }

  /// p(y | ctx, w) over lexicon sentences and $. Requires w consistent with
  /// ctx and ctx not terminated.
  NextSentenceDist next_sentence_dist(const SentenceSeq& ctx, WorldIndex w) const;

  /// Single conditional p(next | ctx, w); next = nullopt means $.
  double conditional(const SentenceSeq& ctx, std::optional<SentenceId> next, WorldIndex w) const;

  /// Noise-tolerant expected information of z at w: the comprehension-pattern
  /// average of listener information. Requires every sentence of z truthful
  /// at w and |z| within the comprehension cap.
  double expected_utility(const SentenceSeq& z, WorldIndex w) const;

  /// log of the prior-expected product of conditionals along z; the final
  /// factor is the $ probability when z is terminated. -inf when impossible.
  double prefix_logprob(const SentenceSeq& z) const;

  /// Speaker normalizer at (ctx, w): the sum of unnormalized next-sentence
  /// weights. Defined for gricean and explanatory speakers.
  double normalizer(const SentenceSeq& ctx, WorldIndex w) const;

  std::vector<SampledText> sample_corpus(int n_texts, std::uint64_t seed, int max_len,
                                         int jobs = 1) const;

  /// Sentences entailed by ctx (denotation covers the consistent set).
  std::vector<SentenceId> entailed_candidates(const SentenceSeq& ctx) const;

  /// Prior-mixture next-sentence probability p(y | ctx) = p(ctx.y)/p(ctx).
  double marginal_next_prob(const SentenceSeq& ctx, std::optional<SentenceId> next) const;

 private:
  struct CtxData {
    std::vector<WorldIndex> consistent;
    std::vector<char> member;  // world membership mask for `consistent`
    double log_mass = 0.0;
    std::vector<double> weight;  // exp((info - cost)/T), 0 when jointly inconsistent
    double eot_weight = 0.0;
  };

  const CtxData& softmax_ctx(const SentenceSeq& ctx) const;
  double info_kernel(const std::vector<SentenceId>& sorted_items, WorldIndex w) const;
  double utility_kernel(const SentenceSeq& z, WorldIndex w, UtilityForm form) const;
  double noise_weight(const SentenceSeq& ctx, double base_utility,
                      std::optional<SentenceId> next, WorldIndex w) const;
  NextSentenceDist noise_dist(const SentenceSeq& ctx, WorldIndex w) const;
  void check_budget(std::size_t length) const;

  const WorldModel* model_;
  SpeakerSpec spec_;
  std::vector<std::vector<SentenceId>> truthful_at_;  // world -> truthful sentences
  double support_mass_ = 1.0;

  mutable std::mutex mu_;
  mutable std::map<std::pair<std::vector<SentenceId>, int>, std::unique_ptr<CtxData>> ctx_cache_;
  mutable std::map<std::pair<std::vector<SentenceId>, WorldIndex>, double> info_cache_;
};

/// Corpus JSONL: one text per line, {"sentences": [...], "world": i,
/// "forced_termination": b}.
void save_corpus(const std::vector<SampledText>& corpus, const WorldModel& model,
                 const std::string& path);
std::vector<SampledText> load_corpus(const WorldModel& model, const std::string& path);

std::string contextual_costs_to_json(const ContextualCosts& costs);
ContextualCosts contextual_costs_from_json(const std::string& text);

}  // namespace pel
