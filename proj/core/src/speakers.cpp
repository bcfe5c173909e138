#include "pel/speakers.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "pel/rng.hpp"

namespace pel {

using ordered_json = nlohmann::ordered_json;

const char* speaker_family_name(SpeakerFamily f) {
  switch (f) {
    case SpeakerFamily::gricean: return "gricean";
    case SpeakerFamily::noise_tolerant: return "noise_tolerant";
    case SpeakerFamily::explanatory: return "explanatory";
  }
  return "unknown";
}

SpeakerFamily speaker_family_from_name(const std::string& name) {
  if (name == "gricean") return SpeakerFamily::gricean;
  if (name == "noise_tolerant") return SpeakerFamily::noise_tolerant;
  if (name == "explanatory") return SpeakerFamily::explanatory;
  fail(ErrorCode::invalid_argument, "unknown speaker family: " + name);
}

ContextualCosts ContextualCosts::from_base(const WorldModel& model) {
  ContextualCosts c;
  c.empty_ctx.reserve(model.lexicon.size());
  for (const Sentence& s : model.lexicon) c.empty_ctx.push_back(s.base_cost);
  c.after.assign(model.lexicon.size(), c.empty_ctx);
  return c;
}

double ContextualCosts::cost(const SentenceSeq& ctx, SentenceId y) const {
  const auto yi = static_cast<std::size_t>(y);
  if (ctx.items.empty()) return empty_ctx.at(yi);
  return after.at(static_cast<std::size_t>(ctx.items.back())).at(yi);
}

void SpeakerSpec::validate(const WorldModel& model) const {
  const std::size_t n = model.lexicon.size();
  if (family == SpeakerFamily::noise_tolerant) {
    if (noise.size() != n)
      fail(ErrorCode::invalid_argument, "noise map must cover every lexicon sentence");
    for (double e : noise)
      if (!(e >= 0.0 && e < 1.0))
        fail(ErrorCode::invalid_argument, "noise probabilities must lie in [0, 1)");
  } else if (!noise.empty()) {
    fail(ErrorCode::invalid_argument, "noise map is only valid for the noise_tolerant family");
  }
  if (family == SpeakerFamily::explanatory) {
    if (!contextual_cost)
      fail(ErrorCode::invalid_argument, "explanatory speaker requires a contextual cost table");
    if (contextual_cost->empty_ctx.size() != n || contextual_cost->after.size() != n)
      fail(ErrorCode::invalid_argument, "contextual cost table does not match the lexicon");
    for (const auto& row : contextual_cost->after)
      if (row.size() != n)
        fail(ErrorCode::invalid_argument, "contextual cost table does not match the lexicon");
  } else if (contextual_cost) {
    fail(ErrorCode::invalid_argument, "contextual costs are only valid for the explanatory family");
  }
  if (!(temperature > 0.0)) fail(ErrorCode::invalid_argument, "temperature must be positive");
  if (comprehension_cap < 1) fail(ErrorCode::invalid_argument, "comprehension cap must be >= 1");
}

SpeakerSpec SpeakerSpec::gricean() { return SpeakerSpec{}; }

SpeakerSpec SpeakerSpec::noise_tolerant(std::vector<double> eps) {
  SpeakerSpec s;
  s.family = SpeakerFamily::noise_tolerant;
  s.noise = std::move(eps);
  return s;
}

SpeakerSpec SpeakerSpec::noise_tolerant_uniform(const WorldModel& model, double eps) {
  return noise_tolerant(std::vector<double>(model.lexicon.size(), eps));
}

SpeakerSpec SpeakerSpec::explanatory(ContextualCosts costs) {
  SpeakerSpec s;
  s.family = SpeakerFamily::explanatory;
  s.contextual_cost = std::move(costs);
  return s;
}

std::vector<ComprehensionPattern> comprehension_patterns(const SpeakerSpec& spec,
                                                         const SentenceSeq& z) {
  const std::size_t n = z.items.size();
  if (n > static_cast<std::size_t>(spec.comprehension_cap))
    fail(ErrorCode::enumeration_budget_exceeded, "sequence exceeds the comprehension cap");
  auto eps = [&](SentenceId id) {
    return spec.noise.empty() ? 0.0 : spec.noise.at(static_cast<std::size_t>(id));
  };
  std::vector<ComprehensionPattern> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    ComprehensionPattern p;
    p.probability = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double e = eps(z.items[t]);
      if (mask & (std::uint64_t{1} << t)) {
        p.probability *= 1.0 - e;
        p.indices.push_back(static_cast<int>(t));
      } else {
        p.probability *= e;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

SpeakerEngine::SpeakerEngine(const WorldModel& model, SpeakerSpec spec)
    : model_(&model), spec_(std::move(spec)) {
  model.validate();
  spec_.validate(model);
  truthful_at_.assign(static_cast<std::size_t>(model.num_worlds()), {});
  for (SentenceId y = 0; y < model.num_sentences(); ++y)
    for (WorldIndex w : model.lexicon[static_cast<std::size_t>(y)].denotation)
      truthful_at_[static_cast<std::size_t>(w)].push_back(y);
  support_mass_ = model.prior_mass(model.support());
}

void SpeakerEngine::check_budget(std::size_t length) const {
  const std::uint64_t ops = static_cast<std::uint64_t>(model_->num_worlds()) *
                            static_cast<std::uint64_t>(model_->num_sentences()) *
                            static_cast<std::uint64_t>(length + 1);
  if (ops > spec_.enumeration_budget)
    fail(ErrorCode::enumeration_budget_exceeded,
         "exact enumeration budget exceeded (worlds x lexicon x length)");
}

const SpeakerEngine::CtxData& SpeakerEngine::softmax_ctx(const SentenceSeq& ctx) const {
  const int cost_key =
      (spec_.family == SpeakerFamily::explanatory && !ctx.items.empty()) ? ctx.items.back() : -1;
  // Listener state depends on the consistent set only; cost state on the last
  // sentence. Collapse the cache key accordingly so long sampled contexts do
  // not blow up the cache.
  auto consistent = consistent_worlds(*model_, ctx);
  const auto key = std::make_pair(consistent, cost_key);

  std::lock_guard<std::mutex> lock(mu_);
  auto it = ctx_cache_.find(key);
  if (it != ctx_cache_.end()) return *it->second;

  auto data = std::make_unique<CtxData>();
  data->consistent = std::move(consistent);
  data->member.assign(static_cast<std::size_t>(model_->num_worlds()), 0);
  for (WorldIndex w : data->consistent) data->member[static_cast<std::size_t>(w)] = 1;
  data->log_mass = std::log(model_->prior_mass(data->consistent));
  data->eot_weight = std::exp(-model_->eot_cost / spec_.temperature);
  data->weight.assign(model_->lexicon.size(), 0.0);
  for (SentenceId y = 0; y < model_->num_sentences(); ++y) {
    const Sentence& s = model_->lexicon[static_cast<std::size_t>(y)];
    double joint = 0.0;
    for (WorldIndex w : s.denotation)
      if (data->member[static_cast<std::size_t>(w)])
        joint += model_->prior[static_cast<std::size_t>(w)];
    if (joint <= 0.0) continue;  // never truthful in this context
    const double info = data->log_mass - std::log(joint);
    const double cost = spec_.family == SpeakerFamily::explanatory
                            ? spec_.contextual_cost->cost(ctx, y)
                            : s.base_cost;
    data->weight[static_cast<std::size_t>(y)] = std::exp((info - cost) / spec_.temperature);
  }
  auto [pos, inserted] = ctx_cache_.emplace(key, std::move(data));
  (void)inserted;
  return *pos->second;
}

double SpeakerEngine::info_kernel(const std::vector<SentenceId>& sorted_items,
                                  WorldIndex w) const {
  if (sorted_items.empty()) return 0.0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = info_cache_.find(std::make_pair(sorted_items, w));
    if (it != info_cache_.end()) return it->second;
  }
  std::vector<WorldIndex> acc = model_->support();
  for (SentenceId id : sorted_items)
    acc = detail::intersect_sorted(acc, model_->lexicon[static_cast<std::size_t>(id)].denotation);
  double value;
  if (!std::binary_search(acc.begin(), acc.end(), w)) {
    value = kNegInf;
  } else {
    value = std::log(support_mass_) - std::log(model_->prior_mass(acc));
  }
  std::lock_guard<std::mutex> lock(mu_);
  info_cache_.emplace(std::make_pair(sorted_items, w), value);
  return value;
}

// Expected (log- or linear-space) utility of a sequence under the noisy
// channel. Patterns whose comprehended subsequences contain the same set of
// distinct sentences contribute identical information, so the 2^|z| pattern
// sum is folded over distinct sentences with multiplicity: a sentence with m
// copies is missed entirely with probability eps^m.
double SpeakerEngine::utility_kernel(const SentenceSeq& z, WorldIndex w, UtilityForm form) const {
  if (z.items.size() > static_cast<std::size_t>(spec_.comprehension_cap))
    fail(ErrorCode::enumeration_budget_exceeded, "sequence exceeds the comprehension cap");
  std::vector<SentenceId> distinct;
  std::vector<int> mult;
  for (SentenceId id : z.items) {
    auto it = std::find(distinct.begin(), distinct.end(), id);
    if (it == distinct.end()) {
      distinct.push_back(id);
      mult.push_back(1);
    } else {
      ++mult[static_cast<std::size_t>(it - distinct.begin())];
    }
  }
  const std::size_t k = distinct.size();
  auto eps = [&](std::size_t i) {
    const double e =
        spec_.noise.empty() ? 0.0 : spec_.noise.at(static_cast<std::size_t>(distinct[i]));
    return std::pow(e, mult[i]);
  };
  const bool log_space = form == UtilityForm::expected_information;
  double acc = 0.0;
  std::vector<SentenceId> subset;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    double p = 1.0;
    subset.clear();
    for (std::size_t i = 0; i < k; ++i) {
      const double miss = eps(i);
      if (mask & (std::uint64_t{1} << i)) {
        p *= 1.0 - miss;
        subset.push_back(distinct[i]);
      } else {
        p *= miss;
      }
    }
    if (p == 0.0) continue;
    std::sort(subset.begin(), subset.end());
    const double info = info_kernel(subset, w);
    if (info == kNegInf)
      fail(ErrorCode::invalid_argument, "expected utility requires a truthful sequence");
    acc += p * (log_space ? info : std::exp(info));
  }
  return log_space ? acc : std::log(acc);
}

double SpeakerEngine::expected_utility(const SentenceSeq& z, WorldIndex w) const {
  if (spec_.family != SpeakerFamily::noise_tolerant)
    fail(ErrorCode::invalid_argument, "expected utility is defined for noise-tolerant speakers");
  // The reported quantity is always the pattern-expected information,
  // independent of the utility form driving the conditionals.
  return utility_kernel(z, w, UtilityForm::expected_information);
}

double SpeakerEngine::noise_weight(const SentenceSeq& ctx, double base_utility,
                                   std::optional<SentenceId> next, WorldIndex w) const {
  if (!next.has_value()) {
    // $ is always comprehended and carries no information.
    return std::exp(-model_->eot_cost / spec_.temperature);
  }
  const SentenceId y = *next;
  const double u = utility_kernel(ctx.extended(y), w, spec_.utility_form) - base_utility;
  const double cost = model_->lexicon[static_cast<std::size_t>(y)].base_cost;
  return std::exp((u - cost) / spec_.temperature);
}

NextSentenceDist SpeakerEngine::noise_dist(const SentenceSeq& ctx, WorldIndex w) const {
  const double base = utility_kernel(ctx, w, spec_.utility_form);
  NextSentenceDist d;
  d.sentence_prob.assign(model_->lexicon.size(), 0.0);
  double z = 0.0;
  for (SentenceId y : truthful_at_[static_cast<std::size_t>(w)]) {
    const double wt = noise_weight(ctx, base, y, w);
    d.sentence_prob[static_cast<std::size_t>(y)] = wt;
    z += wt;
  }
  d.eot_prob = noise_weight(ctx, base, std::nullopt, w);
  z += d.eot_prob;
  for (double& v : d.sentence_prob) v /= z;
  d.eot_prob /= z;
  return d;
}

NextSentenceDist SpeakerEngine::next_sentence_dist(const SentenceSeq& ctx, WorldIndex w) const {
  if (ctx.terminated) fail(ErrorCode::invalid_argument, "context is already terminated");
  if (w < 0 || w >= model_->num_worlds() || model_->prior[static_cast<std::size_t>(w)] <= 0.0)
    fail(ErrorCode::invalid_argument, "world outside the prior support");
  if (spec_.family == SpeakerFamily::noise_tolerant) {
    auto s = consistent_worlds(*model_, ctx);
    if (!std::binary_search(s.begin(), s.end(), w))
      fail(ErrorCode::invalid_argument, "context is false in the speaker's world");
    return noise_dist(ctx, w);
  }
  const CtxData& c = softmax_ctx(ctx);
  if (!c.member[static_cast<std::size_t>(w)])
    fail(ErrorCode::invalid_argument, "context is false in the speaker's world");
  NextSentenceDist d;
  d.sentence_prob.assign(model_->lexicon.size(), 0.0);
  double z = c.eot_weight;
  for (SentenceId y : truthful_at_[static_cast<std::size_t>(w)]) {
    d.sentence_prob[static_cast<std::size_t>(y)] = c.weight[static_cast<std::size_t>(y)];
    z += c.weight[static_cast<std::size_t>(y)];
  }
  for (double& v : d.sentence_prob) v /= z;
  d.eot_prob = c.eot_weight / z;
  return d;
}

double SpeakerEngine::conditional(const SentenceSeq& ctx, std::optional<SentenceId> next,
                                  WorldIndex w) const {
  NextSentenceDist d = next_sentence_dist(ctx, w);
  if (!next.has_value()) return d.eot_prob;
  return d.sentence_prob.at(static_cast<std::size_t>(*next));
}

double SpeakerEngine::normalizer(const SentenceSeq& ctx, WorldIndex w) const {
  if (spec_.family == SpeakerFamily::noise_tolerant)
    fail(ErrorCode::invalid_argument, "normalizer is exposed for softmax-family speakers");
  const CtxData& c = softmax_ctx(ctx);
  if (!c.member[static_cast<std::size_t>(w)])
    fail(ErrorCode::invalid_argument, "context is false in the speaker's world");
  double z = c.eot_weight;
  for (SentenceId y : truthful_at_[static_cast<std::size_t>(w)])
    z += c.weight[static_cast<std::size_t>(y)];
  return z;
}

double SpeakerEngine::prefix_logprob(const SentenceSeq& z) const {
  check_budget(z.items.size());
  const auto support = model_->support();
  const std::size_t n = z.items.size();

  if (spec_.family != SpeakerFamily::noise_tolerant) {
    // One shared context per position; per-world normalizers via the
    // truthful-sentence index.
    std::vector<const CtxData*> ctxs;
    ctxs.reserve(n + 1);
    SentenceSeq prefix;
    for (std::size_t t = 0; t <= n; ++t) {
      ctxs.push_back(&softmax_ctx(prefix));
      if (t < n) prefix.items.push_back(z.items[t]);
    }
    double total = 0.0;
    for (WorldIndex w : support) {
      double p = model_->prior[static_cast<std::size_t>(w)];
      for (std::size_t t = 0; t < n && p > 0.0; ++t) {
        const CtxData& c = *ctxs[t];
        const double wt = c.weight[static_cast<std::size_t>(z.items[t])];
        const Sentence& s = model_->lexicon[static_cast<std::size_t>(z.items[t])];
        if (wt == 0.0 ||
            !std::binary_search(s.denotation.begin(), s.denotation.end(), w)) {
          p = 0.0;
          break;
        }
        double zz = c.eot_weight;
        for (SentenceId y : truthful_at_[static_cast<std::size_t>(w)])
          zz += c.weight[static_cast<std::size_t>(y)];
        p *= wt / zz;
      }
      if (p > 0.0 && z.terminated) {
        const CtxData& c = *ctxs[n];
        double zz = c.eot_weight;
        for (SentenceId y : truthful_at_[static_cast<std::size_t>(w)])
          zz += c.weight[static_cast<std::size_t>(y)];
        p *= c.eot_weight / zz;
      }
      total += p;
    }
    return total > 0.0 ? std::log(total) : kNegInf;
  }

  // Noise-tolerant: per-world chain of incremental expected utilities.
  double total = 0.0;
  for (WorldIndex w : support) {
    double p = model_->prior[static_cast<std::size_t>(w)];
    SentenceSeq prefix;
    bool dead = false;
    for (std::size_t t = 0; t < n; ++t) {
      const Sentence& s = model_->lexicon[static_cast<std::size_t>(z.items[t])];
      if (!std::binary_search(s.denotation.begin(), s.denotation.end(), w)) {
        dead = true;
        break;
      }
      NextSentenceDist d = noise_dist(prefix, w);
      p *= d.sentence_prob[static_cast<std::size_t>(z.items[t])];
      prefix.items.push_back(z.items[t]);
    }
    if (dead) continue;
    if (z.terminated) {
      NextSentenceDist d = noise_dist(prefix, w);
      p *= d.eot_prob;
    }
    total += p;
  }
  return total > 0.0 ? std::log(total) : kNegInf;
}

std::vector<SentenceId> SpeakerEngine::entailed_candidates(const SentenceSeq& ctx) const {
  auto s = consistent_worlds(*model_, ctx);
  std::vector<SentenceId> out;
  for (SentenceId y = 0; y < model_->num_sentences(); ++y)
    if (detail::is_subset_sorted(s, model_->lexicon[static_cast<std::size_t>(y)].denotation))
      out.push_back(y);
  return out;
}

double SpeakerEngine::marginal_next_prob(const SentenceSeq& ctx,
                                         std::optional<SentenceId> next) const {
  if (ctx.terminated) fail(ErrorCode::invalid_argument, "context is already terminated");
  const double lp_ctx = prefix_logprob(ctx);
  if (lp_ctx == kNegInf)
    fail(ErrorCode::degenerate_probability, "context has probability zero under every world");
  const SentenceSeq ext = next.has_value() ? ctx.extended(*next) : ctx.closed();
  const double lp_ext = prefix_logprob(ext);
  return lp_ext == kNegInf ? 0.0 : std::exp(lp_ext - lp_ctx);
}

std::vector<SampledText> SpeakerEngine::sample_corpus(int n_texts, std::uint64_t seed,
                                                      int max_len, int jobs) const {
  if (n_texts < 1) fail(ErrorCode::invalid_argument, "n_texts must be >= 1");
  if (max_len < 1) fail(ErrorCode::invalid_argument, "max_len must be >= 1");
  std::vector<SampledText> out(static_cast<std::size_t>(n_texts));

  auto run_range = [&](const SpeakerEngine& engine, int lo, int hi) {
    std::vector<double> weights(engine.model_->lexicon.size() + 1);
    for (int i = lo; i < hi; ++i) {
      Rng rng = Rng::for_item(seed, static_cast<std::uint64_t>(i));
      SampledText text;
      text.world = static_cast<WorldIndex>(rng.pick_weighted(engine.model_->prior));
      text.path_logprob = std::log(engine.model_->prior[static_cast<std::size_t>(text.world)]);
      SentenceSeq seq;
      while (true) {
        NextSentenceDist d = engine.next_sentence_dist(seq, text.world);
        for (std::size_t y = 0; y < d.sentence_prob.size(); ++y) weights[y] = d.sentence_prob[y];
        weights.back() = d.eot_prob;
        const std::size_t pick = rng.pick_weighted(weights);
        if (pick == weights.size() - 1) {
          text.path_logprob += std::log(d.eot_prob);
          seq.terminated = true;
          break;
        }
        text.path_logprob += std::log(d.sentence_prob[pick]);
        seq.items.push_back(static_cast<SentenceId>(pick));
        if (static_cast<int>(seq.items.size()) >= max_len) {
          seq.terminated = true;
          text.forced_termination = true;
          break;
        }
      }
      text.seq = std::move(seq);
      out[static_cast<std::size_t>(i)] = std::move(text);
    }
  };

  if (jobs <= 1) {
    run_range(*this, 0, n_texts);
    return out;
  }
  const int n_threads = std::min(jobs, n_texts);
  std::vector<std::thread> threads;
  std::vector<std::unique_ptr<SpeakerEngine>> engines;
  for (int t = 0; t < n_threads; ++t)
    engines.push_back(std::make_unique<SpeakerEngine>(*model_, spec_));
  const int chunk = (n_texts + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n_texts, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&, t, lo, hi] { run_range(*engines[static_cast<std::size_t>(t)], lo, hi); });
  }
  for (auto& th : threads) th.join();
  return out;
}

void save_corpus(const std::vector<SampledText>& corpus, const WorldModel& model,
                 const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  for (const SampledText& t : corpus) {
    ordered_json j;
    ordered_json sentences = ordered_json::array();
    for (SentenceId id : t.seq.items)
      sentences.push_back(model.lexicon[static_cast<std::size_t>(id)].surface);
    j["sentences"] = std::move(sentences);
    j["world"] = t.world;
    j["forced_termination"] = t.forced_termination;
    f << j.dump() << "\n";
  }
}

std::string contextual_costs_to_json(const ContextualCosts& costs) {
  ordered_json j;
  j["empty_ctx"] = costs.empty_ctx;
  j["after"] = costs.after;
  return j.dump(2) + "\n";
}

ContextualCosts contextual_costs_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("contextual cost JSON: ") + e.what());
  }
  ContextualCosts c;
  c.empty_ctx = j.at("empty_ctx").get<std::vector<double>>();
  c.after = j.at("after").get<std::vector<std::vector<double>>>();
  return c;
}

std::vector<SampledText> load_corpus(const WorldModel& model, const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + path);
  std::vector<SampledText> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::parse,
           "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    SampledText t;
    for (const auto& s : j.at("sentences"))
      t.seq.items.push_back(model.require_sentence(s.get<std::string>()));
    t.seq.terminated = true;
    t.world = j.value("world", 0);
    t.forced_termination = j.value("forced_termination", false);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace pel
