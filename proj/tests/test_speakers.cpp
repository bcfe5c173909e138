#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles/brute_speaker.hpp"
#include "pel/fixtures.hpp"
#include "pel/rng.hpp"
#include "pel/speakers.hpp"

using namespace pel;

namespace {

// Two worlds, one informative sentence; the softmax evaluates to 2/3 by hand.
WorldModel tiny_model() {
  WorldModel m = WorldModel::propositional({"p"});
  m.add_sentence("a", "p", 1.0);
  m.eot_cost = 1.0;
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("hand-evaluated softmax: informative sentence vs end-of-text") {
  WorldModel m = tiny_model();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const WorldIndex w1 = m.worlds_where("p")[0];
  const auto d = eng.next_sentence_dist({}, w1);
  // weight(a) = exp(log 2 - 1), weight($) = exp(-1): p(a) = 2/3.
  CHECK(d.sentence_prob[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(d.eot_prob == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("equal information and cost means equal probability") {
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("left", "p", 1.4);
  m.add_sentence("right", "q", 1.4);
  m.validate();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const WorldIndex w = m.worlds_where("p & q")[0];
  const auto d = eng.next_sentence_dist({}, w);
  CHECK(d.sentence_prob[0] == doctest::Approx(d.sentence_prob[1]).epsilon(1e-14));
}

TEST_CASE("entailed continuations weigh exactly exp(-cost)") {
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("strong", "p & q", 0.7);
  m.add_sentence("weak", "p", 1.3);
  m.validate();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const WorldIndex w = m.worlds_where("p & q")[0];
  const SentenceSeq ctx = SentenceSeq::of({0});  // strong entails weak
  const auto d = eng.next_sentence_dist(ctx, w);
  // Zero information: the odds against $ are exp(eot_cost - cost(weak)).
  CHECK(d.sentence_prob[1] / d.eot_prob ==
        doctest::Approx(std::exp(m.eot_cost - 1.3)).epsilon(1e-12));
}

TEST_CASE("next-sentence distributions sum to one across random models") {
  for (std::uint64_t seed = 300; seed < 312; ++seed) {
    WorldModel m = random_world_model(seed);
    SpeakerEngine eng(m, SpeakerSpec::gricean());
    Rng rng(seed + 9);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
      SentenceSeq ctx;
      if (trial % 2) ctx.items.push_back(x);
      const auto s = consistent_worlds(m, ctx);
      if (s.empty()) continue;
      const WorldIndex w = s[rng.next_below(s.size())];
      const auto d = eng.next_sentence_dist(ctx, w);
      double total = d.eot_prob;
      for (double p : d.sentence_prob) total += p;
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("preconditions: terminated context and inconsistent world are errors") {
  WorldModel m = tiny_model();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  CHECK_THROWS_AS((void)eng.next_sentence_dist(SentenceSeq::of({0}, true), 0), Error);
  const WorldIndex w_false = m.worlds_where("!p")[0];
  CHECK_THROWS_AS((void)eng.next_sentence_dist(SentenceSeq::of({0}), w_false), Error);
}

TEST_CASE("speaker spec validation") {
  WorldModel m = tiny_model();
  SpeakerSpec bad;
  bad.noise = {0.5};
  CHECK_THROWS_AS(bad.validate(m), Error);  // noise without the noise family
  SpeakerSpec nt = SpeakerSpec::noise_tolerant({1.5});
  CHECK_THROWS_AS(nt.validate(m), Error);  // eps out of range
  SpeakerSpec ex;
  ex.family = SpeakerFamily::explanatory;
  CHECK_THROWS_AS(ex.validate(m), Error);  // missing cost table
}

TEST_CASE("noise-tolerant expected utility matches the worked closed forms") {
  WorldModel m = tiny_model();
  const double eps = 0.35;
  SpeakerEngine eng(m, SpeakerSpec::noise_tolerant_uniform(m, eps));
  const WorldIndex w = m.worlds_where("p")[0];
  const double i_x = std::log(2.0);
  // One sentence plus $: (1 - eps) * i.
  CHECK(eng.expected_utility(SentenceSeq::of({0}, true), w) ==
        doctest::Approx((1 - eps) * i_x).epsilon(1e-14));
  // Repetition: (1 - eps^2) * i.
  CHECK(eng.expected_utility(SentenceSeq::of({0, 0}), w) ==
        doctest::Approx((1 - eps * eps) * i_x).epsilon(1e-14));
}

TEST_CASE("noiseless expected utility reduces to plain sequence information") {
  WorldModel m = random_world_model(404);
  SpeakerEngine eng(m, SpeakerSpec::noise_tolerant_uniform(m, 0.0));
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
    const auto b = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
    const auto s = consistent_worlds(m, SentenceSeq::of({a, b}));
    if (s.empty()) continue;
    const WorldIndex w = s[0];
    CHECK(eng.expected_utility(SentenceSeq::of({a, b}), w) ==
          doctest::Approx(sequence_info(m, SentenceSeq::of({a, b}), w)).epsilon(1e-13));
  }
}

TEST_CASE("expected utility equals the naive all-patterns enumeration") {
  WorldModel m = random_world_model(405);
  std::vector<double> eps(m.lexicon.size());
  Rng rng(11);
  for (auto& e : eps) e = rng.uniform(0.0, 0.8);
  SpeakerEngine eng(m, SpeakerSpec::noise_tolerant(eps));
  for (int trial = 0; trial < 25; ++trial) {
    const auto a = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
    const auto b = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
    std::vector<int> z = {a, b, a};  // repetition included on purpose
    const auto s = consistent_worlds(m, SentenceSeq::of({a, b}));
    if (s.empty()) continue;
    const WorldIndex w = s[0];
    const double lib = eng.expected_utility(SentenceSeq{{a, b, a}, false}, w);
    const double naive = oracle::expected_info(m, eps, z, w);
    CHECK(lib == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("comprehension patterns sum to one and respect the cap") {
  WorldModel m = random_world_model(406);
  std::vector<double> eps(m.lexicon.size(), 0.3);
  SpeakerSpec spec = SpeakerSpec::noise_tolerant(eps);
  SentenceSeq z{{0, 1, 0, 1, 0, 1, 0, 1}, false};
  const auto patterns = comprehension_patterns(spec, z);
  CHECK(patterns.size() == 256);
  double total = 0.0;
  for (const auto& p : patterns) total += p.probability;
  CHECK(std::abs(total - 1.0) < 1e-12);
  SentenceSeq too_long{std::vector<SentenceId>(13, 0), false};
  CHECK_THROWS_AS((void)comprehension_patterns(spec, too_long), Error);
}

TEST_CASE("noise-tolerant at zero noise reproduces the base speaker") {
  WorldModel m = random_world_model(407);
  SpeakerEngine base(m, SpeakerSpec::gricean());
  SpeakerEngine noisy(m, SpeakerSpec::noise_tolerant_uniform(m, 0.0));
  for (WorldIndex w : m.support()) {
    const auto a = base.next_sentence_dist({}, w);
    const auto b = noisy.next_sentence_dist({}, w);
    for (std::size_t y = 0; y < a.sentence_prob.size(); ++y)
      CHECK(std::abs(a.sentence_prob[y] - b.sentence_prob[y]) < 1e-12);
    CHECK(std::abs(a.eot_prob - b.eot_prob) < 1e-12);
  }
}

TEST_CASE("explanatory speaker with the base table reproduces the base speaker") {
  WorldModel m = random_world_model(408);
  SpeakerEngine base(m, SpeakerSpec::gricean());
  SpeakerEngine expl(m, SpeakerSpec::explanatory(ContextualCosts::from_base(m)));
  SentenceSeq ctx;
  ctx.items.push_back(0);
  for (WorldIndex w : consistent_worlds(m, ctx)) {
    const auto a = base.next_sentence_dist(ctx, w);
    const auto b = expl.next_sentence_dist(ctx, w);
    for (std::size_t y = 0; y < a.sentence_prob.size(); ++y)
      CHECK(std::abs(a.sentence_prob[y] - b.sentence_prob[y]) < 1e-12);
    CHECK(std::abs(a.eot_prob - b.eot_prob) < 1e-12);
  }
}

TEST_CASE("prefix probability: empty prefix is certain") {
  WorldModel m = tiny_model();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  CHECK(eng.prefix_logprob({}) == 0.0);
}

TEST_CASE("prefix probabilities are a consistent autoregressive family") {
  // Summing one-step extensions (plus $) recovers the prefix mass.
  WorldModel m = random_world_model(409);
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  for (SentenceId first : {0, 1}) {
    SentenceSeq ctx = SentenceSeq::of({first});
    if (consistent_worlds(m, ctx).empty()) continue;
    double total = std::exp(eng.prefix_logprob(ctx.closed()));
    for (SentenceId y = 0; y < m.num_sentences(); ++y) {
      const double lp = eng.prefix_logprob(ctx.extended(y));
      if (lp != kNegInf) total += std::exp(lp);
    }
    CHECK(total == doctest::Approx(std::exp(eng.prefix_logprob(ctx))).epsilon(1e-12));
  }
}

TEST_CASE("prefix probability matches the independent enumeration oracle") {
  for (std::uint64_t seed = 420; seed < 428; ++seed) {
    WorldModel m = random_world_model(seed);
    SpeakerEngine eng(m, SpeakerSpec::gricean());
    oracle::CostFn cost{&m, nullptr};
    Rng rng(seed);
    for (int trial = 0; trial < 12; ++trial) {
      const auto a = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
      const auto b = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
      const bool term = trial % 2 == 0;
      const double expect = oracle::seq_prob(m, cost, {a, b}, term);
      const double got = eng.prefix_logprob(SentenceSeq{{a, b}, term});
      if (expect == 0.0) {
        CHECK(got == kNegInf);
      } else {
        CHECK(got == doctest::Approx(std::log(expect)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("noise-tolerant prefix probability matches its oracle via patterns") {
  WorldModel m = tiny_model();
  const double eps = 0.25;
  SpeakerEngine eng(m, SpeakerSpec::noise_tolerant_uniform(m, eps));
  // Hand route: p(aa$) = E_w prod of conditionals with incremental expected
  // information; world !p contributes nothing.
  const WorldIndex w = m.worlds_where("p")[0];
  (void)w;
  const double i = std::log(2.0);
  auto cond = [&](double du, double z) { return std::exp(du - 1.0) / z; };
  // Incremental expected information at each position of "a a $".
  const double du1 = (1 - eps) * i;
  const double z1 = std::exp(du1 - 1.0) + std::exp(-1.0);
  const double du2 = (1 - eps * eps) * i - (1 - eps) * i;
  const double z2 = std::exp(du2 - 1.0) + std::exp(-1.0);
  const double du3 = (1 - eps * eps * eps) * i - (1 - eps * eps) * i;
  const double z3 = std::exp(du3 - 1.0) + std::exp(-1.0);
  const double expect = 0.5 * cond(du1, z1) * cond(du2, z2) * (std::exp(-1.0) / z3);
  CHECK(eng.prefix_logprob(SentenceSeq{{0, 0}, true}) ==
        doctest::Approx(std::log(expect)).epsilon(1e-12));
}

TEST_CASE("corpus sampling is deterministic and thread-count invariant") {
  WorldModel m = random_world_model(430);
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const auto a = eng.sample_corpus(500, 99, 12, 1);
  const auto b = eng.sample_corpus(500, 99, 12, 1);
  const auto c = eng.sample_corpus(500, 99, 12, 4);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seq.items == b[i].seq.items);
    CHECK(a[i].seq.items == c[i].seq.items);
    CHECK(a[i].world == c[i].world);
    CHECK(a[i].path_logprob == c[i].path_logprob);
  }
}

TEST_CASE("forced termination at the length cap is flagged") {
  WorldModel m = tiny_model();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const auto corpus = eng.sample_corpus(200, 5, 1, 1);
  bool saw_forced = false, saw_natural = false;
  for (const auto& t : corpus) {
    CHECK(t.seq.terminated);
    if (t.forced_termination) {
      CHECK(t.seq.items.size() == 1);
      saw_forced = true;
    } else {
      saw_natural = true;
    }
  }
  CHECK(saw_forced);
  CHECK(saw_natural);
}

TEST_CASE("sampled path log-probabilities are consistent with the marginal") {
  WorldModel m = random_world_model(431);
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const auto corpus = eng.sample_corpus(30, 123, 6, 1);
  for (const auto& t : corpus) {
    if (t.forced_termination) continue;
    // Recompute the per-world joint for the sampled world and compare with
    // the accumulated value, then check the marginal dominates it.
    double joint = std::log(m.prior[static_cast<std::size_t>(t.world)]);
    SentenceSeq ctx;
    for (SentenceId id : t.seq.items) {
      joint += std::log(eng.conditional(ctx, id, t.world));
      ctx.items.push_back(id);
    }
    joint += std::log(eng.conditional(ctx, std::nullopt, t.world));
    CHECK(joint == doctest::Approx(t.path_logprob).epsilon(1e-12));
    CHECK(eng.prefix_logprob(t.seq) >= t.path_logprob - 1e-12);
  }
}

TEST_CASE("first-sentence frequencies track the exact marginal within 3 sigma") {
  WorldModel m = random_world_model(432);
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const int n = 100000;
  const auto corpus = eng.sample_corpus(n, 2024, 12, 4);
  std::map<SentenceId, int> first_counts;
  for (const auto& t : corpus)
    if (!t.seq.items.empty()) first_counts[t.seq.items[0]]++;
  for (SentenceId y = 0; y < m.num_sentences(); ++y) {
    const double p = std::exp(eng.prefix_logprob(SentenceSeq::of({y})));
    const double sigma = std::sqrt(p * (1 - p) / n);
    const double hat = static_cast<double>(first_counts[y]) / n;
    CHECK(std::abs(hat - p) <= 3.0 * sigma + 1e-12);
  }
}

TEST_CASE("entailed-bigram opening frequency matches its exact prefix probability") {
  // A premise followed by an entailed hypothesis still occurs with the exact
  // (small) probability the speaker assigns it.
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("both hold", "p & q", 1.0);
  m.add_sentence("first holds", "p", 1.0);
  m.validate();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  REQUIRE(entails(m, SentenceSeq::of({0}), 1));
  const int n = 100000;
  const auto corpus = eng.sample_corpus(n, 500, 12, 4);
  int count = 0;
  for (const auto& t : corpus)
    if (t.seq.items.size() >= 2 && t.seq.items[0] == 0 && t.seq.items[1] == 1) ++count;
  const double p = std::exp(eng.prefix_logprob(SentenceSeq{{0, 1}, false}));
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(count) / n - p) <= 3.0 * sigma);
}

TEST_CASE("corpus JSONL round-trips against the model lexicon") {
  WorldModel m = random_world_model(433);
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  const auto corpus = eng.sample_corpus(50, 7, 8, 1);
  const std::string path = "corpus_roundtrip_test.jsonl";
  save_corpus(corpus, m, path);
  const auto back = load_corpus(m, path);
  REQUIRE(back.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(back[i].seq.items == corpus[i].seq.items);
    CHECK(back[i].world == corpus[i].world);
    CHECK(back[i].forced_termination == corpus[i].forced_termination);
  }
  std::remove(path.c_str());
}

TEST_CASE("normalizer is positive and matches the distribution definition") {
  WorldModel m = random_world_model(434);
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  for (WorldIndex w : m.support()) {
    const double z = eng.normalizer({}, w);
    CHECK(z > 0.0);
    const auto d = eng.next_sentence_dist({}, w);
    CHECK(d.eot_prob == doctest::Approx(std::exp(-m.eot_cost) / z).epsilon(1e-12));
  }
}
