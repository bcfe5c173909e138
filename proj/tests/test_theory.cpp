#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles/brute_speaker.hpp"
#include "pel/entailment_tests.hpp"
#include "pel/fixtures.hpp"
#include "pel/rng.hpp"
#include "pel/scoring.hpp"

using namespace pel;

TEST_CASE("identical premise and hypothesis score exactly zero") {
  WorldModel m = random_world_model(600);
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  const std::string s = m.lexicon[0].surface;
  const auto b = entailment_score(prov, {s}, {s});
  CHECK(b.score == 0.0);
  CHECK(b.lp_xy == b.lp_yy);
  CHECK(b.lp_xeot == b.lp_yeot);
}

TEST_CASE("score decomposes exactly into its four features") {
  WorldModel m = random_world_model(601);
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  const auto b = entailment_score(prov, {m.lexicon[0].surface}, {m.lexicon[1].surface});
  CHECK(b.score == b.lp_xy - b.lp_xeot - b.lp_yy + b.lp_yeot);
  CHECK(b.n_repetitions == 1);
}

TEST_CASE("entailed pairs score zero under the exact speaker") {
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("both hold", "p & q", 0.9);
  m.add_sentence("first holds", "p", 1.1);
  m.add_sentence("second holds", "q", 1.3);
  m.validate();
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  const auto b = entailment_score(prov, {"both hold"}, {"first holds"});
  CHECK(std::abs(b.score) < 1e-9);
}

TEST_CASE("a contradictory pair raises the degenerate-probability error") {
  WorldModel m = WorldModel::propositional({"p"});
  m.add_sentence("yes", "p", 1.0);
  m.add_sentence("no", "!p", 1.0);
  m.validate();
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  try {
    (void)entailment_score(prov, {"yes"}, {"no"});
    FAIL("expected the degenerate-probability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_probability);
  }
}

TEST_CASE("non-entailed score equals the model-side value") {
  // Four consistent worlds for the premise, two after the hypothesis.
  WorldModel m = WorldModel::propositional({"p", "q", "r"});
  m.add_sentence("ctx", "p", 1.0);
  m.add_sentence("hyp", "q", 1.0);
  m.add_sentence("extra", "q & r", 0.5);
  m.validate();
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  const SentenceSeq x = SentenceSeq::of({0});
  CHECK(consistent_worlds(m, x).size() == 4);
  CHECK(detail::intersect_sorted(consistent_worlds(m, x), m.lexicon[1].denotation).size() == 2);
  const auto b = entailment_score(prov, {"ctx"}, {"hyp"});
  const auto sv = semantic_value(m, SpeakerSpec::gricean(), x, 1);
  CHECK(b.score == doctest::Approx(sv.value).epsilon(1e-12));
  CHECK(std::abs(b.score - sv.value) < 1e-9);
}

TEST_CASE("model-side value: entailment and self-pairs sit at exactly zero") {
  WorldModel m = random_world_model(602);
  for (SentenceId x = 0; x < m.num_sentences(); ++x) {
    SentenceSeq sx = SentenceSeq::of({x});
    if (consistent_worlds(m, sx).empty()) continue;
    CHECK(semantic_value(m, SpeakerSpec::gricean(), sx, x).value == 0.0);
    for (SentenceId y = 0; y < m.num_sentences(); ++y)
      if (entails(m, sx, y))
        CHECK(semantic_value(m, SpeakerSpec::gricean(), sx, y).value == 0.0);
  }
}

TEST_CASE("model-side value approaches log 2 when one world dominates the weights") {
  // S(x) has two worlds; the hypothesis keeps one. Cheap informative
  // sentences concentrated on the other world shrink its inverse-normalizer
  // weight, so the value approaches log(2) from below.
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("ctx", "p", 1.0);
  m.add_sentence("hyp", "p & q", 1.0);
  for (int k = 0; k < 10; ++k)
    m.add_sentence("noise " + std::to_string(k), "p & !q", 0.0);
  m.validate();
  const auto sv = semantic_value(m, SpeakerSpec::gricean(), SentenceSeq::of({0}), 1);
  CHECK(sv.value < std::log(2.0));
  CHECK(sv.value == doctest::Approx(std::log(2.0)).epsilon(0.03));

  // Brute-force route: numerator and denominator from the oracle conditionals.
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  oracle::CostFn cost{&m, nullptr};
  const double pxy = oracle::seq_prob(m, cost, {0, 1}, false);
  const double pxe = oracle::seq_prob(m, cost, {0}, true);
  const double pyy = oracle::seq_prob(m, cost, {1, 1}, false);
  const double pye = oracle::seq_prob(m, cost, {1}, true);
  const double brute = std::log(pxy) - std::log(pxe) - std::log(pyy) + std::log(pye);
  CHECK(sv.value == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("repetition test at n=1 is the base test") {
  WorldModel m = random_world_model(603);
  ExactSpeakerProvider prov(m, SpeakerSpec::gricean());
  const auto a = entailment_score(prov, {m.lexicon[0].surface}, {m.lexicon[1].surface});
  const auto b =
      repeated_entailment_score(prov, {m.lexicon[0].surface}, {m.lexicon[1].surface}, 1);
  CHECK(a.score == b.score);
  CHECK_THROWS_AS(
      (void)repeated_entailment_score(prov, {m.lexicon[0].surface}, {m.lexicon[1].surface}, 0),
      Error);
}

TEST_CASE("repetition test error follows the premise-noise closed form") {
  // With noise on the premise sentence only, the repeated test equals
  // eps^n * i(y) exactly, so the error halves by a factor eps per step.
  const Prop2Fixture fx = prop2_fixture();
  const double i_y = std::log(2.0);
  for (double eps : {0.2, 0.5}) {
    std::vector<double> noise(fx.model.lexicon.size(), 0.0);
    noise[static_cast<std::size_t>(fx.x)] = eps;
    ExactSpeakerProvider prov(fx.model, SpeakerSpec::noise_tolerant(noise));
    const std::string sx = fx.model.lexicon[static_cast<std::size_t>(fx.x)].surface;
    const std::string sy = fx.model.lexicon[static_cast<std::size_t>(fx.y)].surface;
    for (int n = 1; n <= 6; ++n) {
      const auto b = repeated_entailment_score(prov, {sx}, {sy}, n);
      CHECK(std::abs(b.score - std::pow(eps, n) * i_y) < 1e-12);
    }
  }
}

TEST_CASE("repetition convergence report: monotone errors with slope log eps") {
  const Prop2Fixture fx = prop2_fixture();
  const auto r = verify_prop2(fx.model, fx.x, fx.y, {0.0, 0.2, 0.3, 0.5}, 6, 0.2, 1e-9);
  CHECK(r.pass);
  CHECK(r.expected == 0.0);
  for (const auto& c : r.curves) {
    if (c.eps == 0.0) {
      for (double e : c.errors) CHECK(e <= 1e-9);
    } else {
      CHECK(c.monotone);
      for (double s : c.log_slopes) CHECK(s == doctest::Approx(std::log(c.eps)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS((void)verify_prop2(fx.model, fx.y, fx.x, {0.2}, 6, 0.2, 1e-9), Error);
}

TEST_CASE("base-cost identity sweep holds to 1e-9 on random models") {
  for (std::uint64_t seed = 640; seed < 650; ++seed) {
    WorldModel m = random_world_model(seed);
    const auto r = verify_prop1(m, 1e-9);
    CHECK(r.pass);
    CHECK(r.max_abs_deviation <= 1e-9);
    CHECK(r.n_pairs > 0);
  }
}

TEST_CASE("contextual-cost identity sweep holds to 1e-9 on random tables") {
  for (std::uint64_t seed = 660; seed < 670; ++seed) {
    WorldModel m = random_world_model(seed);
    const auto spec = SpeakerSpec::explanatory(random_contextual_costs(m, seed * 3 + 1));
    const auto r = verify_prop3(m, spec, 1e-9);
    CHECK(r.pass);
    CHECK(r.max_abs_deviation <= 1e-9);
  }
}

TEST_CASE("cost delta: definitional arithmetic and the identity route") {
  WorldModel m = random_world_model(671);
  ContextualCosts costs = ContextualCosts::from_base(m);
  SpeakerSpec base_table = SpeakerSpec::explanatory(costs);
  CHECK(cost_delta(m, base_table, 0, 1) == 0.0);

  m.lexicon[1].base_cost = 5.0;
  costs = ContextualCosts::from_base(m);
  costs.after[0][1] = 2.0;
  SpeakerSpec spec = SpeakerSpec::explanatory(costs);
  CHECK(cost_delta(m, spec, 0, 1) == 3.0);

  // Identity route: delta(x, y) = score - value + delta(y, y).
  ExactSpeakerProvider prov(m, spec);
  SentenceSeq sx = SentenceSeq::of({0});
  if (!consistent_worlds(m, sx).empty() &&
      !consistent_worlds(m, SentenceSeq::of({1})).empty()) {
    const auto b = try_entailment_score(prov, {m.lexicon[0].surface}, {m.lexicon[1].surface}, 1);
    if (!b.degenerate) {
      const double e = semantic_value(m, spec, sx, 1).value;
      CHECK(cost_delta(m, spec, 0, 1) ==
            doctest::Approx(b.score - e + cost_delta(m, spec, 1, 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("no entailed continuation means zero entailed mass") {
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("left", "p", 1.0);
  m.add_sentence("right", "q", 1.0);
  m.validate();
  SpeakerEngine eng(m, SpeakerSpec::gricean());
  CHECK(entailed_continuation_mass(eng, {}) == 0.0);
}

TEST_CASE("two-candidate redundancy fixture matches its closed form") {
  // Every world offers one zero-information continuation and one
  // world-pinning alternative of equal cost; with N worlds the alternative
  // carries log N nats and the entailed mass is 1/(N + 2).
  for (int n : {10, 1000}) {
    WorldModel m = redundancy_fixture(n);
    SpeakerEngine eng(m, SpeakerSpec::gricean());
    const double mass = entailed_continuation_mass(eng, {});
    CHECK(std::abs(mass - 1.0 / (n + 2.0)) < 1e-12);
  }
}

TEST_CASE("noise tolerance raises the entailed-continuation mass") {
  // After one informative sentence, every remaining candidate is entailed;
  // a noisier channel shifts mass toward repeating rather than stopping.
  const Prop2Fixture fx = prop2_fixture();
  SentenceSeq ctx = SentenceSeq::of({fx.x});
  double last = -1.0;
  for (double eps : {0.0, 0.3, 0.6}) {
    SpeakerEngine eng(fx.model, SpeakerSpec::noise_tolerant_uniform(fx.model, eps));
    const double mass = entailed_continuation_mass(eng, ctx);
    CHECK(mass > last);
    last = mass;
  }
}

TEST_CASE("redundancy bound closed forms") {
  CHECK(gricean_redundancy_bound(0.4, 30) == doctest::Approx(std::exp(-12.0)).epsilon(1e-15));
  CHECK(gricean_redundancy_bound(1.0 / 3.0, 30) ==
        doctest::Approx(std::exp(-10.0)).epsilon(1e-12));
  CHECK(std::abs(gricean_redundancy_bound(1.0 / 3.0, 30) - 4.54e-5) < 1e-7);
  CHECK(gricean_redundancy_bound(0.0, 1000) == 1.0);
  CHECK_THROWS_AS((void)gricean_redundancy_bound(-1.0, 10), Error);
}

TEST_CASE("screened random models separate entailed pairs perfectly") {
  int screened_seen = 0;
  for (std::uint64_t seed = 3000; screened_seen < 6 && seed < 3100; ++seed) {
    WorldModel m = random_world_model(seed);
    const auto r = separation_report(m);
    if (!r.screened || r.n_entailed == 0 || r.n_non_entailed == 0) continue;
    ++screened_seen;
    CHECK(r.auc == 100.0);
    CHECK(r.flipped_auc == 0.0);
    CHECK(r.violations.empty());
    CHECK(r.max_entailed_abs_score < 1e-9);
    CHECK(r.min_non_entailed_abs_score > 1e-6);
  }
  CHECK(screened_seen == 6);
}

TEST_CASE("unscreened fixture reports its near-contradiction false positives") {
  // The tautology-plus-singletons model scores every (tautology, singleton)
  // pair at exactly zero while the pair is non-entailed with consistency
  // ratio 1/21 -- the documented false-positive mode.
  WorldModel m = redundancy_fixture(21);
  const auto r = separation_report(m);
  CHECK_FALSE(r.screened);
  CHECK(!r.violations.empty());
  for (const auto& v : r.violations) {
    CHECK(v.near_contradiction);
    CHECK(v.consistency_ratio < 0.05);
    CHECK(std::abs(v.score) <= 1e-9);
  }
  CHECK(r.auc < 100.0);
}

TEST_CASE("verification reports serialize to JSON") {
  WorldModel m = random_world_model(672);
  const auto r1 = verify_prop1(m, 1e-9);
  CHECK(prop_report_to_json(r1).find("max_abs_deviation") != std::string::npos);
  const Prop2Fixture fx = prop2_fixture();
  const auto r2 = verify_prop2(fx.model, fx.x, fx.y, {0.2}, 4, 0.2, 1e-9);
  CHECK(prop2_report_to_json(r2).find("curves") != std::string::npos);
  const auto r3 = separation_report(m);
  CHECK(separation_report_to_json(r3, m).find("near_contradictions") != std::string::npos);
}
