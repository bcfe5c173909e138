#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pel/fixtures.hpp"
#include "pel/rng.hpp"
#include "pel/worlds.hpp"

using namespace pel;

namespace {

WorldModel two_prop_model() {
  WorldModel m = WorldModel::propositional({"p", "q"});
  m.add_sentence("p holds", "p", 1.0);
  m.add_sentence("if p then q", "!p | q", 1.0);
  m.add_sentence("both hold", "p & q", 1.0);
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("propositional model enumerates all assignments uniformly") {
  WorldModel m = WorldModel::propositional({"a", "b", "c"});
  CHECK(m.num_worlds() == 8);
  for (double p : m.prior) CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-15));
}

TEST_CASE("formula parser handles precedence, negation, parentheses") {
  WorldModel m = WorldModel::propositional({"p", "q"});
  CHECK(m.worlds_where("p").size() == 2);
  CHECK(m.worlds_where("p & q").size() == 1);
  CHECK(m.worlds_where("p | q").size() == 3);
  CHECK(m.worlds_where("!p").size() == 2);
  CHECK(m.worlds_where("!(p & q)").size() == 3);
  CHECK(m.worlds_where("!p | q").size() == 3);
  CHECK_THROWS_AS((void)m.worlds_where("p &"), Error);
  CHECK_THROWS_AS((void)m.worlds_where("unknown"), Error);
  CHECK_THROWS_AS((void)m.worlds_where("(p"), Error);
}

TEST_CASE("consistent_worlds: empty context denotes the full support") {
  WorldModel m = two_prop_model();
  CHECK(consistent_worlds(m, {}).size() == 4);
}

TEST_CASE("consistent_worlds: single sentence gives its denotation") {
  WorldModel m = two_prop_model();
  CHECK(consistent_worlds(m, SentenceSeq::of({0})) == m.lexicon[0].denotation);
}

TEST_CASE("consistent_worlds: p with (p -> q) pins the p&q world") {
  // Hand oracle over the four assignments: only the world with both p and q
  // satisfies p and (!p | q).
  WorldModel m = two_prop_model();
  const auto s = consistent_worlds(m, SentenceSeq::of({0, 1}));
  CHECK(s == m.worlds_where("p & q"));
  CHECK(s.size() == 1);
}

TEST_CASE("entails: reflexive, and all-crops entails some-crops") {
  WorldModel crops = WorldModel::propositional({"c1", "c2", "c3"});
  crops.add_sentence("all crops failed", "c1 & c2 & c3", 1.0);
  crops.add_sentence("some crops failed", "c1 | c2 | c3", 1.0);
  crops.add_sentence("no crops failed", "!c1 & !c2 & !c3", 1.0);
  crops.validate();
  CHECK(entails(crops, SentenceSeq::of({0}), 0));
  CHECK(entails(crops, SentenceSeq::of({0}), 1));
  CHECK_FALSE(entails(crops, SentenceSeq::of({1}), 0));
  CHECK_FALSE(entails(crops, SentenceSeq::of({0}), 2));
}

TEST_CASE("entails: empty consistent set is vacuous truth, flagged") {
  WorldModel m = two_prop_model();
  m.add_sentence_denoting("impossible", {}, 1.0);
  m.validate();
  const SentenceId imp = m.find_sentence("impossible");
  const auto r = entails_detail(m, SentenceSeq::of({imp}), 0);
  CHECK(r.entailed);
  CHECK(r.vacuous);
  CHECK_FALSE(entails_detail(m, SentenceSeq::of({0}), 1).vacuous);
}

TEST_CASE("entails agrees with a brute-force world enumeration oracle") {
  for (std::uint64_t seed = 50; seed < 62; ++seed) {
    RandomModelOptions opts;
    opts.max_props = 5;
    WorldModel m = random_world_model(seed, opts);
    for (SentenceId x = 0; x < m.num_sentences(); ++x) {
      for (SentenceId y = 0; y < m.num_sentences(); ++y) {
        bool oracle = true;
        const auto& dx = m.lexicon[static_cast<std::size_t>(x)].denotation;
        const auto& dy = m.lexicon[static_cast<std::size_t>(y)].denotation;
        for (WorldIndex w = 0; w < m.num_worlds(); ++w) {
          if (m.prior[static_cast<std::size_t>(w)] <= 0.0) continue;
          const bool in_x = std::binary_search(dx.begin(), dx.end(), w);
          const bool in_y = std::binary_search(dy.begin(), dy.end(), w);
          if (in_x && !in_y) oracle = false;
        }
        CHECK(entails(m, SentenceSeq::of({x}), y) == oracle);
      }
    }
  }
}

TEST_CASE("info_content: entailed continuation carries zero information") {
  WorldModel m = two_prop_model();
  const auto s = consistent_worlds(m, SentenceSeq::of({2}));
  REQUIRE(s.size() == 1);
  CHECK(info_content(m, 0, SentenceSeq::of({2}), s[0]) == 0.0);
}

TEST_CASE("info_content: four worlds narrowed to one gives log 4") {
  WorldModel m = two_prop_model();
  const auto s = m.worlds_where("p & q");
  CHECK(info_content(m, 2, {}, s[0]) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("info_content: untruthful sentence gets the -inf marker") {
  WorldModel m = two_prop_model();
  const auto s = m.worlds_where("!p & !q");
  CHECK(info_content(m, 0, {}, s[0]) == kNegInf);
}

TEST_CASE("info_content: error when the context is false in the world") {
  WorldModel m = two_prop_model();
  const auto s = m.worlds_where("!p & !q");
  CHECK_THROWS_AS((void)info_content(m, 1, SentenceSeq::of({0}), s[0]), Error);
}

TEST_CASE("info_content additivity and monotonicity over random models") {
  for (std::uint64_t seed = 80; seed < 100; ++seed) {
    WorldModel m = random_world_model(seed);
    Rng rng(seed * 7 + 1);
    for (int trial = 0; trial < 40; ++trial) {
      const auto a = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
      const auto b = static_cast<SentenceId>(rng.next_below(m.num_sentences()));
      const auto s_ab = consistent_worlds(m, SentenceSeq::of({a, b}));
      if (s_ab.empty()) continue;
      const WorldIndex w = s_ab[rng.next_below(s_ab.size())];
      const double i_a = info_content(m, a, {}, w);
      const double i_b_after = info_content(m, b, SentenceSeq::of({a}), w);
      const double i_ab = sequence_info(m, SentenceSeq::of({a, b}), w);
      CHECK(std::abs(i_ab - (i_a + i_b_after)) < 1e-12);
      CHECK(i_b_after >= 0.0);
      CHECK((i_b_after == 0.0) == entails(m, SentenceSeq::of({a}), b));
    }
  }
}

TEST_CASE("terminated sequences admit no extension") {
  SentenceSeq z = SentenceSeq::of({0}, true);
  CHECK_THROWS_AS((void)z.extended(1), Error);
  CHECK_THROWS_AS((void)z.closed(), Error);
}

TEST_CASE("world model JSON round-trips with fixed field order") {
  WorldModel m = two_prop_model();
  m.prior = {0.4, 0.3, 0.2, 0.1};
  m.validate();
  const std::string js = world_model_to_json(m);
  CHECK(js.find("\"propositions\"") < js.find("\"worlds\""));
  CHECK(js.find("\"worlds\"") < js.find("\"prior\""));
  CHECK(js.find("\"prior\"") < js.find("\"lexicon\""));
  CHECK(js.find("\"lexicon\"") < js.find("\"eot_cost\""));
  WorldModel back = world_model_from_json(js);
  CHECK(back.num_worlds() == m.num_worlds());
  CHECK(back.prior == m.prior);
  REQUIRE(back.lexicon.size() == m.lexicon.size());
  for (std::size_t i = 0; i < m.lexicon.size(); ++i) {
    CHECK(back.lexicon[i].surface == m.lexicon[i].surface);
    CHECK(back.lexicon[i].denotation == m.lexicon[i].denotation);
    CHECK(back.lexicon[i].base_cost == m.lexicon[i].base_cost);
  }
  CHECK(back.eot_cost == m.eot_cost);
}

TEST_CASE("model validation rejects structural defects") {
  WorldModel m = two_prop_model();
  SUBCASE("prior must sum to one") {
    m.prior[0] += 1e-6;
    CHECK_THROWS_AS(m.validate(), Error);
  }
  SUBCASE("duplicate surfaces are rejected") {
    m.add_sentence("p holds", "q", 1.0);
    CHECK_THROWS_AS(m.validate(), Error);
  }
  SUBCASE("the end-of-text surface is reserved") {
    m.add_sentence("$", "p", 1.0);
    CHECK_THROWS_AS(m.validate(), Error);
  }
  SUBCASE("empty denotation needs the contradictory flag") {
    Sentence s;
    s.surface = "never";
    s.base_cost = 1.0;
    m.lexicon.push_back(s);
    CHECK_THROWS_AS(m.validate(), Error);
    m.lexicon.back().contradictory = true;
    CHECK_NOTHROW(m.validate());
  }
  SUBCASE("negative costs are rejected") {
    m.lexicon[0].base_cost = -0.5;
    CHECK_THROWS_AS(m.validate(), Error);
  }
  SUBCASE("denotation indices must be in range") {
    m.lexicon[0].denotation.push_back(99);
    CHECK_THROWS_AS(m.validate(), Error);
  }
}
