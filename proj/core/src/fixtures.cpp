#include "pel/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "pel/rng.hpp"

namespace pel {

WorldModel random_world_model(std::uint64_t seed, const RandomModelOptions& opts) {
  Rng rng(seed);
  const int n_props =
      opts.min_props + static_cast<int>(rng.next_below(
                           static_cast<std::uint64_t>(opts.max_props - opts.min_props + 1)));
  std::vector<std::string> props;
  for (int i = 0; i < n_props; ++i) props.push_back("p" + std::to_string(i));
  WorldModel m = WorldModel::propositional(props);

  if (!opts.uniform_prior) {
    double total = 0.0;
    for (double& p : m.prior) {
      p = -std::log(1.0 - rng.next_double());  // exponential draw
      total += p;
    }
    for (double& p : m.prior) p /= total;
    // Absorb the normalization residual so the sum is exactly 1.
    double sum = 0.0;
    for (double p : m.prior) sum += p;
    m.prior[0] += 1.0 - sum;
  }

  const int n_sent =
      opts.min_sentences +
      static_cast<int>(rng.next_below(
          static_cast<std::uint64_t>(opts.max_sentences - opts.min_sentences + 1)));
  const int n_worlds = m.num_worlds();
  for (int s = 0; s < n_sent; ++s) {
    std::vector<WorldIndex> denot;
    while (denot.empty()) {
      denot.clear();
      for (int w = 0; w < n_worlds; ++w)
        if (rng.next_double() < 0.5) denot.push_back(w);
    }
    m.add_sentence_denoting("s" + std::to_string(s), std::move(denot),
                            rng.uniform(opts.cost_lo, opts.cost_hi));
  }
  m.eot_cost = rng.uniform(opts.cost_lo, opts.cost_hi);
  m.validate();
  return m;
}

ContextualCosts random_contextual_costs(const WorldModel& model, std::uint64_t seed, double lo,
                                        double hi) {
  Rng rng(seed);
  ContextualCosts c;
  const std::size_t n = model.lexicon.size();
  c.empty_ctx.resize(n);
  for (auto& v : c.empty_ctx) v = rng.uniform(lo, hi);
  c.after.assign(n, std::vector<double>(n));
  for (auto& row : c.after)
    for (auto& v : row) v = rng.uniform(lo, hi);
  return c;
}

Prop2Fixture prop2_fixture() {
  Prop2Fixture f;
  f.model = WorldModel::propositional({"p", "q"});
  f.model.add_sentence("both hold", "p & q", 1.0);
  f.model.add_sentence("first holds", "p", 1.0);
  f.model.add_sentence("second holds", "q", 1.0);
  f.model.eot_cost = 1.0;
  f.model.validate();
  f.x = 0;
  f.y = 1;
  return f;
}

WorldModel redundancy_fixture(int n_worlds, double cost, double eot_cost) {
  if (n_worlds < 1) fail(ErrorCode::invalid_argument, "n_worlds must be >= 1");
  int bits = 1;
  while ((1 << bits) < n_worlds) ++bits;
  WorldModel m;
  for (int b = 0; b < bits; ++b) m.propositions.push_back("b" + std::to_string(b));
  for (int w = 0; w < n_worlds; ++w) {
    std::vector<bool> row(static_cast<std::size_t>(bits));
    for (int b = 0; b < bits; ++b) row[static_cast<std::size_t>(b)] = (w >> b) & 1;
    m.worlds.push_back(std::move(row));
  }
  m.prior.assign(static_cast<std::size_t>(n_worlds), 1.0 / n_worlds);
  double sum = 0.0;
  for (double p : m.prior) sum += p;
  m.prior[0] += 1.0 - sum;

  std::vector<WorldIndex> all(static_cast<std::size_t>(n_worlds));
  for (int w = 0; w < n_worlds; ++w) all[static_cast<std::size_t>(w)] = w;
  m.add_sentence_denoting("nothing new", std::move(all), cost);
  for (int w = 0; w < n_worlds; ++w)
    m.add_sentence_denoting("state " + std::to_string(w), {w}, cost);
  m.eot_cost = eot_cost;
  m.validate();
  return m;
}

std::vector<EntailmentInstance> lexicon_pair_instances(const WorldModel& model,
                                                       bool include_diagonal) {
  std::vector<EntailmentInstance> out;
  for (SentenceId x = 0; x < model.num_sentences(); ++x) {
    SentenceSeq seq_x;
    seq_x.items.push_back(x);
    const auto s_x = consistent_worlds(model, seq_x);
    if (s_x.empty()) continue;
    const double mass_x = model.prior_mass(s_x);
    for (SentenceId y = 0; y < model.num_sentences(); ++y) {
      if (!include_diagonal && x == y) continue;
      const auto& sy = model.lexicon[static_cast<std::size_t>(y)];
      SentenceSeq seq_y;
      seq_y.items.push_back(y);
      if (consistent_worlds(model, seq_y).empty()) continue;
      EntailmentInstance inst;
      inst.premise = model.lexicon[static_cast<std::size_t>(x)].surface;
      inst.hypothesis = sy.surface;
      inst.label = detail::is_subset_sorted(s_x, sy.denotation) ? Label::entailment
                                                                : Label::non_entailment;
      inst.phenomenon = "world_model_pairs";
      inst.meta["x_id"] = static_cast<long long>(x);
      inst.meta["y_id"] = static_cast<long long>(y);
      inst.meta["consistency_ratio"] =
          model.prior_mass(detail::intersect_sorted(s_x, sy.denotation)) / mass_x;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

}  // namespace pel
