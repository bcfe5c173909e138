#pragma once

#include <cstdint>
#include <vector>

#include "pel/datasets.hpp"
#include "pel/speakers.hpp"
#include "pel/worlds.hpp"

namespace pel {

struct RandomModelOptions {
  int min_props = 2;
  int max_props = 4;
  int min_sentences = 4;
  int max_sentences = 16;
  double cost_lo = 0.0;
  double cost_hi = 3.0;
  bool uniform_prior = false;
};

/// Seeded random propositional world model: random positive prior, random
/// non-empty denotations, uniform-random costs. Deterministic per seed.
WorldModel random_world_model(std::uint64_t seed, const RandomModelOptions& opts = {});

/// Seeded random contextual cost table over the model's lexicon; the
/// end-of-text cost stays the model's constant.
ContextualCosts random_contextual_costs(const WorldModel& model, std::uint64_t seed,
                                        double lo = 0.0, double hi = 3.0);

struct Prop2Fixture {
  WorldModel model;
  SentenceId x = -1;  // premise; entails y and is strictly more specific
  SentenceId y = -1;  // informative hypothesis
};

/// Two-proposition model with an entailed, informative pair for the
/// repetition-test convergence checks.
Prop2Fixture prop2_fixture();

/// Uniform model with `n_worlds` worlds, one zero-information sentence true
/// everywhere, and one world-pinning alternative per world, all at equal
/// cost. The entailed-continuation mass from the empty context is exactly
/// 1 / (n_worlds + 1 + exp(cost - eot_cost)).
WorldModel redundancy_fixture(int n_worlds, double cost = 1.0, double eot_cost = 1.0);

/// Every ordered lexicon pair as a premise/hypothesis instance labeled by
/// the entailment oracle. Pairs whose premise or hypothesis is impossible
/// are skipped.
std::vector<EntailmentInstance> lexicon_pair_instances(const WorldModel& model,
                                                       bool include_diagonal = true);

}  // namespace pel
