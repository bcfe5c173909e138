#pragma once

// Independent enumeration oracle for the exact speaker. Deliberately
// re-derives everything from the model definition with straight loops and no
// calls into the library's speaker engine, so tests can cross-check the two
// routes.

#include <cmath>
#include <limits>
#include <vector>

#include "pel/speakers.hpp"
#include "pel/worlds.hpp"

namespace oracle {

inline bool world_in(const pel::WorldModel& m, int sentence, int w) {
  const auto& d = m.lexicon[static_cast<std::size_t>(sentence)].denotation;
  for (int v : d)
    if (v == w) return true;
  return false;
}

inline double set_mass(const pel::WorldModel& m, const std::vector<char>& member) {
  double s = 0.0;
  for (int w = 0; w < m.num_worlds(); ++w)
    if (member[static_cast<std::size_t>(w)]) s += m.prior[static_cast<std::size_t>(w)];
  return s;
}

inline std::vector<char> support_mask(const pel::WorldModel& m) {
  std::vector<char> out(static_cast<std::size_t>(m.num_worlds()), 0);
  for (int w = 0; w < m.num_worlds(); ++w)
    out[static_cast<std::size_t>(w)] = m.prior[static_cast<std::size_t>(w)] > 0.0;
  return out;
}

struct CostFn {
  const pel::WorldModel* model;
  const pel::ContextualCosts* table = nullptr;  // null: base costs

  double operator()(const std::vector<int>& ctx, int y) const {
    if (!table) return model->lexicon[static_cast<std::size_t>(y)].base_cost;
    if (ctx.empty()) return table->empty_ctx[static_cast<std::size_t>(y)];
    return table->after[static_cast<std::size_t>(ctx.back())][static_cast<std::size_t>(y)];
  }
};

// p(next | ctx, w) for a softmax (base or contextual cost) speaker;
// next = -1 means the end-of-text sentence.
inline double conditional(const pel::WorldModel& m, const CostFn& cost,
                          const std::vector<int>& ctx, int next, int w) {
  std::vector<char> member = support_mask(m);
  for (int id : ctx)
    for (int v = 0; v < m.num_worlds(); ++v)
      if (member[static_cast<std::size_t>(v)] && !world_in(m, id, v))
        member[static_cast<std::size_t>(v)] = 0;
  const double ctx_mass = set_mass(m, member);
  double z = std::exp(-m.eot_cost);
  double target = next < 0 ? std::exp(-m.eot_cost) : 0.0;
  for (int y = 0; y < m.num_sentences(); ++y) {
    if (!world_in(m, y, w)) continue;
    std::vector<char> joint = member;
    for (int v = 0; v < m.num_worlds(); ++v)
      if (joint[static_cast<std::size_t>(v)] && !world_in(m, y, v))
        joint[static_cast<std::size_t>(v)] = 0;
    const double jm = set_mass(m, joint);
    if (jm <= 0.0) continue;
    const double info = std::log(ctx_mass) - std::log(jm);
    const double weight = std::exp(info - cost(ctx, y));
    z += weight;
    if (y == next) target = weight;
  }
  return target / z;
}

// Probability of a sequence (terminated or not) by full enumeration over
// worlds and positions.
inline double seq_prob(const pel::WorldModel& m, const CostFn& cost, const std::vector<int>& z,
                       bool terminated) {
  double total = 0.0;
  for (int w = 0; w < m.num_worlds(); ++w) {
    if (m.prior[static_cast<std::size_t>(w)] <= 0.0) continue;
    double p = m.prior[static_cast<std::size_t>(w)];
    std::vector<int> ctx;
    bool dead = false;
    for (int id : z) {
      if (!world_in(m, id, w)) {
        dead = true;
        break;
      }
      p *= conditional(m, cost, ctx, id, w);
      ctx.push_back(id);
    }
    if (dead) continue;
    if (terminated) p *= conditional(m, cost, ctx, -1, w);
    total += p;
  }
  return total;
}

// Noise-tolerant expected information by naive enumeration over all 2^n
// comprehension patterns (no grouping by distinct sentences).
inline double expected_info(const pel::WorldModel& m, const std::vector<double>& eps,
                            const std::vector<int>& z, int w) {
  const std::size_t n = z.size();
  const auto support = support_mask(m);
  const double full = set_mass(m, support);
  double acc = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double p = 1.0;
    std::vector<char> member = support;
    for (std::size_t t = 0; t < n; ++t) {
      const double e = eps[static_cast<std::size_t>(z[t])];
      if (mask & (std::uint64_t{1} << t)) {
        p *= 1.0 - e;
        for (int v = 0; v < m.num_worlds(); ++v)
          if (member[static_cast<std::size_t>(v)] && !world_in(m, z[t], v))
            member[static_cast<std::size_t>(v)] = 0;
      } else {
        p *= e;
      }
    }
    (void)w;
    acc += p * (std::log(full) - std::log(set_mass(m, member)));
  }
  return acc;
}

// ROC-AUC (0..100) by O(n^2) pair counting with half-credit on ties.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double correct = 0.0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        correct += 1.0;
      else if (scores[i] == scores[j])
        correct += 0.5;
    }
  }
  return 100.0 * correct / static_cast<double>(pairs);
}

}  // namespace oracle
