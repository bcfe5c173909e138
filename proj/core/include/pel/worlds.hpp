#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pel/errors.hpp"

namespace pel {

using WorldIndex = int;
using SentenceId = int;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// A lexicon entry: a surface form denoting a set of worlds, with an
/// utterance cost. An empty denotation is allowed only when the sentence is
/// explicitly marked contradictory; such sentences are never uttered but may
/// appear as hypotheses.
struct Sentence {
  std::string surface;
  std::vector<WorldIndex> denotation;  // sorted, unique
  double base_cost = 1.0;
  int length = 0;  // surface length in characters; 0 means "derive"
  bool contradictory = false;

  int surface_length() const {
    return length > 0 ? length : static_cast<int>(surface.size());
  }
};

/// An ordered sequence of lexicon sentences, optionally closed by the
/// end-of-text sentence. A terminated sequence admits no further extension.
struct SentenceSeq {
  std::vector<SentenceId> items;
  bool terminated = false;

  static SentenceSeq of(std::initializer_list<SentenceId> ids, bool term = false) {
    return SentenceSeq{std::vector<SentenceId>(ids), term};
  }
  static SentenceSeq repeated(SentenceId id, int n, bool term = false) {
    SentenceSeq s;
    s.items.assign(static_cast<std::size_t>(n), id);
    s.terminated = term;
    return s;
  }

  SentenceSeq extended(SentenceId next) const {
    if (terminated) fail(ErrorCode::invalid_argument, "cannot extend a terminated sequence");
    SentenceSeq out = *this;
    out.items.push_back(next);
    return out;
  }
  SentenceSeq closed() const {
    if (terminated) fail(ErrorCode::invalid_argument, "sequence already terminated");
    SentenceSeq out = *this;
    out.terminated = true;
    return out;
  }
  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

/// Finite possible-world model: propositions, worlds as truth assignments
/// (all of them or an explicit subset), a prior over worlds, and a lexicon.
struct WorldModel {
  std::vector<std::string> propositions;
  std::vector<std::vector<bool>> worlds;
  std::vector<double> prior;
  std::vector<Sentence> lexicon;
  double eot_cost = 1.0;

  int num_worlds() const { return static_cast<int>(worlds.size()); }
  int num_sentences() const { return static_cast<int>(lexicon.size()); }

  /// Worlds with strictly positive prior, sorted.
  std::vector<WorldIndex> support() const;
  double prior_mass(const std::vector<WorldIndex>& set) const;

  SentenceId find_sentence(const std::string& surface) const;  // -1 if absent
  SentenceId require_sentence(const std::string& surface) const;

  /// Throws Error(invalid_model) when any structural invariant fails.
  void validate() const;

  /// Model with one world per truth assignment over `props` and a uniform prior.
  static WorldModel propositional(std::vector<std::string> props);

  /// Worlds where `formula` holds. Formula grammar: atoms are proposition
  /// names; operators `!`, `&`, `|` and parentheses, with the usual
  /// precedence. Convenience for building lexicons and fixtures.
  std::vector<WorldIndex> worlds_where(const std::string& formula) const;

  void add_sentence(const std::string& surface, const std::string& formula, double cost);
  void add_sentence_denoting(const std::string& surface, std::vector<WorldIndex> denotation,
                             double cost);
};

/// JSON round-trip. Field order is fixed: propositions, worlds, prior,
/// lexicon (surface, denotation, cost), eot_cost.
std::string world_model_to_json(const WorldModel& model);
WorldModel world_model_from_json(const std::string& text);
void save_world_model(const WorldModel& model, const std::string& path);
WorldModel load_world_model(const std::string& path);

/// Intersection of the denotations of all sentences in `ctx` with the prior
/// support. An empty context denotes the full support.
std::vector<WorldIndex> consistent_worlds(const WorldModel& model, const SentenceSeq& ctx);

struct EntailsResult {
  bool entailed = false;
  bool vacuous = false;  // the premise has an empty consistent set
};

/// True iff every world consistent with `x` lies in the denotation of `y`.
EntailsResult entails_detail(const WorldModel& model, const SentenceSeq& x, SentenceId y);
bool entails(const WorldModel& model, const SentenceSeq& x, SentenceId y);

/// Listener information of uttering `y` after `ctx` for a speaker in world
/// `w`: -inf when `y` is untruthful at `w`, otherwise the log-ratio of
/// listener mass before and after restricting by `y`. Throws when `w` is not
/// consistent with `ctx`.
double info_content(const WorldModel& model, SentenceId y, const SentenceSeq& ctx, WorldIndex w);

/// Information of a whole sequence uttered from the empty context (chain of
/// per-step restrictions); -inf when the sequence is untruthful at `w`.
double sequence_info(const WorldModel& model, const SentenceSeq& z, WorldIndex w);

namespace detail {
std::vector<WorldIndex> intersect_sorted(const std::vector<WorldIndex>& a,
                                         const std::vector<WorldIndex>& b);
bool is_subset_sorted(const std::vector<WorldIndex>& a, const std::vector<WorldIndex>& b);
}  // namespace detail

}  // namespace pel
