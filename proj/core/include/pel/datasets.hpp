#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pel/errors.hpp"

namespace pel {

enum class Label { entailment, non_entailment };

const char* label_name(Label l);
Label label_from_name(const std::string& name);

using MetaValue = std::variant<bool, long long, double, std::string>;

struct EntailmentInstance {
  std::string premise;
  std::string hypothesis;
  Label label = Label::non_entailment;
  std::string phenomenon;  // connectives|quantifiers|numbers|passives|datives|distractors|external
  std::map<std::string, MetaValue> meta;
};

/// Editable plain-text wordlists driving the targeted templates. One entry
/// per line; verb files carry inflections separated by '|'.
struct Wordlists {
  std::vector<std::string> names_a;
  std::vector<std::string> names_b;
  std::vector<std::string> plural_nouns;
  std::vector<std::string> predicates;
  std::vector<std::string> number_predicates;
  std::vector<std::string> passive_names;
  std::vector<std::pair<std::string, std::string>> passive_verbs;  // past | participle
  std::vector<std::string> dative_names;
  std::vector<std::string> dative_verbs;
  std::vector<std::string> dative_objects;
  std::vector<std::string> distractor_entities;
  std::vector<std::pair<std::string, std::string>> city_country;  // city | country

  static Wordlists load(const std::string& dir);
};

/// Template generation for one phenomenon. Enumeration order is fixed by the
/// wordlists; each premise yields one entailed and one non-entailed
/// hypothesis. `count`, when given, truncates the enumeration and errors if
/// the lists cannot supply it.
std::vector<EntailmentInstance> gen_targeted(const std::string& phenomenon,
                                             const Wordlists& lists, std::uint64_t seed,
                                             std::optional<int> count = std::nullopt);

std::vector<std::string> targeted_phenomena();

struct DistractorBase {
  std::string target_fact;
  std::string hypothesis;
  std::vector<std::string> distractor_pool;
};

/// Entailed pairs whose premise carries k = 0..max_distractors unrelated
/// facts; the distractor order per base is seeded and shared across k.
std::vector<EntailmentInstance> gen_distractors(const std::vector<DistractorBase>& bases,
                                                int max_distractors, std::uint64_t seed);

std::vector<DistractorBase> default_distractor_bases(const Wordlists& lists);

/// SNLI-style JSONL ingestion: three-way labels collapse to binary
/// (entailment vs everything else). Malformed lines and unknown labels error
/// with their line number.
std::vector<EntailmentInstance> ingest_nli(const std::string& path);

void save_instances(const std::vector<EntailmentInstance>& instances, const std::string& path);
std::vector<EntailmentInstance> load_instances(const std::string& path);

std::string instance_to_json_line(const EntailmentInstance& inst);

}  // namespace pel
