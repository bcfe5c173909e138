#include "pel/datasets.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "pel/rng.hpp"

namespace pel {

using ordered_json = nlohmann::ordered_json;

const char* label_name(Label l) {
  return l == Label::entailment ? "entailment" : "non_entailment";
}

Label label_from_name(const std::string& name) {
  if (name == "entailment") return Label::entailment;
  if (name == "non_entailment") return Label::non_entailment;
  fail(ErrorCode::parse, "unknown label: " + name);
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open wordlist: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_pairs(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& line : read_lines(path)) {
    auto bar = line.find('|');
    if (bar == std::string::npos)
      fail(ErrorCode::parse, "expected 'a|b' line in " + path + ": " + line);
    out.emplace_back(line.substr(0, bar), line.substr(bar + 1));
  }
  return out;
}

ordered_json meta_to_json(const std::map<std::string, MetaValue>& meta) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : meta) {
    std::visit([&](const auto& value) { j[k] = value; }, v);
  }
  return j;
}

std::map<std::string, MetaValue> meta_from_json(const ordered_json& j) {
  std::map<std::string, MetaValue> meta;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    if (v.is_string())
      meta[it.key()] = v.get<std::string>();
    else if (v.is_boolean())
      meta[it.key()] = v.get<bool>();
    else if (v.is_number_integer())
      meta[it.key()] = v.get<long long>();
    else if (v.is_number_float())
      meta[it.key()] = v.get<double>();
    else
      meta[it.key()] = v.dump();
  }
  return meta;
}

}  // namespace

Wordlists Wordlists::load(const std::string& dir) {
  Wordlists w;
  w.names_a = read_lines(dir + "/names_a.txt");
  w.names_b = read_lines(dir + "/names_b.txt");
  w.plural_nouns = read_lines(dir + "/plural_nouns.txt");
  w.predicates = read_lines(dir + "/predicates.txt");
  w.number_predicates = read_lines(dir + "/number_predicates.txt");
  w.passive_names = read_lines(dir + "/passive_names.txt");
  w.passive_verbs = read_pairs(dir + "/passive_verbs.txt");
  w.dative_names = read_lines(dir + "/dative_names.txt");
  w.dative_verbs = read_lines(dir + "/dative_verbs.txt");
  w.dative_objects = read_lines(dir + "/dative_objects.txt");
  w.distractor_entities = read_lines(dir + "/distractor_entities.txt");
  w.city_country = read_pairs(dir + "/city_country.txt");
  return w;
}

std::vector<std::string> targeted_phenomena() {
  return {"connectives", "quantifiers", "numbers", "passives", "datives"};
}

namespace {

EntailmentInstance make_instance(std::string premise, std::string hypothesis, Label label,
                                 std::string phenomenon,
                                 std::map<std::string, MetaValue> meta) {
  EntailmentInstance inst;
  inst.premise = std::move(premise);
  inst.hypothesis = std::move(hypothesis);
  inst.label = label;
  inst.phenomenon = std::move(phenomenon);
  inst.meta = std::move(meta);
  return inst;
}

void gen_connectives(const Wordlists& w, std::vector<EntailmentInstance>& out) {
  if (w.names_a.empty() || w.names_b.empty())
    fail(ErrorCode::invalid_argument, "connectives template needs names_a and names_b");
  for (const auto& a : w.names_a) {
    for (const auto& b : w.names_b) {
      const std::string premise = "I saw " + a + ".";
      out.push_back(make_instance(premise, "I saw " + a + " or " + b + ".", Label::entailment,
                                  "connectives", {{"a", a}, {"b", b}, {"kind", std::string("or")}}));
      out.push_back(make_instance(premise, "I saw " + a + " and " + b + ".",
                                  Label::non_entailment, "connectives",
                                  {{"a", a}, {"b", b}, {"kind", std::string("and")}}));
    }
  }
}

void gen_quantifiers(const Wordlists& w, std::vector<EntailmentInstance>& out) {
  if (w.plural_nouns.empty() || w.predicates.empty())
    fail(ErrorCode::invalid_argument, "quantifiers template needs plural_nouns and predicates");
  for (const auto& n : w.plural_nouns) {
    for (const auto& v : w.predicates) {
      const std::string premise = "All of the " + n + " " + v + ".";
      out.push_back(make_instance(premise, "Some of the " + n + " " + v + ".", Label::entailment,
                                  "quantifiers",
                                  {{"noun", n}, {"pred", v}, {"kind", std::string("some")}}));
      out.push_back(make_instance(premise, "None of the " + n + " " + v + ".",
                                  Label::non_entailment, "quantifiers",
                                  {{"noun", n}, {"pred", v}, {"kind", std::string("none")}}));
    }
  }
}

void gen_numbers(const Wordlists& w, std::vector<EntailmentInstance>& out) {
  if (w.plural_nouns.empty() || w.number_predicates.empty())
    fail(ErrorCode::invalid_argument, "numbers template needs plural_nouns and number_predicates");
  for (const auto& n : w.plural_nouns) {
    for (const auto& v : w.number_predicates) {
      const std::string premise = "At least two of the " + n + " " + v + ".";
      out.push_back(make_instance(premise, "At least one of the " + n + " " + v + ".",
                                  Label::entailment, "numbers",
                                  {{"noun", n}, {"pred", v}, {"kind", std::string("one")}}));
      out.push_back(make_instance(premise, "At least three of the " + n + " " + v + ".",
                                  Label::non_entailment, "numbers",
                                  {{"noun", n}, {"pred", v}, {"kind", std::string("three")}}));
    }
  }
}

void gen_passives(const Wordlists& w, std::vector<EntailmentInstance>& out) {
  if (w.passive_names.size() < 2 || w.passive_verbs.empty())
    fail(ErrorCode::invalid_argument, "passives template needs two names and verbs");
  for (const auto& a : w.passive_names) {
    for (const auto& b : w.passive_names) {
      if (a == b) continue;
      for (const auto& [past, participle] : w.passive_verbs) {
        const std::string premise = a + " " + past + " " + b + ".";
        out.push_back(make_instance(premise, b + " was " + participle + ".", Label::entailment,
                                    "passives",
                                    {{"subject", a}, {"object", b}, {"verb", past},
                                     {"kind", std::string("object")}}));
        out.push_back(make_instance(premise, a + " was " + participle + ".",
                                    Label::non_entailment, "passives",
                                    {{"subject", a}, {"object", b}, {"verb", past},
                                     {"kind", std::string("subject")}}));
      }
    }
  }
}

void gen_datives(const Wordlists& w, std::vector<EntailmentInstance>& out) {
  if (w.dative_names.size() < 2 || w.dative_verbs.empty() || w.dative_objects.empty())
    fail(ErrorCode::invalid_argument, "datives template needs two names, verbs and objects");
  for (const auto& a : w.dative_names) {
    for (const auto& b : w.dative_names) {
      if (a == b) continue;
      for (const auto& v : w.dative_verbs) {
        for (const auto& obj : w.dative_objects) {
          const std::string premise = a + " " + v + " " + b + " " + obj + ".";
          out.push_back(make_instance(premise, a + " " + v + " " + obj + ".", Label::entailment,
                                      "datives",
                                      {{"subject", a}, {"recipient", b}, {"verb", v},
                                       {"object", obj}, {"kind", std::string("object")}}));
          out.push_back(make_instance(premise, a + " " + v + " " + b + ".",
                                      Label::non_entailment, "datives",
                                      {{"subject", a}, {"recipient", b}, {"verb", v},
                                       {"object", obj}, {"kind", std::string("person")}}));
        }
      }
    }
  }
}

}  // namespace

std::vector<EntailmentInstance> gen_targeted(const std::string& phenomenon,
                                             const Wordlists& lists, std::uint64_t seed,
                                             std::optional<int> count) {
  (void)seed;  // the enumeration is deterministic; the seed is part of run provenance
  std::vector<EntailmentInstance> out;
  if (phenomenon == "connectives")
    gen_connectives(lists, out);
  else if (phenomenon == "quantifiers")
    gen_quantifiers(lists, out);
  else if (phenomenon == "numbers")
    gen_numbers(lists, out);
  else if (phenomenon == "passives")
    gen_passives(lists, out);
  else if (phenomenon == "datives")
    gen_datives(lists, out);
  else
    fail(ErrorCode::invalid_argument, "unknown phenomenon: " + phenomenon);
  if (count) {
    if (*count > static_cast<int>(out.size()))
      fail(ErrorCode::invalid_argument,
           "wordlists too small for requested count: have " + std::to_string(out.size()) +
               ", requested " + std::to_string(*count));
    out.resize(static_cast<std::size_t>(*count));
  }
  return out;
}

std::vector<EntailmentInstance> gen_distractors(const std::vector<DistractorBase>& bases,
                                                int max_distractors, std::uint64_t seed) {
  if (max_distractors < 0) fail(ErrorCode::invalid_argument, "max_distractors must be >= 0");
  std::vector<EntailmentInstance> out;
  for (std::size_t bi = 0; bi < bases.size(); ++bi) {
    const DistractorBase& base = bases[bi];
    if (static_cast<int>(base.distractor_pool.size()) < max_distractors)
      fail(ErrorCode::invalid_argument, "distractor pool too small for requested k");
    // One seeded order per base, shared across k, so the k+1 premise extends
    // the k premise by exactly one new fact.
    std::vector<std::string> pool = base.distractor_pool;
    Rng rng = Rng::for_item(seed, bi);
    for (std::size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[rng.next_below(i)]);
    for (int k = 0; k <= max_distractors; ++k) {
      std::string premise = base.target_fact;
      for (int j = 0; j < k; ++j) premise += " " + pool[static_cast<std::size_t>(j)];
      out.push_back(make_instance(premise, base.hypothesis, Label::entailment, "distractors",
                                  {{"distractor_count", static_cast<long long>(k)},
                                   {"target_fact", base.target_fact},
                                   {"base_index", static_cast<long long>(bi)}}));
    }
  }
  return out;
}

std::vector<DistractorBase> default_distractor_bases(const Wordlists& lists) {
  if (lists.distractor_entities.size() < 2 || lists.city_country.size() < 2)
    fail(ErrorCode::invalid_argument, "distractor bases need entities and city|country pairs");
  std::vector<DistractorBase> out;
  const auto& ents = lists.distractor_entities;
  const auto& cc = lists.city_country;
  for (std::size_t i = 0; i < ents.size(); ++i) {
    DistractorBase base;
    const auto& [city, country] = cc[i % cc.size()];
    base.target_fact = ents[i] + " lives in " + city + ".";
    base.hypothesis = ents[i] + " lives in " + country + ".";
    for (std::size_t j = 0; j < ents.size(); ++j) {
      if (j == i) continue;
      const auto& other = cc[(i + j) % cc.size()];
      if (other.first == city) continue;
      base.distractor_pool.push_back(ents[j] + " lives in " + other.first + ".");
    }
    out.push_back(std::move(base));
  }
  return out;
}

std::vector<EntailmentInstance> ingest_nli(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + path);
  std::vector<EntailmentInstance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    EntailmentInstance inst;
    if (!j.contains("premise") || !j.contains("hypothesis") || !j.contains("label"))
      fail(ErrorCode::parse,
           "line " + std::to_string(line_no) + ": expected premise/hypothesis/label");
    inst.premise = j["premise"].get<std::string>();
    inst.hypothesis = j["hypothesis"].get<std::string>();
    const std::string raw = j["label"].get<std::string>();
    if (raw == "entailment") {
      inst.label = Label::entailment;
    } else if (raw == "neutral" || raw == "contradiction" || raw == "non_entailment") {
      inst.label = Label::non_entailment;
    } else {
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": unknown label: " + raw);
    }
    if (inst.premise.empty() || inst.hypothesis.empty())
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": empty premise or hypothesis");
    inst.phenomenon = "external";
    inst.meta["source_label"] = raw;
    for (const char* key : {"id", "uid", "pairID"})
      if (j.contains(key))
        inst.meta["source_id"] = j[key].is_string() ? j[key].get<std::string>() : j[key].dump();
    out.push_back(std::move(inst));
  }
  return out;
}

std::string instance_to_json_line(const EntailmentInstance& inst) {
  ordered_json j;
  j["premise"] = inst.premise;
  j["hypothesis"] = inst.hypothesis;
  j["label"] = label_name(inst.label);
  j["phenomenon"] = inst.phenomenon;
  j["meta"] = meta_to_json(inst.meta);
  return j.dump();
}

void save_instances(const std::vector<EntailmentInstance>& instances, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  for (const auto& inst : instances) f << instance_to_json_line(inst) << "\n";
}

std::vector<EntailmentInstance> load_instances(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + path);
  std::vector<EntailmentInstance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    EntailmentInstance inst;
    inst.premise = j.at("premise").get<std::string>();
    inst.hypothesis = j.at("hypothesis").get<std::string>();
    inst.label = label_from_name(j.at("label").get<std::string>());
    inst.phenomenon = j.value("phenomenon", std::string());
    if (j.contains("meta")) inst.meta = meta_from_json(j["meta"]);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace pel
