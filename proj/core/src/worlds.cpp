#include "pel/worlds.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pel {

using ordered_json = nlohmann::ordered_json;

namespace detail {

std::vector<WorldIndex> intersect_sorted(const std::vector<WorldIndex>& a,
                                         const std::vector<WorldIndex>& b) {
  std::vector<WorldIndex> out;
  out.reserve(std::min(a.size(), b.size()));
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset_sorted(const std::vector<WorldIndex>& a, const std::vector<WorldIndex>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace detail

std::vector<WorldIndex> WorldModel::support() const {
  std::vector<WorldIndex> out;
  for (int w = 0; w < num_worlds(); ++w)
    if (prior[static_cast<std::size_t>(w)] > 0.0) out.push_back(w);
  return out;
}

double WorldModel::prior_mass(const std::vector<WorldIndex>& set) const {
  double m = 0.0;
  for (WorldIndex w : set) m += prior[static_cast<std::size_t>(w)];
  return m;
}

SentenceId WorldModel::find_sentence(const std::string& surface) const {
  for (int i = 0; i < num_sentences(); ++i)
    if (lexicon[static_cast<std::size_t>(i)].surface == surface) return i;
  return -1;
}

SentenceId WorldModel::require_sentence(const std::string& surface) const {
  SentenceId id = find_sentence(surface);
  if (id < 0) fail(ErrorCode::unknown_sentence, "sentence not in lexicon: " + surface);
  return id;
}

void WorldModel::validate() const {
  if (worlds.empty()) fail(ErrorCode::invalid_model, "model has no worlds");
  if (prior.size() != worlds.size())
    fail(ErrorCode::invalid_model, "prior size does not match world count");
  double total = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0) || !std::isfinite(p))
      fail(ErrorCode::invalid_model, "prior entries must be nonnegative and finite");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    fail(ErrorCode::invalid_model, "prior must sum to 1 within 1e-12");
  for (const auto& w : worlds)
    if (w.size() != propositions.size())
      fail(ErrorCode::invalid_model, "world assignment width does not match propositions");
  if (lexicon.empty()) fail(ErrorCode::invalid_model, "lexicon must be non-empty");
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    const Sentence& s = lexicon[i];
    if (s.surface.empty() || s.surface == "$")
      fail(ErrorCode::invalid_model, "lexicon surfaces must be non-empty and distinct from $");
    if (!std::isfinite(s.base_cost) || s.base_cost < 0.0)
      fail(ErrorCode::invalid_model, "sentence cost must be finite and nonnegative: " + s.surface);
    if (s.denotation.empty() && !s.contradictory)
      fail(ErrorCode::invalid_model,
           "empty denotation requires the contradictory flag: " + s.surface);
    if (!std::is_sorted(s.denotation.begin(), s.denotation.end()) ||
        std::adjacent_find(s.denotation.begin(), s.denotation.end()) != s.denotation.end())
      fail(ErrorCode::invalid_model, "denotation must be sorted and unique: " + s.surface);
    for (WorldIndex w : s.denotation)
      if (w < 0 || w >= num_worlds())
        fail(ErrorCode::invalid_model, "denotation index out of range: " + s.surface);
    for (std::size_t j = i + 1; j < lexicon.size(); ++j)
      if (lexicon[j].surface == s.surface)
        fail(ErrorCode::invalid_model, "duplicate surface form: " + s.surface);
  }
  if (!std::isfinite(eot_cost) || eot_cost < 0.0)
    fail(ErrorCode::invalid_model, "eot_cost must be finite and nonnegative");
}

WorldModel WorldModel::propositional(std::vector<std::string> props) {
  if (props.size() > 30) fail(ErrorCode::invalid_argument, "too many propositions");
  WorldModel m;
  m.propositions = std::move(props);
  const std::size_t k = m.propositions.size();
  const std::size_t n = std::size_t{1} << k;
  m.worlds.reserve(n);
  for (std::size_t mask = 0; mask < n; ++mask) {
    std::vector<bool> row(k);
    for (std::size_t b = 0; b < k; ++b) row[b] = (mask >> b) & 1u;
    m.worlds.push_back(std::move(row));
  }
  m.prior.assign(n, 1.0 / static_cast<double>(n));
  return m;
}

namespace {

// Minimal recursive-descent parser for !, &, | with parentheses.
struct FormulaParser {
  const WorldModel& model;
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  std::vector<bool> parse_or() {
    auto lhs = parse_and();
    while (eat('|')) {
      auto rhs = parse_and();
      for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] = lhs[i] || rhs[i];
    }
    return lhs;
  }
  std::vector<bool> parse_and() {
    auto lhs = parse_unary();
    while (eat('&')) {
      auto rhs = parse_unary();
      for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] = lhs[i] && rhs[i];
    }
    return lhs;
  }
  std::vector<bool> parse_unary() {
    skip_ws();
    if (eat('!')) {
      auto v = parse_unary();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = !v[i];
      return v;
    }
    if (eat('(')) {
      auto v = parse_or();
      if (!eat(')')) fail(ErrorCode::parse, "expected ')' in formula: " + text);
      return v;
    }
    return parse_atom();
  }
  std::vector<bool> parse_atom() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (start == pos) fail(ErrorCode::parse, "expected atom in formula: " + text);
    std::string name = text.substr(start, pos - start);
    auto it = std::find(model.propositions.begin(), model.propositions.end(), name);
    if (it == model.propositions.end())
      fail(ErrorCode::parse, "unknown proposition in formula: " + name);
    std::size_t idx = static_cast<std::size_t>(it - model.propositions.begin());
    std::vector<bool> v(model.worlds.size());
    for (std::size_t w = 0; w < model.worlds.size(); ++w) v[w] = model.worlds[w][idx];
    return v;
  }
};

}  // namespace

std::vector<WorldIndex> WorldModel::worlds_where(const std::string& formula) const {
  FormulaParser p{*this, formula};
  auto v = p.parse_or();
  p.skip_ws();
  if (p.pos != formula.size()) fail(ErrorCode::parse, "trailing input in formula: " + formula);
  std::vector<WorldIndex> out;
  for (std::size_t w = 0; w < v.size(); ++w)
    if (v[w]) out.push_back(static_cast<WorldIndex>(w));
  return out;
}

void WorldModel::add_sentence(const std::string& surface, const std::string& formula,
                              double cost) {
  add_sentence_denoting(surface, worlds_where(formula), cost);
}

void WorldModel::add_sentence_denoting(const std::string& surface,
                                       std::vector<WorldIndex> denotation, double cost) {
  Sentence s;
  s.surface = surface;
  std::sort(denotation.begin(), denotation.end());
  denotation.erase(std::unique(denotation.begin(), denotation.end()), denotation.end());
  s.denotation = std::move(denotation);
  s.base_cost = cost;
  s.contradictory = s.denotation.empty();
  lexicon.push_back(std::move(s));
}

std::string world_model_to_json(const WorldModel& model) {
  ordered_json j;
  j["propositions"] = model.propositions;
  j["worlds"] = model.worlds;
  j["prior"] = model.prior;
  ordered_json lex = ordered_json::array();
  for (const Sentence& s : model.lexicon) {
    ordered_json e;
    e["surface"] = s.surface;
    e["denotation"] = s.denotation;
    e["cost"] = s.base_cost;
    if (s.contradictory) e["contradictory"] = true;
    lex.push_back(std::move(e));
  }
  j["lexicon"] = std::move(lex);
  j["eot_cost"] = model.eot_cost;
  return j.dump(2) + "\n";
}

WorldModel world_model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("world model JSON: ") + e.what());
  }
  WorldModel m;
  try {
    m.propositions = j.at("propositions").get<std::vector<std::string>>();
    m.worlds = j.at("worlds").get<std::vector<std::vector<bool>>>();
    m.prior = j.at("prior").get<std::vector<double>>();
    for (const auto& e : j.at("lexicon")) {
      Sentence s;
      s.surface = e.at("surface").get<std::string>();
      s.denotation = e.at("denotation").get<std::vector<WorldIndex>>();
      s.base_cost = e.at("cost").get<double>();
      s.contradictory = e.value("contradictory", s.denotation.empty());
      m.lexicon.push_back(std::move(s));
    }
    m.eot_cost = j.at("eot_cost").get<double>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("world model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

void save_world_model(const WorldModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  f << world_model_to_json(model);
}

WorldModel load_world_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return world_model_from_json(ss.str());
}

std::vector<WorldIndex> consistent_worlds(const WorldModel& model, const SentenceSeq& ctx) {
  std::vector<WorldIndex> acc = model.support();
  for (SentenceId id : ctx.items) {
    if (id < 0 || id >= model.num_sentences())
      fail(ErrorCode::unknown_sentence, "sentence id out of range");
    acc = detail::intersect_sorted(acc, model.lexicon[static_cast<std::size_t>(id)].denotation);
    if (acc.empty()) break;
  }
  return acc;
}

EntailsResult entails_detail(const WorldModel& model, const SentenceSeq& x, SentenceId y) {
  if (y < 0 || y >= model.num_sentences())
    fail(ErrorCode::unknown_sentence, "sentence id out of range");
  auto sx = consistent_worlds(model, x);
  EntailsResult r;
  r.vacuous = sx.empty();
  r.entailed = detail::is_subset_sorted(sx, model.lexicon[static_cast<std::size_t>(y)].denotation);
  return r;
}

bool entails(const WorldModel& model, const SentenceSeq& x, SentenceId y) {
  return entails_detail(model, x, y).entailed;
}

double info_content(const WorldModel& model, SentenceId y, const SentenceSeq& ctx, WorldIndex w) {
  if (w < 0 || w >= model.num_worlds() || model.prior[static_cast<std::size_t>(w)] <= 0.0)
    fail(ErrorCode::invalid_argument, "world outside the prior support");
  auto s_ctx = consistent_worlds(model, ctx);
  if (!std::binary_search(s_ctx.begin(), s_ctx.end(), w))
    fail(ErrorCode::invalid_argument, "context is false in the speaker's world");
  const Sentence& sy = model.lexicon.at(static_cast<std::size_t>(y));
  if (!std::binary_search(sy.denotation.begin(), sy.denotation.end(), w)) return kNegInf;
  auto s_next = detail::intersect_sorted(s_ctx, sy.denotation);
  return std::log(model.prior_mass(s_ctx)) - std::log(model.prior_mass(s_next));
}

double sequence_info(const WorldModel& model, const SentenceSeq& z, WorldIndex w) {
  std::vector<WorldIndex> acc = model.support();
  const double full = model.prior_mass(acc);
  for (SentenceId id : z.items) {
    const Sentence& s = model.lexicon.at(static_cast<std::size_t>(id));
    if (!std::binary_search(s.denotation.begin(), s.denotation.end(), w)) return kNegInf;
    acc = detail::intersect_sorted(acc, s.denotation);
  }
  return std::log(full) - std::log(model.prior_mass(acc));
}

}  // namespace pel
