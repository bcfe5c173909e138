#include "pel/ngram.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "pel/speakers.hpp"

namespace pel {

using ordered_json = nlohmann::ordered_json;

SentenceNgram::SentenceNgram(std::vector<std::string> vocabulary, int order,
                             double smoothing_lambda)
    : vocab_(std::move(vocabulary)), order_(order), lambda_(smoothing_lambda) {
  if (order_ < 2) fail(ErrorCode::invalid_argument, "n-gram order must be >= 2");
  if (!(lambda_ >= 0.0)) fail(ErrorCode::invalid_argument, "smoothing lambda must be >= 0");
}

void SentenceNgram::set_smoothing_lambda(double l) {
  if (!(l >= 0.0)) fail(ErrorCode::invalid_argument, "smoothing lambda must be >= 0");
  lambda_ = l;
}

std::vector<int> SentenceNgram::trim_history(const std::vector<int>& history) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::vector<int> h;
  if (history.size() >= width) {
    h.assign(history.end() - static_cast<std::ptrdiff_t>(width), history.end());
  } else {
    h.assign(width - history.size(), kBos);
    h.insert(h.end(), history.begin(), history.end());
  }
  return h;
}

void SentenceNgram::observe(const SentenceSeq& text) {
  std::vector<int> history;
  auto bump = [&](int next) {
    const auto h = trim_history(history);
    counts_[h][next] += 1;
    totals_[h] += 1;
  };
  for (SentenceId id : text.items) {
    if (id < 0 || id >= static_cast<int>(vocab_.size()))
      fail(ErrorCode::unknown_sentence, "sentence outside the declared vocabulary");
    bump(id);
    history.push_back(id);
  }
  if (text.terminated) bump(eot_id());
}

long long SentenceNgram::count(const std::vector<int>& history, int next) const {
  const auto h = trim_history(history);
  auto it = counts_.find(h);
  if (it == counts_.end()) return 0;
  auto jt = it->second.find(next);
  return jt == it->second.end() ? 0 : jt->second;
}

double SentenceNgram::conditional(const std::vector<int>& history, int next) const {
  if (next < 0 || next > eot_id())
    fail(ErrorCode::unknown_sentence, "next sentence outside the declared vocabulary");
  const auto h = trim_history(history);
  long long total = 0;
  long long c = 0;
  auto it = counts_.find(h);
  if (it != counts_.end()) {
    auto tt = totals_.find(h);
    total = tt->second;
    auto jt = it->second.find(next);
    c = jt == it->second.end() ? 0 : jt->second;
  }
  const double outcomes = static_cast<double>(vocab_.size()) + 1.0;  // vocabulary plus $
  const double num = static_cast<double>(c) + lambda_;
  const double den = static_cast<double>(total) + lambda_ * outcomes;
  if (den <= 0.0) return 0.0;  // lambda = 0 and unseen history
  return num / den;
}

double SentenceNgram::logprob(const SentenceSeq& z) const {
  double lp = 0.0;
  std::vector<int> history;
  for (SentenceId id : z.items) {
    if (id < 0 || id >= static_cast<int>(vocab_.size()))
      fail(ErrorCode::unknown_sentence, "sentence outside the declared vocabulary");
    const double p = conditional(history, id);
    if (p <= 0.0) return kNegInf;
    lp += std::log(p);
    history.push_back(id);
  }
  if (z.terminated) {
    const double p = conditional(history, eot_id());
    if (p <= 0.0) return kNegInf;
    lp += std::log(p);
  }
  return lp;
}

std::string SentenceNgram::to_json() const {
  ordered_json j;
  j["order"] = order_;
  j["smoothing_lambda"] = lambda_;
  j["vocabulary"] = vocab_;
  ordered_json rows = ordered_json::array();
  for (const auto& [hist, nexts] : counts_) {
    for (const auto& [next, c] : nexts) {
      ordered_json row;
      row["history"] = hist;
      row["next"] = next;
      row["count"] = c;
      rows.push_back(std::move(row));
    }
  }
  j["counts"] = std::move(rows);
  return j.dump(2) + "\n";
}

SentenceNgram SentenceNgram::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("n-gram JSON: ") + e.what());
  }
  SentenceNgram m(j.at("vocabulary").get<std::vector<std::string>>(), j.at("order").get<int>(),
                  j.at("smoothing_lambda").get<double>());
  for (const auto& row : j.at("counts")) {
    const auto hist = row.at("history").get<std::vector<int>>();
    const int next = row.at("next").get<int>();
    const long long c = row.at("count").get<long long>();
    m.counts_[hist][next] += c;
    m.totals_[hist] += c;
  }
  return m;
}

void SentenceNgram::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  f << to_json();
}

SentenceNgram SentenceNgram::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

SentenceNgram fit_ngram(const std::vector<SampledText>& corpus,
                        std::vector<std::string> vocabulary, int order,
                        double smoothing_lambda) {
  if (corpus.empty()) fail(ErrorCode::invalid_argument, "corpus must be non-empty");
  SentenceNgram m(std::move(vocabulary), order, smoothing_lambda);
  for (const SampledText& t : corpus) m.observe(t.seq);
  return m;
}

}  // namespace pel
