#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace pel {

/// A sentence sequence to be scored: surface units in order, optionally
/// closed by the end-of-text sentence. `rendered_override` carries a
/// pre-rendered string for text backends (used by the pause-token control);
/// abstract backends ignore it.
struct SeqRequest {
  std::vector<std::string> units;
  bool terminated = false;
  std::optional<std::string> rendered_override;

  static SeqRequest of(std::vector<std::string> u, bool term) {
    SeqRequest r;
    r.units = std::move(u);
    r.terminated = term;
    return r;
  }
};

/// Uniform scoring interface: total log-probability (nats) of a sentence
/// sequence. Implementations memoize by request so repeated queries are
/// served from cache.
class LogProbProvider {
 public:
  virtual ~LogProbProvider() = default;
  virtual std::string backend_id() const = 0;

  double logprob(const SeqRequest& request) {
    const std::string key = request_key(request);
    {
      std::lock_guard<std::mutex> lock(memo_mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const double value = compute(request);
    std::lock_guard<std::mutex> lock(memo_mu_);
    memo_.emplace(key, value);
    return value;
  }

  virtual std::vector<double> logprob_batch(const std::vector<SeqRequest>& requests) {
    std::vector<double> out;
    out.reserve(requests.size());
    for (const auto& r : requests) out.push_back(logprob(r));
    return out;
  }

  static std::string request_key(const SeqRequest& request) {
    std::string key;
    if (request.rendered_override) {
      key = "R\x1f" + *request.rendered_override;
    } else {
      for (const auto& u : request.units) {
        key += u;
        key += '\x1f';
      }
    }
    key += request.terminated ? "\x1e$" : "\x1e.";
    return key;
  }

 protected:
  virtual double compute(const SeqRequest& request) = 0;

 private:
  std::mutex memo_mu_;
  std::map<std::string, double> memo_;
};

}  // namespace pel
