#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pel/ngram.hpp"
#include "pel/provider.hpp"
#include "pel/speakers.hpp"

namespace pel {

std::string sha256_hex(const std::string& data);

/// How abstract sentence sequences become text for LM-style backends.
struct RenderConfig {
  enum class Eot { eos_token, literal_marker };

  std::string separator = " ";
  Eot eot_realization = Eot::eos_token;
  std::string literal_marker = "<|endoftext|>";
  int whitespace_group_size = 16;  // consecutive spaces per pause token

  std::string to_json() const;
  static RenderConfig from_json(const std::string& text);
};

struct RenderedText {
  std::string text;
  bool append_eos = false;
};

/// Join units with the separator; realize $ per the config.
RenderedText render_request(const RenderConfig& cfg, const SeqRequest& request);

/// Token-count callback; the default counts whitespace-delimited words.
using TokenCounter = std::function<int(const std::string&)>;
int default_token_count(const std::string& text);

/// Inserts whitespace between `a` and `b` adding exactly the token count
/// that replacing `a` by n copies of itself would add: group_size spaces per
/// extra token. n = 1 inserts nothing.
std::string pause_token_transform(const std::string& a, const std::string& b, int n_equivalent,
                                  const RenderConfig& cfg,
                                  const TokenCounter& counter = default_token_count);

/// (-sum(logprob)/ln 2) / sum(byte lengths). Errors on an empty list.
double bits_per_byte(const std::vector<std::pair<std::string, double>>& scored_texts);

/// Exact speaker backend: prefix probabilities from a SpeakerEngine, looked
/// up by surface form.
class ExactSpeakerProvider : public LogProbProvider {
 public:
  ExactSpeakerProvider(const WorldModel& model, SpeakerSpec spec);
  std::string backend_id() const override;
  const SpeakerEngine& engine() const { return engine_; }

 protected:
  double compute(const SeqRequest& request) override;

 private:
  SpeakerEngine engine_;
};

class NgramProvider : public LogProbProvider {
 public:
  explicit NgramProvider(SentenceNgram model);
  std::string backend_id() const override { return "ngram"; }

 protected:
  double compute(const SeqRequest& request) override;

 private:
  SentenceNgram model_;
  std::map<std::string, int> by_surface_;
};

/// Persistent score cache: JSONL of {text_sha256, text, append_eos, logprob,
/// model_id}. Concurrent readers; writes serialized through one handle.
class ScoreCache {
 public:
  explicit ScoreCache(std::string path);

  std::optional<double> lookup(const std::string& text, bool append_eos) const;
  void store(const std::string& text, bool append_eos, double logprob,
             const std::string& model_id);
  std::size_t size() const;
  const std::string& path() const { return path_; }

 private:
  static std::string key(const std::string& sha, bool append_eos);
  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, double> entries_;
};

/// Read-only backend over a score cache file; a miss is an error.
class CacheFileProvider : public LogProbProvider {
 public:
  CacheFileProvider(std::string path, RenderConfig cfg);
  std::string backend_id() const override { return "cache"; }

 protected:
  double compute(const SeqRequest& request) override;

 private:
  ScoreCache cache_;
  RenderConfig cfg_;
};

struct HttpProviderOptions {
  int max_in_flight = 4;
  int max_batch = 32;
  std::vector<double> retry_backoff_seconds = {0.5, 2.0, 8.0};
};

/// Remote scoring over the JSON wire protocol, fronted by the persistent
/// cache when one is attached. Batches run with a bounded number of
/// concurrent requests; results assemble by index.
class HttpProvider : public LogProbProvider {
 public:
  HttpProvider(std::string endpoint, RenderConfig cfg, std::shared_ptr<ScoreCache> cache,
               HttpProviderOptions options = {});
  ~HttpProvider() override;
  std::string backend_id() const override { return "http"; }

  std::vector<double> logprob_batch(const std::vector<SeqRequest>& requests) override;
  std::string last_model_id() const;

 protected:
  double compute(const SeqRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Fixed character-unigram scorer used by the bundled mock service: byte b
/// has unnormalized weight b+1 and the end-of-sequence token weight 1000,
/// normalized over all 256 byte values plus EOS.
struct MockCharUnigram {
  static constexpr double kEosWeight = 1000.0;
  static double normalizer();  // 256*257/2 + 1000
  static double logprob(const std::string& text, bool append_eos);
  static int token_count(const std::string& text, bool append_eos);
  static const char* model_id() { return "mock-char-unigram"; }
};

/// In-process scoring service implementing POST /v1/score.
class MockScoreServer {
 public:
  MockScoreServer();
  ~MockScoreServer();

  /// Binds 127.0.0.1:port (port 0 picks a free port); returns the bound port.
  int start(int port = 0);
  void stop();
  int port() const;
  long long request_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Factory used by the CLI: exact|ngram|cache|http.
std::unique_ptr<LogProbProvider> make_provider(const std::string& backend,
                                               const WorldModel* model, const SpeakerSpec* spec,
                                               const std::string& ngram_path,
                                               const std::string& cache_path,
                                               const std::string& endpoint,
                                               const RenderConfig& render,
                                               int max_in_flight = 4);

}  // namespace pel
