#include "pel/scoring.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

namespace pel {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact implementation for cache keys.

namespace {

struct Sha256Ctx {
  std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                        0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
  unsigned char buf[64];
  std::uint64_t total = 0;
  std::size_t fill = 0;

  static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void block(const unsigned char* p) {
    static const std::uint32_t K[64] = {
        0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
        0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
        0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
        0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
        0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
        0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
        0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
        0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
        0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
        0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
        0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                  hh = h[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + S1 + ch + K[i] + w[i];
      const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = S0 + maj;
      hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  void update(const unsigned char* p, std::size_t n) {
    total += n;
    while (n > 0) {
      const std::size_t take = std::min(n, sizeof(buf) - fill);
      std::memcpy(buf + fill, p, take);
      fill += take;
      p += take;
      n -= take;
      if (fill == sizeof(buf)) {
        block(buf);
        fill = 0;
      }
    }
  }

  std::string finish() {
    const std::uint64_t bits = total * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(len, 8);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint32_t v : h)
      for (int i = 28; i >= 0; i -= 4) out.push_back(hex[(v >> i) & 0xf]);
    return out;
  }
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256Ctx ctx;
  ctx.update(reinterpret_cast<const unsigned char*>(data.data()), data.size());
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// Rendering

std::string RenderConfig::to_json() const {
  ordered_json j;
  j["separator"] = separator;
  j["eot_realization"] = eot_realization == Eot::eos_token ? "eos_token" : "literal_marker";
  j["literal_marker"] = literal_marker;
  j["whitespace_group_size"] = whitespace_group_size;
  return j.dump();
}

RenderConfig RenderConfig::from_json(const std::string& text) {
  RenderConfig cfg;
  const auto j = ordered_json::parse(text);
  cfg.separator = j.value("separator", cfg.separator);
  const std::string eot = j.value("eot_realization", std::string("eos_token"));
  if (eot == "eos_token") {
    cfg.eot_realization = Eot::eos_token;
  } else if (eot == "literal_marker") {
    cfg.eot_realization = Eot::literal_marker;
  } else {
    fail(ErrorCode::parse, "unknown eot_realization: " + eot);
  }
  cfg.literal_marker = j.value("literal_marker", cfg.literal_marker);
  cfg.whitespace_group_size = j.value("whitespace_group_size", cfg.whitespace_group_size);
  return cfg;
}

RenderedText render_request(const RenderConfig& cfg, const SeqRequest& request) {
  std::string body;
  if (request.rendered_override) {
    body = *request.rendered_override;
  } else {
    for (std::size_t i = 0; i < request.units.size(); ++i) {
      if (i > 0) body += cfg.separator;
      body += request.units[i];
    }
  }
  if (!request.terminated) return {body, false};
  if (cfg.eot_realization == RenderConfig::Eot::eos_token) return {body, true};
  if (body.empty()) return {cfg.literal_marker, false};
  return {body + cfg.separator + cfg.literal_marker, false};
}

int default_token_count(const std::string& text) {
  int n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

std::string pause_token_transform(const std::string& a, const std::string& b, int n_equivalent,
                                  const RenderConfig& cfg, const TokenCounter& counter) {
  if (n_equivalent < 1) fail(ErrorCode::invalid_argument, "n_equivalent must be >= 1");
  const long long spaces = static_cast<long long>(cfg.whitespace_group_size) *
                           (n_equivalent - 1) * counter(a);
  std::string out = a;
  out.append(static_cast<std::size_t>(spaces), ' ');
  if (!b.empty()) {
    out += cfg.separator;
    out += b;
  }
  return out;
}

double bits_per_byte(const std::vector<std::pair<std::string, double>>& scored_texts) {
  if (scored_texts.empty()) fail(ErrorCode::invalid_argument, "bits_per_byte needs scores");
  double nats = 0.0;
  double bytes = 0.0;
  for (const auto& [text, lp] : scored_texts) {
    if (!std::isfinite(lp)) fail(ErrorCode::degenerate_probability, "non-finite log-probability");
    nats += lp;
    bytes += static_cast<double>(text.size());
  }
  if (bytes <= 0.0) fail(ErrorCode::invalid_argument, "bits_per_byte needs non-empty texts");
  return (-nats / std::log(2.0)) / bytes;
}

// ---------------------------------------------------------------------------
// Providers

ExactSpeakerProvider::ExactSpeakerProvider(const WorldModel& model, SpeakerSpec spec)
    : engine_(model, std::move(spec)) {}

std::string ExactSpeakerProvider::backend_id() const {
  return std::string("exact:") + speaker_family_name(engine_.spec().family);
}

double ExactSpeakerProvider::compute(const SeqRequest& request) {
  SentenceSeq seq;
  for (const auto& unit : request.units)
    seq.items.push_back(engine_.model().require_sentence(unit));
  seq.terminated = request.terminated;
  return engine_.prefix_logprob(seq);
}

NgramProvider::NgramProvider(SentenceNgram model) : model_(std::move(model)) {
  for (std::size_t i = 0; i < model_.vocabulary().size(); ++i)
    by_surface_[model_.vocabulary()[i]] = static_cast<int>(i);
}

double NgramProvider::compute(const SeqRequest& request) {
  SentenceSeq seq;
  for (const auto& unit : request.units) {
    auto it = by_surface_.find(unit);
    if (it == by_surface_.end())
      fail(ErrorCode::unknown_sentence, "sentence outside the declared vocabulary: " + unit);
    seq.items.push_back(it->second);
  }
  seq.terminated = request.terminated;
  return model_.logprob(seq);
}

// ---------------------------------------------------------------------------
// Score cache

ScoreCache::ScoreCache(std::string path) : path_(std::move(path)) {
  std::ifstream f(path_);
  if (!f) return;  // fresh cache
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::cache_corrupt,
           "score cache line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("text_sha256") || !j.contains("append_eos") || !j.contains("logprob"))
      fail(ErrorCode::cache_corrupt,
           "score cache line " + std::to_string(line_no) + ": missing fields");
    entries_[key(j["text_sha256"].get<std::string>(), j["append_eos"].get<bool>())] =
        j["logprob"].get<double>();
  }
}

std::string ScoreCache::key(const std::string& sha, bool append_eos) {
  return sha + (append_eos ? "#1" : "#0");
}

std::optional<double> ScoreCache::lookup(const std::string& text, bool append_eos) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key(sha256_hex(text), append_eos));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::store(const std::string& text, bool append_eos, double logprob,
                       const std::string& model_id) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string sha = sha256_hex(text);
  const std::string k = key(sha, append_eos);
  if (entries_.count(k)) return;
  entries_[k] = logprob;
  std::ofstream f(path_, std::ios::app);
  if (!f) fail(ErrorCode::invalid_argument, "cannot append to score cache: " + path_);
  ordered_json j;
  j["text_sha256"] = sha;
  j["text"] = text;
  j["append_eos"] = append_eos;
  j["logprob"] = logprob;
  j["model_id"] = model_id;
  f << j.dump() << "\n";
}

std::size_t ScoreCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

CacheFileProvider::CacheFileProvider(std::string path, RenderConfig cfg)
    : cache_(std::move(path)), cfg_(std::move(cfg)) {}

double CacheFileProvider::compute(const SeqRequest& request) {
  const RenderedText r = render_request(cfg_, request);
  auto hit = cache_.lookup(r.text, r.append_eos);
  if (!hit)
    fail(ErrorCode::cache_miss, "score cache has no entry for the rendered text: " + r.text);
  return *hit;
}

// ---------------------------------------------------------------------------
// HTTP provider

struct HttpProvider::Impl {
  std::string endpoint;
  RenderConfig cfg;
  std::shared_ptr<ScoreCache> cache;
  HttpProviderOptions options;
  mutable std::mutex mu;
  std::string model_id;

  ordered_json post_batch(const std::vector<std::string>& texts,
                          const std::vector<bool>& eos) const {
    ordered_json req;
    req["texts"] = texts;
    req["append_eos"] = eos;
    const std::string body = req.dump();
    std::string last_error;
    const std::size_t attempts = options.retry_backoff_seconds.size() + 1;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        const double s = options.retry_backoff_seconds[attempt - 1];
        std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(s * 1000)));
      }
      httplib::Client client(endpoint);
      client.set_connection_timeout(10);
      client.set_read_timeout(60);
      auto res = client.Post("/v1/score", body, "application/json");
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        std::string remote = res->body;
        try {
          remote = ordered_json::parse(res->body).value("error", res->body);
        } catch (const std::exception&) {
        }
        last_error = "status " + std::to_string(res->status) + ": " + remote;
        continue;
      }
      try {
        return ordered_json::parse(res->body);
      } catch (const std::exception& e) {
        last_error = std::string("bad response JSON: ") + e.what();
      }
    }
    fail(ErrorCode::transport, "scoring service failed after retries: " + last_error);
  }
};

HttpProvider::HttpProvider(std::string endpoint, RenderConfig cfg,
                           std::shared_ptr<ScoreCache> cache, HttpProviderOptions options)
    : impl_(new Impl{std::move(endpoint), std::move(cfg), std::move(cache), std::move(options),
                     {}, {}}) {}

HttpProvider::~HttpProvider() = default;

std::string HttpProvider::last_model_id() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->model_id;
}

double HttpProvider::compute(const SeqRequest& request) {
  return logprob_batch({request})[0];
}

std::vector<double> HttpProvider::logprob_batch(const std::vector<SeqRequest>& requests) {
  std::vector<double> out(requests.size(), 0.0);
  std::vector<RenderedText> rendered(requests.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    rendered[i] = render_request(impl_->cfg, requests[i]);
    std::optional<double> hit;
    if (impl_->cache) hit = impl_->cache->lookup(rendered[i].text, rendered[i].append_eos);
    if (hit) {
      out[i] = *hit;
    } else {
      misses.push_back(i);
    }
  }
  if (misses.empty()) return out;

  // Chunk the misses, run up to max_in_flight chunks concurrently, and
  // assemble results by index so completion order never matters.
  std::vector<std::vector<std::size_t>> chunks;
  for (std::size_t i = 0; i < misses.size(); i += static_cast<std::size_t>(impl_->options.max_batch))
    chunks.emplace_back(misses.begin() + static_cast<std::ptrdiff_t>(i),
                        misses.begin() + static_cast<std::ptrdiff_t>(std::min(
                                             misses.size(),
                                             i + static_cast<std::size_t>(impl_->options.max_batch))));
  std::mutex err_mu;
  std::string first_error;
  std::atomic<std::size_t> next_chunk{0};
  auto worker = [&] {
    while (true) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks.size()) return;
      const auto& idxs = chunks[c];
      std::vector<std::string> texts;
      std::vector<bool> eos;
      for (std::size_t i : idxs) {
        texts.push_back(rendered[i].text);
        eos.push_back(rendered[i].append_eos);
      }
      try {
        const ordered_json resp = impl_->post_batch(texts, eos);
        const auto& lps = resp.at("log_probs");
        if (lps.size() != idxs.size())
          fail(ErrorCode::transport, "scoring service returned a mismatched batch");
        const std::string mid = resp.value("model_id", std::string());
        {
          std::lock_guard<std::mutex> lock(impl_->mu);
          if (!mid.empty()) impl_->model_id = mid;
        }
        for (std::size_t k = 0; k < idxs.size(); ++k) {
          out[idxs[k]] = lps[k].get<double>();
          if (impl_->cache)
            impl_->cache->store(rendered[idxs[k]].text, rendered[idxs[k]].append_eos,
                                out[idxs[k]], mid);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (first_error.empty()) first_error = e.what();
        return;
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, impl_->options.max_in_flight)),
                            chunks.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (!first_error.empty()) fail(ErrorCode::transport, first_error);
  return out;
}

// ---------------------------------------------------------------------------
// Mock scoring service

double MockCharUnigram::normalizer() { return 256.0 * 257.0 / 2.0 + kEosWeight; }

double MockCharUnigram::logprob(const std::string& text, bool append_eos) {
  const double z = normalizer();
  double lp = 0.0;
  for (unsigned char b : text) lp += std::log((static_cast<double>(b) + 1.0) / z);
  if (append_eos) lp += std::log(kEosWeight / z);
  return lp;
}

int MockCharUnigram::token_count(const std::string& text, bool append_eos) {
  return static_cast<int>(text.size()) + (append_eos ? 1 : 0);
}

struct MockScoreServer::Impl {
  httplib::Server server;
  std::thread thread;
  std::atomic<long long> requests{0};
  int port = 0;
};

MockScoreServer::MockScoreServer() : impl_(new Impl) {
  impl_->server.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
    impl_->requests.fetch_add(1);
    ordered_json body;
    try {
      body = ordered_json::parse(req.body);
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(ordered_json{{"error", std::string("bad JSON: ") + e.what()}}.dump(),
                      "application/json");
      return;
    }
    if (!body.contains("texts") || !body.contains("append_eos") ||
        body["texts"].size() != body["append_eos"].size()) {
      res.status = 400;
      res.set_content(ordered_json{{"error", "texts and append_eos must align"}}.dump(),
                      "application/json");
      return;
    }
    ordered_json out;
    ordered_json lps = ordered_json::array();
    ordered_json tokens = ordered_json::array();
    for (std::size_t i = 0; i < body["texts"].size(); ++i) {
      const std::string text = body["texts"][i].get<std::string>();
      const bool eos = body["append_eos"][i].get<bool>();
      lps.push_back(MockCharUnigram::logprob(text, eos));
      tokens.push_back(MockCharUnigram::token_count(text, eos));
    }
    out["log_probs"] = std::move(lps);
    out["token_counts"] = std::move(tokens);
    out["model_id"] = MockCharUnigram::model_id();
    res.set_content(out.dump(), "application/json");
  });
}

MockScoreServer::~MockScoreServer() { stop(); }

int MockScoreServer::start(int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port))
      fail(ErrorCode::transport, "cannot bind mock server port " + std::to_string(port));
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void MockScoreServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

int MockScoreServer::port() const { return impl_->port; }

long long MockScoreServer::request_count() const { return impl_->requests.load(); }

// ---------------------------------------------------------------------------

std::unique_ptr<LogProbProvider> make_provider(const std::string& backend,
                                               const WorldModel* model, const SpeakerSpec* spec,
                                               const std::string& ngram_path,
                                               const std::string& cache_path,
                                               const std::string& endpoint,
                                               const RenderConfig& render, int max_in_flight) {
  if (backend == "exact") {
    if (!model || !spec)
      fail(ErrorCode::invalid_argument, "exact provider needs a world model and speaker spec");
    return std::make_unique<ExactSpeakerProvider>(*model, *spec);
  }
  if (backend == "ngram") {
    if (ngram_path.empty()) fail(ErrorCode::invalid_argument, "ngram provider needs a model path");
    return std::make_unique<NgramProvider>(SentenceNgram::load(ngram_path));
  }
  if (backend == "cache") {
    if (cache_path.empty()) fail(ErrorCode::invalid_argument, "cache provider needs a cache path");
    return std::make_unique<CacheFileProvider>(cache_path, render);
  }
  if (backend == "http") {
    if (endpoint.empty()) fail(ErrorCode::invalid_argument, "http provider needs an endpoint");
    std::shared_ptr<ScoreCache> cache;
    if (!cache_path.empty()) cache = std::make_shared<ScoreCache>(cache_path);
    HttpProviderOptions opts;
    opts.max_in_flight = max_in_flight;
    return std::make_unique<HttpProvider>(endpoint, render, cache, opts);
  }
  fail(ErrorCode::invalid_argument, "unknown provider backend: " + backend);
}

}  // namespace pel
