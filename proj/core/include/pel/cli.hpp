#pragma once

#include <cstdint>
#include <string>

namespace pel {

/// Resolved run configuration. A run is fully reproducible from this record:
/// every report embeds it, and reruns with the same config are byte-identical.
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string provider = "exact";  // exact|ngram|cache|http
  std::string endpoint;
  std::string test = "original";  // original|flipped|repeated|pause
  int n_reps = 1;
  std::string out = "out";
  double tolerance = 1e-9;
  std::string phenomenon;
  bool no_holdout = false;

  // Inputs and artifacts
  std::string model_path;
  std::string speaker = "gricean";  // gricean|noise_tolerant|explanatory
  double noise_eps = 0.0;
  std::string contextual_cost_path;
  std::string corpus_path;
  std::string ngram_path;
  std::string dataset_path;
  std::string scores_path;
  std::string texts_path;
  std::string wordlists_dir = "data/wordlists";
  std::string cache_path;
  std::string config_path;

  // Estimation and simulation
  int order = 2;
  double smoothing_lambda = 1e-6;
  int n_texts = 1000;
  int max_len = 12;

  // Learned test
  double l2 = 1e-6;
  double holdout_fraction = 0.2;

  // Generation
  int max_distractors = 4;

  // Verification sweep
  int n_models = 50;

  // Service
  int port = 8080;

  // Rendering conventions, echoed into every report
  std::string separator = " ";
  std::string eot_realization = "eos_token";  // eos_token|literal_marker
  std::string literal_marker = "<|endoftext|>";
  int whitespace_group_size = 16;

  std::string to_json() const;
  void apply_json_file(const std::string& path);

  /// PEL_CACHE_DIR overrides the cache directory; otherwise an unset cache
  /// path lands under the output directory.
  void resolve_cache_path();
};

int cmd_verify(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_train_ngram(const RunConfig& cfg);
int cmd_gen(const RunConfig& cfg);
int cmd_score(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_bpb(const RunConfig& cfg);
int cmd_mock_server(const RunConfig& cfg);

}  // namespace pel
