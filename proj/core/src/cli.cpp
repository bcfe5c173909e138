#include "pel/cli.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "pel/entailment_tests.hpp"
#include "pel/eval.hpp"
#include "pel/fixtures.hpp"
#include "pel/rng.hpp"
#include "pel/scoring.hpp"

namespace pel {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string RunConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["provider"] = provider;
  j["endpoint"] = endpoint;
  j["test"] = test;
  j["n_reps"] = n_reps;
  j["out"] = out;
  j["tolerance"] = tolerance;
  j["phenomenon"] = phenomenon;
  j["no_holdout"] = no_holdout;
  j["model_path"] = model_path;
  j["speaker"] = speaker;
  j["noise_eps"] = noise_eps;
  j["contextual_cost_path"] = contextual_cost_path;
  j["corpus_path"] = corpus_path;
  j["ngram_path"] = ngram_path;
  j["dataset_path"] = dataset_path;
  j["scores_path"] = scores_path;
  j["texts_path"] = texts_path;
  j["wordlists_dir"] = wordlists_dir;
  j["cache_path"] = cache_path;
  j["order"] = order;
  j["smoothing_lambda"] = smoothing_lambda;
  j["n_texts"] = n_texts;
  j["max_len"] = max_len;
  j["l2"] = l2;
  j["holdout_fraction"] = holdout_fraction;
  j["max_distractors"] = max_distractors;
  j["n_models"] = n_models;
  j["port"] = port;
  j["separator"] = separator;
  j["eot_realization"] = eot_realization;
  j["literal_marker"] = literal_marker;
  j["whitespace_group_size"] = whitespace_group_size;
  return j.dump();
}

void RunConfig::apply_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  ordered_json j;
  try {
    j = ordered_json::parse(ss.str());
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("config JSON: ") + e.what());
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("seed", seed);
  get("jobs", jobs);
  get("provider", provider);
  get("endpoint", endpoint);
  get("test", test);
  get("n_reps", n_reps);
  get("out", out);
  get("tolerance", tolerance);
  get("phenomenon", phenomenon);
  get("no_holdout", no_holdout);
  get("model_path", model_path);
  get("speaker", speaker);
  get("noise_eps", noise_eps);
  get("contextual_cost_path", contextual_cost_path);
  get("corpus_path", corpus_path);
  get("ngram_path", ngram_path);
  get("dataset_path", dataset_path);
  get("scores_path", scores_path);
  get("texts_path", texts_path);
  get("wordlists_dir", wordlists_dir);
  get("cache_path", cache_path);
  get("order", order);
  get("smoothing_lambda", smoothing_lambda);
  get("n_texts", n_texts);
  get("max_len", max_len);
  get("l2", l2);
  get("holdout_fraction", holdout_fraction);
  get("max_distractors", max_distractors);
  get("n_models", n_models);
  get("port", port);
  get("separator", separator);
  get("eot_realization", eot_realization);
  get("literal_marker", literal_marker);
  get("whitespace_group_size", whitespace_group_size);
}

void RunConfig::resolve_cache_path() {
  if (const char* dir = std::getenv("PEL_CACHE_DIR")) {
    cache_path = (fs::path(dir) / "score_cache.jsonl").string();
    return;
  }
  if (cache_path.empty()) cache_path = (fs::path(out) / "score_cache.jsonl").string();
}

namespace {

void ensure_out(const RunConfig& cfg) { fs::create_directories(cfg.out); }

std::string out_file(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  f << content;
}

RenderConfig render_from(const RunConfig& cfg) {
  RenderConfig r;
  r.separator = cfg.separator;
  if (cfg.eot_realization == "eos_token") {
    r.eot_realization = RenderConfig::Eot::eos_token;
  } else if (cfg.eot_realization == "literal_marker") {
    r.eot_realization = RenderConfig::Eot::literal_marker;
  } else {
    fail(ErrorCode::invalid_argument, "unknown eot_realization: " + cfg.eot_realization);
  }
  r.literal_marker = cfg.literal_marker;
  r.whitespace_group_size = cfg.whitespace_group_size;
  return r;
}

SpeakerSpec speaker_from(const RunConfig& cfg, const WorldModel& model) {
  const SpeakerFamily family = speaker_family_from_name(cfg.speaker);
  if (family == SpeakerFamily::gricean) return SpeakerSpec::gricean();
  if (family == SpeakerFamily::noise_tolerant)
    return SpeakerSpec::noise_tolerant_uniform(model, cfg.noise_eps);
  if (cfg.contextual_cost_path.empty())
    fail(ErrorCode::invalid_argument, "explanatory speaker needs --contextual-costs");
  std::ifstream f(cfg.contextual_cost_path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + cfg.contextual_cost_path);
  std::stringstream ss;
  ss << f.rdbuf();
  return SpeakerSpec::explanatory(contextual_costs_from_json(ss.str()));
}

WorldModel require_model(const RunConfig& cfg) {
  if (cfg.model_path.empty()) fail(ErrorCode::invalid_argument, "a world model path is required");
  return load_world_model(cfg.model_path);
}

std::uint64_t sweep_seed(std::uint64_t base, int i) {
  return Rng::for_item(base, static_cast<std::uint64_t>(i)).next_u64();
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg) {
  ensure_out(cfg);
  ordered_json report;
  report["config"] = ordered_json::parse(cfg.to_json());
  std::ostringstream text;
  bool all_pass = true;

  // Base-cost sweep: the exact test must equal the model-side value.
  {
    ordered_json sweep = ordered_json::array();
    double max_dev = 0.0;
    bool pass = true;
    for (int i = 0; i < cfg.n_models; ++i) {
      const std::uint64_t ms = sweep_seed(cfg.seed, i);
      const WorldModel model = random_world_model(ms);
      const PropReport r = verify_prop1(model, cfg.tolerance);
      max_dev = std::max(max_dev, r.max_abs_deviation);
      pass = pass && r.pass;
      ordered_json row;
      row["model_seed"] = ms;
      row["max_abs_deviation"] = r.max_abs_deviation;
      row["n_pairs"] = r.n_pairs;
      row["n_degenerate"] = r.n_degenerate;
      row["pass"] = r.pass;
      sweep.push_back(std::move(row));
    }
    report["base_cost_identity"] = {{"n_models", cfg.n_models},
                                    {"tolerance", cfg.tolerance},
                                    {"max_abs_deviation", max_dev},
                                    {"pass", pass},
                                    {"models", sweep}};
    text << (pass ? "PASS" : "FAIL") << " base-cost identity: max deviation " << max_dev
         << " over " << cfg.n_models << " models (tolerance " << cfg.tolerance << ")\n";
    all_pass = all_pass && pass;
  }

  // Contextual-cost sweep: test = value + cost correction.
  {
    ordered_json sweep = ordered_json::array();
    double max_dev = 0.0;
    bool pass = true;
    for (int i = 0; i < cfg.n_models; ++i) {
      const std::uint64_t ms = sweep_seed(cfg.seed + 1, i);
      const WorldModel model = random_world_model(ms);
      const SpeakerSpec spec =
          SpeakerSpec::explanatory(random_contextual_costs(model, ms ^ 0xC0FFEEULL));
      const PropReport r = verify_prop3(model, spec, cfg.tolerance);
      max_dev = std::max(max_dev, r.max_abs_deviation);
      pass = pass && r.pass;
      ordered_json row;
      row["model_seed"] = ms;
      row["max_abs_deviation"] = r.max_abs_deviation;
      row["n_pairs"] = r.n_pairs;
      row["n_degenerate"] = r.n_degenerate;
      row["pass"] = r.pass;
      sweep.push_back(std::move(row));
    }
    report["contextual_cost_identity"] = {{"n_models", cfg.n_models},
                                          {"tolerance", cfg.tolerance},
                                          {"max_abs_deviation", max_dev},
                                          {"pass", pass},
                                          {"models", sweep}};
    text << (pass ? "PASS" : "FAIL") << " contextual-cost identity: max deviation " << max_dev
         << " over " << cfg.n_models << " models (tolerance " << cfg.tolerance << ")\n";
    all_pass = all_pass && pass;
  }

  // Repetition-test convergence on the designated fixture.
  {
    const Prop2Fixture fx = prop2_fixture();
    const Prop2Report r =
        verify_prop2(fx.model, fx.x, fx.y, {0.0, 0.2, 0.3, 0.5}, 6, 0.2, cfg.tolerance);
    report["repetition_convergence"] = ordered_json::parse(prop2_report_to_json(r));
    text << (r.pass ? "PASS" : "FAIL") << " repetition convergence: eps {0, 0.2, 0.3, 0.5}, n = 1..6\n";
    all_pass = all_pass && r.pass;
  }

  report["pass"] = all_pass;
  write_file(out_file(cfg, "verify_report.json"), report.dump(2) + "\n");
  write_file(out_file(cfg, "verify_report.txt"), text.str());
  std::cout << text.str();
  std::cout << (all_pass ? "PASS" : "FAIL") << " all verification sweeps\n";
  return all_pass ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg) {
  ensure_out(cfg);
  const WorldModel model = require_model(cfg);
  const SpeakerSpec spec = speaker_from(cfg, model);
  SpeakerEngine engine(model, spec);
  const auto corpus = engine.sample_corpus(cfg.n_texts, cfg.seed, cfg.max_len, cfg.jobs);
  const std::string path =
      cfg.corpus_path.empty() ? out_file(cfg, "corpus.jsonl") : cfg.corpus_path;
  save_corpus(corpus, model, path);
  long long forced = 0;
  for (const auto& t : corpus) forced += t.forced_termination;
  ordered_json j;
  j["config"] = ordered_json::parse(cfg.to_json());
  j["n_texts"] = corpus.size();
  j["forced_termination"] = forced;
  j["corpus_path"] = path;
  write_file(out_file(cfg, "simulate_report.json"), j.dump(2) + "\n");
  std::cout << "wrote " << corpus.size() << " texts to " << path << " (" << forced
            << " forced terminations)\n";
  return 0;
}

int cmd_train_ngram(const RunConfig& cfg) {
  ensure_out(cfg);
  const WorldModel model = require_model(cfg);
  if (cfg.corpus_path.empty()) fail(ErrorCode::invalid_argument, "a corpus path is required");
  const auto corpus = load_corpus(model, cfg.corpus_path);
  std::vector<std::string> vocab;
  for (const auto& s : model.lexicon) vocab.push_back(s.surface);
  const SentenceNgram ng = fit_ngram(corpus, vocab, cfg.order, cfg.smoothing_lambda);
  const std::string path = cfg.ngram_path.empty() ? out_file(cfg, "ngram.json") : cfg.ngram_path;
  ng.save(path);
  std::cout << "fitted order-" << cfg.order << " sentence n-gram on " << corpus.size()
            << " texts -> " << path << "\n";
  return 0;
}

int cmd_gen(const RunConfig& cfg) {
  ensure_out(cfg);
  std::vector<std::string> phenomena;
  if (cfg.phenomenon.empty() || cfg.phenomenon == "all") {
    phenomena = targeted_phenomena();
  } else {
    phenomena.push_back(cfg.phenomenon);
  }
  ordered_json counts = ordered_json::object();
  for (const std::string& ph : phenomena) {
    std::vector<EntailmentInstance> instances;
    if (ph == "distractors") {
      const Wordlists lists = Wordlists::load(cfg.wordlists_dir);
      instances = gen_distractors(default_distractor_bases(lists), cfg.max_distractors, cfg.seed);
    } else if (ph == "world_model_pairs") {
      instances = lexicon_pair_instances(require_model(cfg));
    } else {
      const Wordlists lists = Wordlists::load(cfg.wordlists_dir);
      instances = gen_targeted(ph, lists, cfg.seed);
    }
    const std::string path = out_file(cfg, ph + ".jsonl");
    save_instances(instances, path);
    counts[ph] = instances.size();
    std::cout << ph << ": " << instances.size() << " instances -> " << path << "\n";
  }
  ordered_json j;
  j["config"] = ordered_json::parse(cfg.to_json());
  j["counts"] = counts;
  write_file(out_file(cfg, "gen_report.json"), j.dump(2) + "\n");
  return 0;
}

namespace {

std::unique_ptr<LogProbProvider> provider_from(const RunConfig& cfg, const WorldModel* model,
                                               const SpeakerSpec* spec) {
  return make_provider(cfg.provider, model, spec, cfg.ngram_path, cfg.cache_path, cfg.endpoint,
                       render_from(cfg), cfg.jobs > 0 ? std::max(cfg.jobs, 1) : 4);
}

}  // namespace

int cmd_score(const RunConfig& cfg) {
  ensure_out(cfg);
  RunConfig rc = cfg;
  rc.resolve_cache_path();
  if (rc.dataset_path.empty()) fail(ErrorCode::invalid_argument, "a dataset path is required");
  const auto instances = load_instances(rc.dataset_path);
  if (instances.empty()) fail(ErrorCode::invalid_argument, "dataset is empty");
  if (rc.test != "original" && rc.test != "flipped" && rc.test != "repeated" && rc.test != "pause")
    fail(ErrorCode::invalid_argument, "unknown test variant: " + rc.test);
  const int n = (rc.test == "repeated" || rc.test == "pause") ? rc.n_reps : 1;
  if (n < 1) fail(ErrorCode::invalid_argument, "n_reps must be >= 1");

  std::optional<WorldModel> model;
  std::optional<SpeakerSpec> spec;
  if (rc.provider == "exact") {
    model = require_model(rc);
    spec = speaker_from(rc, *model);
  }
  auto provider = provider_from(rc, model ? &*model : nullptr, spec ? &*spec : nullptr);
  const RenderConfig render = render_from(rc);

  // Four sequences per instance, flattened so remote backends batch well.
  std::vector<SeqRequest> requests;
  requests.reserve(instances.size() * 4);
  for (const auto& inst : instances) {
    if (rc.test == "pause") {
      auto paused = [&](const std::string& a, const std::string& b, bool term) {
        SeqRequest r;
        r.units = b.empty() ? std::vector<std::string>{a} : std::vector<std::string>{a, b};
        r.terminated = term;
        r.rendered_override = pause_token_transform(a, b, n, render);
        return r;
      };
      requests.push_back(paused(inst.premise, inst.hypothesis, false));
      requests.push_back(paused(inst.premise, "", true));
      requests.push_back(paused(inst.hypothesis, inst.hypothesis, false));
      requests.push_back(paused(inst.hypothesis, "", true));
    } else {
      std::vector<std::string> xs(static_cast<std::size_t>(n), inst.premise);
      std::vector<std::string> ys1(static_cast<std::size_t>(n + 1), inst.hypothesis);
      std::vector<std::string> ysn(static_cast<std::size_t>(n), inst.hypothesis);
      SeqRequest xy;
      xy.units = xs;
      xy.units.push_back(inst.hypothesis);
      requests.push_back(xy);
      requests.push_back(SeqRequest::of(xs, true));
      requests.push_back(SeqRequest::of(ys1, false));
      requests.push_back(SeqRequest::of(ysn, true));
    }
  }
  const std::vector<double> lps = provider->logprob_batch(requests);

  const std::string path = rc.scores_path.empty() ? out_file(rc, "scores.jsonl") : rc.scores_path;
  std::ofstream f(path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open for writing: " + path);
  const std::string config_echo = rc.to_json();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const double lp_xy = lps[4 * i], lp_xeot = lps[4 * i + 1], lp_yy = lps[4 * i + 2],
                 lp_yeot = lps[4 * i + 3];
    if (std::isinf(lp_xy) || std::isinf(lp_xeot) || std::isinf(lp_yy) || std::isinf(lp_yeot))
      fail(ErrorCode::degenerate_probability,
           "a co-occurrence feature has probability zero for instance " + std::to_string(i));
    ordered_json j = ordered_json::parse(instance_to_json_line(instances[i]));
    ordered_json feats;
    feats["lp_xy"] = lp_xy;
    feats["lp_xeot"] = lp_xeot;
    feats["lp_yy"] = lp_yy;
    feats["lp_yeot"] = lp_yeot;
    j["features"] = std::move(feats);
    j["score"] = lp_xy - lp_xeot - lp_yy + lp_yeot;
    j["test"] = rc.test;
    j["n_repetitions"] = n;
    j["provider"] = provider->backend_id();
    j["render"] = ordered_json::parse(render.to_json());
    f << j.dump() << "\n";
  }
  std::cout << "scored " << instances.size() << " instances -> " << path << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  ensure_out(cfg);
  if (cfg.scores_path.empty()) fail(ErrorCode::invalid_argument, "a scores path is required");
  std::ifstream f(cfg.scores_path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + cfg.scores_path);

  std::vector<EntailmentInstance> instances;
  std::vector<double> raw_scores;
  std::string variant = cfg.test;
  int n_reps = 1;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::parse, "scores line " + std::to_string(line_no) + ": " + e.what());
    }
    EntailmentInstance inst;
    inst.premise = j.at("premise").get<std::string>();
    inst.hypothesis = j.at("hypothesis").get<std::string>();
    inst.label = label_from_name(j.at("label").get<std::string>());
    inst.phenomenon = j.value("phenomenon", std::string());
    instances.push_back(std::move(inst));
    raw_scores.push_back(j.at("score").get<double>());
    variant = j.value("test", variant);
    n_reps = j.value("n_repetitions", n_reps);
  }
  if (instances.empty()) fail(ErrorCode::invalid_argument, "no scored instances");

  std::vector<int> labels;
  for (const auto& inst : instances) labels.push_back(inst.label == Label::entailment ? 1 : 0);

  // Theory-direction tests classify by closeness to zero; the flipped
  // variant ranks by the deviation itself.
  std::vector<double> rank(raw_scores.size());
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    const double d = std::abs(raw_scores[i]);
    rank[i] = (variant == "flipped") ? d : -d;
  }

  EvalReport report;
  report.test_variant = variant;
  report.n_repetitions = n_reps;
  auto [auc, points] = roc_curve(rank, labels);
  report.auc = auc;
  report.flipped_auc = flipped_roc_auc(rank, labels);
  report.roc_points = std::move(points);
  for (int l : labels) (l == 1 ? report.n_pos : report.n_neg) += 1;
  const LengthBaseline baseline = length_baseline(instances);
  report.baseline_flipped_auc = baseline.best_flipped_auc;
  report.baseline_which = baseline.which;
  report.coefficients = variant == "flipped" ? TestCoefficients::flipped()
                                             : TestCoefficients::theoretical();
  report.config_echo_json = cfg.to_json();

  write_file(out_file(cfg, "report.json"), eval_report_to_json(report));
  write_roc_csv(out_file(cfg, "roc.csv"), report.roc_points);
  write_roc_svg(out_file(cfg, "roc.svg"), report.roc_points,
                "ROC (" + variant + " test), AUC = " + std::to_string(report.auc));
  write_histogram_csv(out_file(cfg, "score_hist.csv"), raw_scores, labels);
  write_histogram_svg(out_file(cfg, "score_hist.svg"), raw_scores, labels,
                      "Co-occurrence test score by class");
  std::cout << "auc " << report.auc << " flipped_auc " << report.flipped_auc << " baseline "
            << report.baseline_flipped_auc << " (" << report.baseline_which << ") on "
            << instances.size() << " instances\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  ensure_out(cfg);
  if (cfg.scores_path.empty()) fail(ErrorCode::invalid_argument, "a scores path is required");
  std::ifstream f(cfg.scores_path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + cfg.scores_path);
  std::vector<std::array<double, 4>> features;
  std::vector<int> labels;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const ordered_json j = ordered_json::parse(line);
    const auto& feats = j.at("features");
    features.push_back({feats.at("lp_xy").get<double>(), feats.at("lp_xeot").get<double>(),
                        feats.at("lp_yy").get<double>(), feats.at("lp_yeot").get<double>()});
    labels.push_back(label_from_name(j.at("label").get<std::string>()) == Label::entailment ? 1
                                                                                            : 0);
  }
  const LearnedTest fit = fit_learned_test(features, labels, cfg.l2, cfg.seed,
                                           cfg.holdout_fraction, cfg.no_holdout);
  ordered_json j;
  j["config"] = ordered_json::parse(cfg.to_json());
  j["weights"] = fit.coefficients.weights;
  j["bias"] = fit.coefficients.bias;
  j["provenance"] = fit.coefficients.provenance;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["grad_norm"] = fit.grad_norm;
  j["no_holdout"] = fit.no_holdout;
  j["holdout_auc"] = fit.holdout.auc;
  j["holdout_flipped_auc"] = fit.holdout.flipped_auc;
  j["theoretical_auc"] = fit.theoretical_auc;
  j["n_pos"] = fit.holdout.n_pos;
  j["n_neg"] = fit.holdout.n_neg;
  if (!fit.converged) j["warning"] = "did not reach the gradient tolerance before the iteration cap";
  write_file(out_file(cfg, "learned_test.json"), j.dump(2) + "\n");
  std::cout << "learned weights [" << fit.coefficients.weights[0] << ", "
            << fit.coefficients.weights[1] << ", " << fit.coefficients.weights[2] << ", "
            << fit.coefficients.weights[3] << "] bias " << fit.coefficients.bias
            << " holdout auc " << fit.holdout.auc << "\n";
  return 0;
}

int cmd_bpb(const RunConfig& cfg) {
  ensure_out(cfg);
  RunConfig rc = cfg;
  rc.resolve_cache_path();
  if (rc.texts_path.empty()) fail(ErrorCode::invalid_argument, "a texts path is required");
  std::ifstream f(rc.texts_path);
  if (!f) fail(ErrorCode::invalid_argument, "cannot open: " + rc.texts_path);
  std::vector<std::string> texts;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) texts.push_back(line);
  if (texts.empty()) fail(ErrorCode::invalid_argument, "no texts to score");

  std::optional<WorldModel> model;
  std::optional<SpeakerSpec> spec;
  if (rc.provider == "exact") {
    model = require_model(rc);
    spec = speaker_from(rc, *model);
  }
  auto provider = provider_from(rc, model ? &*model : nullptr, spec ? &*spec : nullptr);
  std::vector<SeqRequest> requests;
  for (const auto& t : texts) requests.push_back(SeqRequest::of({t}, true));
  const auto lps = provider->logprob_batch(requests);
  std::vector<std::pair<std::string, double>> scored;
  for (std::size_t i = 0; i < texts.size(); ++i) scored.emplace_back(texts[i], lps[i]);
  const double bpb = bits_per_byte(scored);
  ordered_json j;
  j["config"] = ordered_json::parse(rc.to_json());
  j["n_texts"] = texts.size();
  j["bits_per_byte"] = bpb;
  write_file(out_file(rc, "bpb.json"), j.dump(2) + "\n");
  std::cout << "bits per byte: " << bpb << " over " << texts.size() << " texts\n";
  return 0;
}

int cmd_mock_server(const RunConfig& cfg) {
  MockScoreServer server;
  const int port = server.start(cfg.port);
  std::cout << "{\"port\": " << port << ", \"model_id\": \"" << MockCharUnigram::model_id()
            << "\"}" << std::endl;
  // Serve until the process is interrupted.
  while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
  return 0;
}

}  // namespace pel
