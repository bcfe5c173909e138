// pel: a laboratory for entailment signals in sentence co-occurrence
// probabilities. Subcommands cover exact speaker simulation, n-gram
// estimation, dataset generation, scoring, evaluation, and verification.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <string>

#include "pel/cli.hpp"
#include "pel/errors.hpp"

namespace {

void add_common_flags(CLI::App* app, pel::RunConfig& cfg) {
  app->add_option("--config", cfg.config_path, "JSON config file; flags override its values");
  app->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
  app->add_option("--jobs", cfg.jobs, "internal parallelism cap")->capture_default_str();
  app->add_option("--provider", cfg.provider, "exact|ngram|cache|http")->capture_default_str();
  app->add_option("--endpoint", cfg.endpoint, "scoring service URL (http provider)");
  app->add_option("--test", cfg.test, "original|flipped|repeated|pause")->capture_default_str();
  app->add_option("--n-reps", cfg.n_reps, "repetitions for repeated/pause tests")
      ->capture_default_str();
  app->add_option("--out", cfg.out, "output directory")->capture_default_str();
  app->add_option("--tolerance", cfg.tolerance, "verification tolerance")->capture_default_str();
  app->add_option("--phenomenon", cfg.phenomenon, "targeted phenomenon (or 'all')");
  app->add_flag("--no-holdout", cfg.no_holdout, "fit the learned test on all data");

  app->add_option("--model", cfg.model_path, "world model JSON");
  app->add_option("--speaker", cfg.speaker, "gricean|noise_tolerant|explanatory")
      ->capture_default_str();
  app->add_option("--noise-eps", cfg.noise_eps, "uniform miss probability for noise_tolerant")
      ->capture_default_str();
  app->add_option("--contextual-costs", cfg.contextual_cost_path,
                  "contextual cost table JSON (explanatory)");
  app->add_option("--corpus", cfg.corpus_path, "corpus JSONL path");
  app->add_option("--ngram", cfg.ngram_path, "n-gram model JSON path");
  app->add_option("--dataset", cfg.dataset_path, "entailment instances JSONL");
  app->add_option("--scores", cfg.scores_path, "scored instances JSONL");
  app->add_option("--texts", cfg.texts_path, "plain text file, one text per line");
  app->add_option("--wordlists", cfg.wordlists_dir, "wordlists directory")
      ->capture_default_str();
  app->add_option("--cache", cfg.cache_path, "score cache JSONL (PEL_CACHE_DIR overrides)");
  app->add_option("--order", cfg.order, "n-gram order")->capture_default_str();
  app->add_option("--lambda", cfg.smoothing_lambda, "add-lambda smoothing")
      ->capture_default_str();
  app->add_option("--n-texts", cfg.n_texts, "corpus size to sample")->capture_default_str();
  app->add_option("--max-len", cfg.max_len, "sentence cap per sampled text")
      ->capture_default_str();
  app->add_option("--l2", cfg.l2, "learned-test ridge strength")->capture_default_str();
  app->add_option("--holdout-fraction", cfg.holdout_fraction, "holdout fraction")
      ->capture_default_str();
  app->add_option("--max-distractors", cfg.max_distractors, "distractor premise sizes 0..k")
      ->capture_default_str();
  app->add_option("--n-models", cfg.n_models, "verification sweep size")->capture_default_str();
  app->add_option("--port", cfg.port, "mock server port (0 picks a free port)")
      ->capture_default_str();
  app->add_option("--separator", cfg.separator, "sentence separator for rendering")
      ->capture_default_str();
  app->add_option("--eot-realization", cfg.eot_realization, "eos_token|literal_marker")
      ->capture_default_str();
  app->add_option("--literal-marker", cfg.literal_marker, "end-of-text marker text")
      ->capture_default_str();
  app->add_option("--whitespace-group", cfg.whitespace_group_size,
                  "spaces per pause token")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  pel::RunConfig cfg;

  // A config file seeds the defaults; command-line flags win.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        cfg.apply_json_file(argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "{\"error\": {\"code\": \"config\", \"message\": \"" << e.what()
                  << "\"}}\n";
        return 1;
      }
    }
  }

  CLI::App app{"entailment signals from sentence co-occurrence probabilities"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const pel::RunConfig&);
  };
  const Cmd commands[] = {
      {"verify", "numeric verification sweeps for the exact-speaker identities", pel::cmd_verify},
      {"simulate", "sample a corpus from an exact speaker", pel::cmd_simulate},
      {"train-ngram", "fit a sentence n-gram on a corpus", pel::cmd_train_ngram},
      {"gen", "generate targeted/distractor/world-model datasets", pel::cmd_gen},
      {"score", "score a dataset's co-occurrence sequences", pel::cmd_score},
      {"eval", "evaluate scored instances (ROC-AUC, baselines, plots)", pel::cmd_eval},
      {"fit", "fit the learned linear test on scored instances", pel::cmd_fit},
      {"bpb", "bits per byte of a text file under a provider", pel::cmd_bpb},
      {"mock-server", "run the bundled deterministic scoring service", pel::cmd_mock_server},
  };
  for (const Cmd& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common_flags(sub, cfg);
    sub->callback([&cfg, &c] {
      const int rc = c.run(cfg);
      if (rc != 0) std::exit(rc);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const pel::Error& e) {
    nlohmann::ordered_json j;
    j["error"] = {{"code", pel::Error::code_name(e.code())}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::ordered_json j;
    j["error"] = {{"code", "internal"}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 1;
  }
  return 0;
}
