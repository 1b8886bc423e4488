#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polebench/experiments.hpp"

namespace exp = polebench::experiments;
using nlohmann::json;

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::vector<unsigned> seeds;
  int epochs = 0;
  double learning_rate = 0.0;
  std::string optimizer;
  double clip_norm = -1.0;
  int n_hidden = 0;
  double spectral_radius = 0.0;
  double input_scale = 0.0;
  double snr_db = 0.0;
  std::string modulation;
  int n_train = 0;
  int n_test = 0;
  double landscape_c = 0.0;
  double landscape_d = 0.0;
  std::string recover_input;
  int order = 0;
  bool brute_check = false;
  int threads = 0;
};

// Every flag is optional; a flag that was actually passed overrides the
// matching config key.
void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "flat JSON config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seeds, "replication seed (repeatable)");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--learning-rate", o.learning_rate, "gradient step size");
  cmd->add_option("--optimizer", o.optimizer, "gd | momentum | adam");
  cmd->add_option("--clip-norm", o.clip_norm, "global gradient clip; 0 disables");
  cmd->add_option("--n-hidden", o.n_hidden, "hidden units");
  cmd->add_option("--spectral-radius", o.spectral_radius, "reservoir spectral radius");
  cmd->add_option("--input-scale", o.input_scale, "input weight scale");
  cmd->add_option("--snr-db", o.snr_db, "channel SNR in dB");
  cmd->add_option("--modulation", o.modulation, "BPSK | QPSK");
  cmd->add_option("--n-train", o.n_train, "training (pilot) symbols");
  cmd->add_option("--n-test", o.n_test, "test symbols");
  cmd->add_option("--c", o.landscape_c, "two-pole truth c");
  cmd->add_option("--d", o.landscape_d, "two-pole truth d");
  cmd->add_option("--threads", o.threads, "worker cap (also POLEBENCH_THREADS)");
}

exp::ExperimentConfig build_config(const CLI::App* cmd, const CliOverrides& o) {
  json doc = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::invalid_argument("cannot open config file: " + o.config_path);
    doc = json::parse(in);
  }
  const auto passed = [&](const char* flag) { return cmd->count(flag) > 0; };
  if (passed("--out")) doc["out_dir"] = o.out_dir;
  if (passed("--seed")) doc["seeds"] = o.seeds;
  if (passed("--epochs")) doc["epochs"] = o.epochs;
  if (passed("--learning-rate")) doc["learning_rate"] = o.learning_rate;
  if (passed("--optimizer")) doc["optimizer"] = o.optimizer;
  if (passed("--clip-norm")) doc["clip_norm"] = o.clip_norm;
  if (passed("--n-hidden")) doc["n_hidden"] = o.n_hidden;
  if (passed("--spectral-radius")) doc["spectral_radius"] = o.spectral_radius;
  if (passed("--input-scale")) doc["input_scale"] = o.input_scale;
  if (passed("--snr-db")) doc["snr_db"] = o.snr_db;
  if (passed("--modulation")) doc["modulation"] = o.modulation;
  if (passed("--n-train")) doc["n_train_symbols"] = o.n_train;
  if (passed("--n-test")) doc["n_test_symbols"] = o.n_test;
  if (passed("--c")) doc["landscape_c"] = o.landscape_c;
  if (passed("--d")) doc["landscape_d"] = o.landscape_d;
  if (passed("--threads")) doc["max_threads"] = o.threads;
  if (cmd->count("--input") > 0) doc["recover_input"] = o.recover_input;
  if (cmd->count("--order") > 0) doc["recover_order"] = o.order;
  if (cmd->count("--brute-check") > 0) doc["brute_check"] = o.brute_check;
  return exp::config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polebench: pole-learning conditioning experiments for linear RNNs"};
  app.require_subcommand(1);

  CliOverrides o;
  auto* landscape = app.add_subcommand("landscape", "two-pole loss surface and Hessian report");
  auto* dynamics =
      app.add_subcommand("training-dynamics", "BPTT training traces vs one-shot ESN baselines");
  auto* spectral =
      app.add_subcommand("spectral-density", "eigenvalue-magnitude densities over epochs");
  auto* detection =
      app.add_subcommand("symbol-detection", "BER comparison on the synthetic ISI channel");
  auto* recover = app.add_subcommand("recover", "recover gain/pole parameters from an I/O pair");
  auto* fixtures = app.add_subcommand("fixtures", "emit deterministic test fixtures");
  for (CLI::App* cmd : {landscape, dynamics, spectral, detection, recover, fixtures}) {
    add_common_options(cmd, o);
  }
  recover->add_option("--input", o.recover_input, "I/O pair JSON file")
      ->check(CLI::ExistingFile);
  recover->add_option("--order", o.order, "model order K");
  recover->add_flag("--brute-check", o.brute_check, "also run the grid-search oracle");
  // --input/--order/--brute-check only exist on `recover`; give build_config a
  // uniform way to probe them elsewhere.
  for (CLI::App* cmd : {landscape, dynamics, spectral, detection, fixtures}) {
    cmd->add_option("--input", o.recover_input)->group("");
    cmd->add_option("--order", o.order)->group("");
    cmd->add_flag("--brute-check", o.brute_check)->group("");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const exp::ExperimentConfig config = build_config(cmd, o);
    if (cmd == landscape) {
      exp::run_landscape(config);
    } else if (cmd == dynamics) {
      exp::run_training_dynamics(config);
    } else if (cmd == spectral) {
      exp::run_spectral_density(config);
    } else if (cmd == detection) {
      exp::run_symbol_detection(config);
    } else if (cmd == recover) {
      exp::run_recover(config);
    } else {
      exp::run_fixtures(config);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exp::exit_code_for(err);
  }
  return 0;
}
