#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "polebench/esn.hpp"
#include "polebench/rnn.hpp"
#include "polebench/signal.hpp"

namespace polebench::experiments {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes the CLI maps recovery/config failures onto.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitZeroLeadingSample = 3;
inline constexpr int kExitRankDeficient = 4;
int exit_code_for(const std::exception& err);

enum class Modulation { Bpsk, Qpsk };

/// Synthetic linear-ISI channel: FIR taps plus additive circular complex
/// Gaussian noise at the given SNR (signal power taken as sum |tap|^2 for
/// unit-power constellations).
struct ChannelSpec {
  std::vector<Complex> taps = {Complex(1.0, 0.0), Complex(0.6, 0.0), Complex(0.3, 0.0)};
  double snr_db = 15.0;
  Modulation modulation = Modulation::Bpsk;
  int n_train_symbols = 200;
  int n_test_symbols = 2000;
  unsigned seed = 0;
};

struct ExperimentConfig {
  std::string out_dir = "out";
  std::vector<unsigned> seeds = {1, 2, 3, 4, 5};

  // models
  int n_hidden = 32;
  double spectral_radius = 0.9;
  double input_scale = 1.0;
  double ridge = 1e-8;
  std::vector<Complex> configured_poles;  // empty: use the channel zeros
  std::vector<std::string> models = {"trainable", "esn_random", "esn_configured"};

  rnn::TrainConfig train{/*epochs=*/500, /*learning_rate=*/0.05};

  ChannelSpec channel;

  // landscape
  double landscape_c = 0.75;
  double landscape_d = 0.8;
  double grid_min = 0.0;
  double grid_max = 0.95;
  double grid_step = 0.01;

  // spectral density
  std::vector<int> log_epochs;  // empty: 0, mid, final
  int hist_bins = 40;
  double hist_max = 1.25;

  // recover
  std::string recover_input;
  int recover_order = 0;
  bool brute_check = false;

  int max_threads = 0;  // 0: POLEBENCH_THREADS, else hardware concurrency
};

/// Flat-JSON config document; unknown keys are rejected so typos surface.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Roots of the tap polynomial c_0 z^{L-1} + ... + c_{L-1} — the channel
/// zeros, i.e. the poles of the inverse (equalizer) model.
std::vector<Complex> channel_zeros(const std::vector<Complex>& taps);

/// Symbol stream pushed through the channel, in split-complex layout:
/// inputs/targets are 2 x (n_train + n_test) with rows [Re; Im]. Training
/// occupies the first n_train columns.
struct SymbolDataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  int n_train = 0;
  Modulation modulation = Modulation::Bpsk;
};

SymbolDataset make_symbol_dataset(const ChannelSpec& spec, unsigned seed);

/// Fraction of wrong hard decisions (sign for BPSK, per-quadrant for QPSK)
/// over the given output/target columns.
double bit_error_rate(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets,
                      Modulation modulation);

/// One training-dynamics replication: the trainable RNN trace plus the ESN
/// baselines' one-shot losses, all on the same per-seed dataset and (for the
/// random pair) the same initial reservoir.
struct DynamicsRun {
  rnn::TrainResult trainable;
  rnn::ReservoirModel esn_random;
  rnn::ReservoirModel esn_configured;
  double esn_random_loss = 0.0;
  double esn_configured_loss = 0.0;
  double esn_random_cond = 0.0;
  double esn_configured_cond = 0.0;
};

DynamicsRun run_dynamics_single_seed(const ExperimentConfig& config, unsigned seed);

/// Per-model symbol-detection outcome for one seed.
struct BerResult {
  std::string model;
  unsigned seed = 0;
  double ber = 0.0;
  double train_seconds = 0.0;
  int symbols_trained = 0;
};

std::vector<BerResult> run_detection_single_seed(const ExperimentConfig& config, unsigned seed);

// Experiment entry points; each writes CSV artifacts plus a metadata JSON
// into config.out_dir and throws on failure.
void run_landscape(const ExperimentConfig& config);
void run_training_dynamics(const ExperimentConfig& config);
void run_spectral_density(const ExperimentConfig& config);
void run_symbol_detection(const ExperimentConfig& config);
void run_recover(const ExperimentConfig& config);
void run_fixtures(const ExperimentConfig& config);

/// Worker cap: explicit override, else POLEBENCH_THREADS, else hardware
/// concurrency.
int worker_count(int requested);

/// Runs fn(0..n-1) across at most max_threads workers. Exceptions are
/// re-thrown on the caller thread after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int max_threads);

}  // namespace polebench::experiments
