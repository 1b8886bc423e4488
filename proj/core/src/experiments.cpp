#include "polebench/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "polebench/landscape.hpp"
#include "polebench/recovery.hpp"

namespace polebench::experiments {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << content;
  if (!out) throw Error("failed writing output file: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

fs::path prepare_out_dir(const ExperimentConfig& config) {
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

json complex_list_to_json(const std::vector<Complex>& values) {
  json out = json::array();
  for (const auto& z : values) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

std::vector<Complex> complex_list_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw std::invalid_argument(std::string(key) + ": expected an array");
  std::vector<Complex> out;
  for (const auto& item : j) {
    if (item.is_number()) {
      out.emplace_back(item.get<double>(), 0.0);
    } else if (item.is_array() && item.size() == 2) {
      out.emplace_back(item[0].get<double>(), item[1].get<double>());
    } else {
      throw std::invalid_argument(std::string(key) + ": entries must be numbers or [re, im]");
    }
  }
  return out;
}

std::string optimizer_name(rnn::OptimizerKind kind) {
  switch (kind) {
    case rnn::OptimizerKind::Gd: return "gd";
    case rnn::OptimizerKind::GdMomentum: return "momentum";
    case rnn::OptimizerKind::Adam: return "adam";
  }
  return "gd";
}

rnn::OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "gd") return rnn::OptimizerKind::Gd;
  if (name == "momentum") return rnn::OptimizerKind::GdMomentum;
  if (name == "adam") return rnn::OptimizerKind::Adam;
  throw std::invalid_argument("optimizer: expected one of gd, momentum, adam");
}

std::string modulation_name(Modulation m) { return m == Modulation::Bpsk ? "BPSK" : "QPSK"; }

Modulation modulation_from_name(const std::string& name) {
  if (name == "BPSK") return Modulation::Bpsk;
  if (name == "QPSK") return Modulation::Qpsk;
  throw std::invalid_argument("modulation: expected BPSK or QPSK");
}

void validate_channel(const ChannelSpec& channel) {
  if (channel.taps.empty() || channel.taps[0] == Complex(0.0, 0.0)) {
    throw std::invalid_argument("channel taps: need taps[0] != 0");
  }
  if (channel.n_train_symbols < 1 || channel.n_test_symbols < 1) {
    throw std::invalid_argument("channel: symbol counts must be >= 1");
  }
}

esn::ReservoirSpec random_spec(const ExperimentConfig& config, unsigned seed) {
  esn::ReservoirSpec spec;
  spec.kind = esn::ReservoirKind::Random;
  spec.n_hidden = config.n_hidden;
  spec.n_in = 2;
  spec.n_out = 2;
  spec.spectral_radius = config.spectral_radius;
  spec.input_scale = config.input_scale;
  spec.seed = seed;
  return spec;
}

esn::ReservoirSpec configured_spec(const ExperimentConfig& config, unsigned seed) {
  esn::ReservoirSpec spec = random_spec(config, seed);
  spec.kind = esn::ReservoirKind::Configured;
  spec.poles = config.configured_poles.empty() ? channel_zeros(config.channel.taps)
                                               : config.configured_poles;
  if (spec.poles.empty()) {
    throw std::invalid_argument(
        "configured reservoir: single-tap channel has no zeros; set configured_poles");
  }
  return spec;
}

json metadata_json(const char* experiment, const ExperimentConfig& config,
                   const json& timing = json::object()) {
  return {{"experiment", experiment},
          {"version", kVersion},
          {"config", config_to_json(config)},
          {"seeds", config.seeds},
          {"timing", timing}};
}

double now_seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<int> resolve_log_epochs(const ExperimentConfig& config, std::size_t traced) {
  std::vector<int> epochs = config.log_epochs;
  if (epochs.empty() && traced > 0) {
    epochs = {0, static_cast<int>(traced / 2), static_cast<int>(traced - 1)};
  }
  std::set<int> unique;
  for (int e : epochs) {
    if (e >= 0 && static_cast<std::size_t>(e) < traced) unique.insert(e);
  }
  return {unique.begin(), unique.end()};
}

void append_histogram_rows(std::ostringstream& csv, const std::string& model, int epoch,
                           const std::vector<double>& mags, int bins, double hist_max) {
  const double width = hist_max / bins;
  std::vector<int> counts(bins, 0);
  for (double m : mags) {
    int bin = static_cast<int>(m / width);
    if (bin >= bins) bin = bins - 1;  // spill beyond hist_max lands in the top bin
    if (bin < 0) bin = 0;
    counts[bin] += 1;
  }
  const double denom = static_cast<double>(mags.size()) * width;
  for (int b = 0; b < bins; ++b) {
    csv << model << ',' << epoch << ',' << format_double(b * width) << ','
        << format_double((b + 1) * width) << ',' << format_double(counts[b] / denom) << '\n';
  }
}

double stddev(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / values.size());
}

bool wants_model(const ExperimentConfig& config, const std::string& name) {
  for (const auto& m : config.models) {
    if (m == name) return true;
  }
  return false;
}

}  // namespace

int exit_code_for(const std::exception& err) {
  if (dynamic_cast<const ZeroLeadingSample*>(&err)) return kExitZeroLeadingSample;
  if (dynamic_cast<const RankDeficient*>(&err)) return kExitRankDeficient;
  if (dynamic_cast<const std::invalid_argument*>(&err)) return kExitConfigError;
  if (dynamic_cast<const json::exception*>(&err)) return kExitConfigError;
  return kExitFailure;
}

ExperimentConfig config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "experiment",    "out_dir",      "seeds",          "n_hidden",
      "spectral_radius", "input_scale", "ridge",         "configured_poles",
      "models",        "epochs",       "learning_rate",  "optimizer",
      "clip_norm",     "momentum",     "adam_beta1",     "adam_beta2",
      "adam_epsilon",  "train_w_in",   "train_w_rec",    "train_w_out",
      "channel_taps",  "snr_db",       "modulation",     "n_train_symbols",
      "n_test_symbols", "channel_seed", "landscape_c",   "landscape_d",
      "grid_min",      "grid_max",     "grid_step",      "log_epochs",
      "hist_bins",     "hist_max",     "recover_input",  "recover_order",
      "brute_check",   "max_threads"};
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.contains(key)) throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }

  ExperimentConfig config;
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
  };
  get("out_dir", config.out_dir);
  get("seeds", config.seeds);
  get("n_hidden", config.n_hidden);
  get("spectral_radius", config.spectral_radius);
  get("input_scale", config.input_scale);
  get("ridge", config.ridge);
  if (j.contains("configured_poles")) {
    config.configured_poles = complex_list_from_json(j.at("configured_poles"), "configured_poles");
  }
  get("models", config.models);
  get("epochs", config.train.epochs);
  get("learning_rate", config.train.learning_rate);
  if (j.contains("optimizer")) {
    config.train.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
  }
  get("clip_norm", config.train.clip_norm);
  get("momentum", config.train.momentum);
  get("adam_beta1", config.train.adam_beta1);
  get("adam_beta2", config.train.adam_beta2);
  get("adam_epsilon", config.train.adam_epsilon);
  get("train_w_in", config.train.train_w_in);
  get("train_w_rec", config.train.train_w_rec);
  get("train_w_out", config.train.train_w_out);
  if (j.contains("channel_taps")) {
    config.channel.taps = complex_list_from_json(j.at("channel_taps"), "channel_taps");
  }
  get("snr_db", config.channel.snr_db);
  if (j.contains("modulation")) {
    config.channel.modulation = modulation_from_name(j.at("modulation").get<std::string>());
  }
  get("n_train_symbols", config.channel.n_train_symbols);
  get("n_test_symbols", config.channel.n_test_symbols);
  get("channel_seed", config.channel.seed);
  get("landscape_c", config.landscape_c);
  get("landscape_d", config.landscape_d);
  get("grid_min", config.grid_min);
  get("grid_max", config.grid_max);
  get("grid_step", config.grid_step);
  get("log_epochs", config.log_epochs);
  get("hist_bins", config.hist_bins);
  get("hist_max", config.hist_max);
  get("recover_input", config.recover_input);
  get("recover_order", config.recover_order);
  get("brute_check", config.brute_check);
  get("max_threads", config.max_threads);

  if (config.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  validate_channel(config.channel);
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  return {{"out_dir", config.out_dir},
          {"seeds", config.seeds},
          {"n_hidden", config.n_hidden},
          {"spectral_radius", config.spectral_radius},
          {"input_scale", config.input_scale},
          {"ridge", config.ridge},
          {"configured_poles", complex_list_to_json(config.configured_poles)},
          {"models", config.models},
          {"epochs", config.train.epochs},
          {"learning_rate", config.train.learning_rate},
          {"optimizer", optimizer_name(config.train.optimizer)},
          {"clip_norm", config.train.clip_norm},
          {"momentum", config.train.momentum},
          {"adam_beta1", config.train.adam_beta1},
          {"adam_beta2", config.train.adam_beta2},
          {"adam_epsilon", config.train.adam_epsilon},
          {"train_w_in", config.train.train_w_in},
          {"train_w_rec", config.train.train_w_rec},
          {"train_w_out", config.train.train_w_out},
          {"channel_taps", complex_list_to_json(config.channel.taps)},
          {"snr_db", config.channel.snr_db},
          {"modulation", modulation_name(config.channel.modulation)},
          {"n_train_symbols", config.channel.n_train_symbols},
          {"n_test_symbols", config.channel.n_test_symbols},
          {"channel_seed", config.channel.seed},
          {"landscape_c", config.landscape_c},
          {"landscape_d", config.landscape_d},
          {"grid_min", config.grid_min},
          {"grid_max", config.grid_max},
          {"grid_step", config.grid_step},
          {"log_epochs", config.log_epochs},
          {"hist_bins", config.hist_bins},
          {"hist_max", config.hist_max},
          {"recover_input", config.recover_input},
          {"recover_order", config.recover_order},
          {"brute_check", config.brute_check},
          {"max_threads", config.max_threads}};
}

std::vector<Complex> channel_zeros(const std::vector<Complex>& taps) {
  if (taps.empty() || taps[0] == Complex(0.0, 0.0)) {
    throw std::invalid_argument("channel_zeros: need taps[0] != 0");
  }
  const std::size_t degree = taps.size() - 1;
  if (degree == 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (std::size_t i = 0; i + 1 < degree; ++i) companion(i + 1, i) = 1.0;
  for (std::size_t i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -taps[degree - i] / taps[0];
  }
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(companion,
                                                        /*computeEigenvectors=*/false);
  return {eig.eigenvalues().data(), eig.eigenvalues().data() + degree};
}

SymbolDataset make_symbol_dataset(const ChannelSpec& spec, unsigned seed) {
  validate_channel(spec);
  const int n = spec.n_train_symbols + spec.n_test_symbols;

  std::seed_seq sym_seq{spec.seed, seed, 1u};
  std::seed_seq noise_seq{spec.seed, seed, 2u};
  std::mt19937 rng_sym(sym_seq);
  std::mt19937 rng_noise(noise_seq);
  std::bernoulli_distribution coin(0.5);

  std::vector<Complex> symbols(n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int t = 0; t < n; ++t) {
    if (spec.modulation == Modulation::Bpsk) {
      symbols[t] = Complex(coin(rng_sym) ? 1.0 : -1.0, 0.0);
    } else {
      symbols[t] = Complex(coin(rng_sym) ? inv_sqrt2 : -inv_sqrt2,
                           coin(rng_sym) ? inv_sqrt2 : -inv_sqrt2);
    }
  }

  double power = 0.0;
  for (const auto& tap : spec.taps) power += std::norm(tap);
  const double noise_var = power * std::pow(10.0, -spec.snr_db / 10.0);
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_var / 2.0));

  SymbolDataset data;
  data.n_train = spec.n_train_symbols;
  data.modulation = spec.modulation;
  data.inputs.resize(2, n);
  data.targets.resize(2, n);
  for (int t = 0; t < n; ++t) {
    Complex received(0.0, 0.0);
    for (std::size_t i = 0; i < spec.taps.size() && static_cast<int>(i) <= t; ++i) {
      received += spec.taps[i] * symbols[t - static_cast<int>(i)];
    }
    received += Complex(noise(rng_noise), noise(rng_noise));
    data.inputs(0, t) = received.real();
    data.inputs(1, t) = received.imag();
    data.targets(0, t) = symbols[t].real();
    data.targets(1, t) = symbols[t].imag();
  }
  return data;
}

double bit_error_rate(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets,
                      Modulation modulation) {
  if (outputs.cols() != targets.cols() || outputs.rows() < 1 || targets.rows() < 1) {
    throw std::invalid_argument("bit_error_rate: shape mismatch");
  }
  const int rows = modulation == Modulation::Bpsk ? 1 : 2;
  if (outputs.rows() < rows || targets.rows() < rows) {
    throw std::invalid_argument("bit_error_rate: need split-complex rows");
  }
  long errors = 0;
  for (Eigen::Index t = 0; t < outputs.cols(); ++t) {
    for (int r = 0; r < rows; ++r) {
      const bool decided = outputs(r, t) >= 0.0;
      const bool sent = targets(r, t) >= 0.0;
      if (decided != sent) ++errors;
    }
  }
  return static_cast<double>(errors) / (static_cast<double>(outputs.cols()) * rows);
}

DynamicsRun run_dynamics_single_seed(const ExperimentConfig& config, unsigned seed) {
  const SymbolDataset data = make_symbol_dataset(config.channel, seed);
  const Eigen::MatrixXd train_in = data.inputs.leftCols(data.n_train);
  const Eigen::MatrixXd train_tgt = data.targets.leftCols(data.n_train);

  DynamicsRun run;
  rnn::TrainConfig tc = config.train;
  tc.seed = seed;
  run.trainable = rnn::train(esn::init_random_reservoir(random_spec(config, seed)), train_in,
                             train_tgt, tc);

  run.esn_random = esn::init_random_reservoir(random_spec(config, seed));
  {
    const auto fwd = rnn::forward(run.esn_random, train_in);
    run.esn_random.w_out = esn::fit_readout(fwd.states, train_tgt, config.ridge);
    run.esn_random_loss = rnn::sequence_loss(run.esn_random.w_out * fwd.states, train_tgt);
    run.esn_random_cond = rnn::condition_number(run.esn_random.w_rec);
  }

  run.esn_configured = esn::init_configured_reservoir(configured_spec(config, seed));
  {
    const auto fwd = rnn::forward(run.esn_configured, train_in);
    run.esn_configured.w_out = esn::fit_readout(fwd.states, train_tgt, config.ridge);
    run.esn_configured_loss = rnn::sequence_loss(run.esn_configured.w_out * fwd.states, train_tgt);
    run.esn_configured_cond = rnn::condition_number(run.esn_configured.w_rec);
  }
  return run;
}

std::vector<BerResult> run_detection_single_seed(const ExperimentConfig& config, unsigned seed) {
  const SymbolDataset data = make_symbol_dataset(config.channel, seed);
  if (config.channel.n_train_symbols < config.n_hidden) {
    std::cerr << "warning: insufficient pilots (" << config.channel.n_train_symbols << " < "
              << config.n_hidden << " hidden units); continuing in the data-constrained regime\n";
  }
  const Eigen::MatrixXd train_in = data.inputs.leftCols(data.n_train);
  const Eigen::MatrixXd train_tgt = data.targets.leftCols(data.n_train);
  const Eigen::Index n_test = data.inputs.cols() - data.n_train;

  std::vector<BerResult> results;
  const auto evaluate = [&](const rnn::ReservoirModel& model) {
    const Eigen::MatrixXd outputs = esn::esn_predict(model, data.inputs);
    return bit_error_rate(outputs.rightCols(n_test), data.targets.rightCols(n_test),
                          data.modulation);
  };

  if (wants_model(config, "trainable")) {
    const auto start = std::chrono::steady_clock::now();
    rnn::TrainConfig tc = config.train;
    tc.seed = seed;
    const auto trained = rnn::train(esn::init_random_reservoir(random_spec(config, seed)),
                                    train_in, train_tgt, tc);
    const double seconds = now_seconds_since(start);
    results.push_back({"trainable", seed, evaluate(trained.model), seconds, data.n_train});
  }
  if (wants_model(config, "esn_random")) {
    const auto start = std::chrono::steady_clock::now();
    rnn::ReservoirModel model = esn::init_random_reservoir(random_spec(config, seed));
    const auto fwd = rnn::forward(model, train_in);
    model.w_out = esn::fit_readout(fwd.states, train_tgt, config.ridge);
    const double seconds = now_seconds_since(start);
    results.push_back({"esn_random", seed, evaluate(model), seconds, data.n_train});
  }
  if (wants_model(config, "esn_configured")) {
    const auto start = std::chrono::steady_clock::now();
    rnn::ReservoirModel model = esn::init_configured_reservoir(configured_spec(config, seed));
    const auto fwd = rnn::forward(model, train_in);
    model.w_out = esn::fit_readout(fwd.states, train_tgt, config.ridge);
    const double seconds = now_seconds_since(start);
    results.push_back({"esn_configured", seed, evaluate(model), seconds, data.n_train});
  }
  return results;
}

void run_landscape(const ExperimentConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  const auto obj = landscape::Objective::two_pole(config.landscape_c, config.landscape_d);
  const OrderedParams truth({{Complex(1.0, 0.0), Complex(config.landscape_c, 0.0)},
                             {Complex(1.0, 0.0), Complex(config.landscape_d, 0.0)}});
  landscape::SurfaceAxis ax{0, config.grid_min, config.grid_max, config.grid_step};
  landscape::SurfaceAxis ay{1, config.grid_min, config.grid_max, config.grid_step};
  const auto grid = landscape::surface_grid(obj, ax, ay, truth);

  std::ostringstream csv;
  landscape::write_surface_csv(grid, csv);
  write_text_file(dir / "surface.csv", csv.str());

  double min_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values.data()[i];
    if (std::isfinite(v)) min_value = std::min(min_value, v);
  }
  json minima = json::array();
  for (std::size_t iy = 0; iy < grid.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
      const double v = grid.values(iy, ix);
      if (std::isfinite(v) && v <= min_value + 1e-12) {
        minima.push_back({{"x", grid.xs[ix]}, {"y", grid.ys[iy]}, {"f", v}});
      }
    }
  }
  const auto hessian = landscape::two_pole_hessian(config.landscape_c, config.landscape_d);
  json summary{{"c", config.landscape_c},
               {"d", config.landscape_d},
               {"grid_min_value", min_value},
               {"minima", minima},
               {"hessian_at_truth", landscape::hessian_report_to_json(hessian)}};
  json optima = json::array();
  for (const auto& point : grid.optima) optima.push_back({point[0], point[1]});
  summary["known_optima"] = optima;
  write_json_file(dir / "landscape_summary.json", summary);
  write_json_file(dir / "metadata.json", metadata_json("landscape", config));
}

void run_training_dynamics(const ExperimentConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  std::vector<DynamicsRun> runs(config.seeds.size());
  std::vector<double> seconds(config.seeds.size(), 0.0);
  parallel_for(
      config.seeds.size(),
      [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        runs[i] = run_dynamics_single_seed(config, config.seeds[i]);
        seconds[i] = now_seconds_since(start);
      },
      worker_count(config.max_threads));

  json timing = json::object();
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    const unsigned seed = config.seeds[i];
    const DynamicsRun& run = runs[i];
    const std::string tag = "_seed" + std::to_string(seed);

    std::ostringstream trace_csv;
    rnn::write_trace_csv(run.trainable.trace, trace_csv);
    if (run.trainable.diverged) trace_csv << "# diverged\n";
    write_text_file(dir / ("trace_trainable" + tag + ".csv"), trace_csv.str());
    std::ostringstream eigen_csv;
    rnn::write_eigen_csv(run.trainable.trace, eigen_csv);
    write_text_file(dir / ("eigs_trainable" + tag + ".csv"), eigen_csv.str());

    const auto esn_trace = [](double loss, double cond, const rnn::ReservoirModel& model) {
      rnn::TrainingTrace trace;
      trace.epochs.push_back({loss, 0.0, cond, rnn::eigen_magnitudes(model.w_rec)});
      return trace;
    };
    std::ostringstream esn_r_csv;
    rnn::write_trace_csv(esn_trace(run.esn_random_loss, run.esn_random_cond, run.esn_random),
                         esn_r_csv);
    write_text_file(dir / ("trace_esn_random" + tag + ".csv"), esn_r_csv.str());
    std::ostringstream esn_c_csv;
    rnn::write_trace_csv(
        esn_trace(run.esn_configured_loss, run.esn_configured_cond, run.esn_configured),
        esn_c_csv);
    write_text_file(dir / ("trace_esn_configured" + tag + ".csv"), esn_c_csv.str());

    write_json_file(dir / ("model_trainable" + tag + ".json"),
                    rnn::model_to_json(run.trainable.model));
    write_json_file(dir / ("model_esn_random" + tag + ".json"),
                    rnn::model_to_json(run.esn_random));
    write_json_file(dir / ("model_esn_configured" + tag + ".json"),
                    rnn::model_to_json(run.esn_configured));

    timing["seed" + std::to_string(seed) + "_seconds"] = seconds[i];
  }
  write_json_file(dir / "metadata.json", metadata_json("training_dynamics", config, timing));
}

void run_spectral_density(const ExperimentConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  std::vector<DynamicsRun> runs(config.seeds.size());
  parallel_for(
      config.seeds.size(),
      [&](std::size_t i) { runs[i] = run_dynamics_single_seed(config, config.seeds[i]); },
      worker_count(config.max_threads));

  std::ostringstream spectra;
  spectra << "model,epoch,bin_lo,bin_hi,density\n";
  std::ostringstream dispersion;
  dispersion << "model,epoch,eig_std\n";
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    const DynamicsRun& run = runs[i];
    const std::string tag = "_seed" + std::to_string(config.seeds[i]);
    const auto& epochs = run.trainable.trace.epochs;
    for (int e : resolve_log_epochs(config, epochs.size())) {
      append_histogram_rows(spectra, "trainable" + tag, e, epochs[e].eig_mags, config.hist_bins,
                            config.hist_max);
    }
    for (std::size_t e = 0; e < epochs.size(); ++e) {
      dispersion << "trainable" << tag << ',' << e << ','
                 << format_double(stddev(epochs[e].eig_mags)) << '\n';
    }
    // Fixed-pole baselines never move: emit their (identical) spectra at the
    // first and last logged epoch.
    const int last_epoch = epochs.empty() ? 0 : static_cast<int>(epochs.size()) - 1;
    for (const auto& [name, model] :
         {std::pair<std::string, const rnn::ReservoirModel*>{"esn_random", &run.esn_random},
          std::pair<std::string, const rnn::ReservoirModel*>{"esn_configured",
                                                             &run.esn_configured}}) {
      const auto mags = rnn::eigen_magnitudes(model->w_rec);
      append_histogram_rows(spectra, name + tag, 0, mags, config.hist_bins, config.hist_max);
      append_histogram_rows(spectra, name + tag, last_epoch, mags, config.hist_bins,
                            config.hist_max);
      dispersion << name << tag << ",0," << format_double(stddev(mags)) << '\n';
      dispersion << name << tag << ',' << last_epoch << ',' << format_double(stddev(mags))
                 << '\n';
    }
  }
  write_text_file(dir / "spectra.csv", spectra.str());
  write_text_file(dir / "dispersion.csv", dispersion.str());
  write_json_file(dir / "metadata.json", metadata_json("spectral_density", config));
}

void run_symbol_detection(const ExperimentConfig& config) {
  const fs::path dir = prepare_out_dir(config);
  std::vector<std::vector<BerResult>> per_seed(config.seeds.size());
  parallel_for(
      config.seeds.size(),
      [&](std::size_t i) { per_seed[i] = run_detection_single_seed(config, config.seeds[i]); },
      worker_count(config.max_threads));

  std::ostringstream csv;
  csv << "model,seed,ber,n_train_symbols\n";
  json timing = json::object();
  std::map<std::string, std::vector<double>> by_model;
  for (const auto& results : per_seed) {
    for (const auto& r : results) {
      csv << r.model << ',' << r.seed << ',' << format_double(r.ber) << ',' << r.symbols_trained
          << '\n';
      by_model[r.model].push_back(r.ber);
      timing[r.model + "_seed" + std::to_string(r.seed) + "_seconds"] = r.train_seconds;
    }
  }
  write_text_file(dir / "ber.csv", csv.str());

  json summary = json::object();
  for (const auto& [model, bers] : by_model) {
    double mean = 0.0;
    for (double b : bers) mean += b;
    mean /= bers.size();
    summary[model] = {{"mean_ber", mean}, {"std_ber", stddev(bers)},
                      {"n_seeds", bers.size()}};
  }
  write_json_file(dir / "ber_summary.json", summary);
  write_json_file(dir / "metadata.json", metadata_json("symbol_detection", config, timing));
}

void run_recover(const ExperimentConfig& config) {
  if (config.recover_input.empty()) {
    throw std::invalid_argument("recover: set recover_input to the I/O pair JSON path");
  }
  std::ifstream in(config.recover_input);
  if (!in) throw std::invalid_argument("recover: cannot open " + config.recover_input);
  json doc = json::parse(in);

  const Sequence x = sequence_from_json(doc.at("x"));
  const Sequence y = sequence_from_json(doc.at("y"));
  int order = config.recover_order;
  if (order <= 0 && doc.contains("order")) order = doc.at("order").get<int>();
  if (order <= 0) {
    throw std::invalid_argument("recover: provide a positive order (config/CLI or input file)");
  }

  const auto recovered = recovery::recover_from_io(x, y, static_cast<std::size_t>(order));
  json out{{"order", order},
           {"params", param_set_to_json(recovered.params)},
           {"residual", recovered.residual}};
  if (config.brute_check) {
    if (order > 3) {
      throw std::invalid_argument("recover: brute-force check supports order <= 3");
    }
    const double step = 0.05;
    const auto grid = recovery::PoleGrid::real_axis(-0.95, 0.95, step);
    const Sequence h = recovery::deconvolve(x, y);
    const auto brute = recovery::brute_force_recover(h, static_cast<std::size_t>(order), grid);
    out["brute_force"] = {{"params", param_set_to_json(brute.params)},
                          {"residual", brute.residual},
                          {"grid_step", step},
                          {"agrees", params_equal(recovered.params, brute.params, step)}};
  }

  const fs::path dir = prepare_out_dir(config);
  write_json_file(dir / "recovered.json", out);
  write_json_file(dir / "metadata.json", metadata_json("recover", config));
}

void run_fixtures(const ExperimentConfig& config) {
  const fs::path dir = prepare_out_dir(config);

  {
    const ParamSet truth({{Complex(0.8, 0.0), Complex(0.6, 0.0)},
                          {Complex(-0.5, 0.0), Complex(-0.3, 0.0)}});
    const Sequence x({Complex(1.0, 0.0), Complex(0.3, 0.0), Complex(-0.2, 0.0),
                      Complex(0.1, 0.0)});
    const Sequence y = convolve(impulse_response(truth, 4), x);
    write_json_file(dir / "recover_roundtrip.json",
                    {{"x", sequence_to_json(x)},
                     {"y", sequence_to_json(y)},
                     {"order", 2},
                     {"truth", param_set_to_json(truth)}});
  }
  {
    const Sequence x({Complex(0.0, 0.0), Complex(1.0, 0.0), Complex(0.5, 0.0)});
    const Sequence y({Complex(0.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0)});
    write_json_file(dir / "recover_zero_lead.json",
                    {{"x", sequence_to_json(x)}, {"y", sequence_to_json(y)}, {"order", 1}});
  }
  {
    const ParamSet truth({{Complex(1.0, 0.0), Complex(0.5, 0.0)}});
    const Sequence x({Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0),
                      Complex(0.0, 0.0)});
    const Sequence y = convolve(impulse_response(truth, 4), x);
    write_json_file(dir / "recover_rank_deficient.json",
                    {{"x", sequence_to_json(x)},
                     {"y", sequence_to_json(y)},
                     {"order", 2},
                     {"truth", param_set_to_json(truth)}});
  }
  write_json_file(dir / "default_config.json", config_to_json(ExperimentConfig{}));
  write_json_file(dir / "metadata.json", metadata_json("fixtures", config));
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("POLEBENCH_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int max_threads) {
  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(max_threads, 1)), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace polebench::experiments
