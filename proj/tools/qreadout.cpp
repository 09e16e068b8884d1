/*
Copyright 2026 The qreadout Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// qreadout: command-line front end.
//
//   qreadout gen-dataset  simulate a labeled trace file
//   qreadout train        train a CNN (or feedforward / phase-robust CNN)
//   qreadout eval         fidelity table for every method on one dataset
//   qreadout stream       producer/consumer run with drift and retraining
//   qreadout phase-sweep  baseline vs phase-robust CNN over [0, 2pi)
//   qreadout report       summarize CSV outputs of earlier runs
//
// Exit codes: 0 success, 2 configuration error, 1 runtime error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>
#include "qreadout/qreadout.hpp"

#ifndef QREADOUT_GIT_DESCRIBE
#define QREADOUT_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qreadout;
using Model = nn::Model<float>;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string states;
  std::vector<std::string> methods;
  bool realtime = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "JSON run configuration");
  app->add_option("--preset", o.preset, "Preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--seed", o.seed, "Master seed");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--states", o.states, "State set: ge or gef");
}

/// Preset, then config file, then explicit flags.
RunConfig resolve(const CommonOptions& o) {
  RunConfig c = preset_config(o.preset.empty() ? "desk" : o.preset);
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw ConfigError("cannot open config file '" + o.config_path + "'");
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + o.config_path + "': " + e.what());
    }
    if (!o.preset.empty() && j.is_object()) j.erase("preset");
    apply_json(c, j);
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.out = o.out;
  if (!o.states.empty()) c.states = parse_states(o.states);
  if (o.realtime) c.stream.realtime = true;
  c.validate();
  return c;
}

fs::path prepare_out(const RunConfig& c) {
  fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error("cannot create output directory '" + c.out + "': " + ec.message());
  std::ofstream os(out / "config.json");
  if (!os) throw Error("cannot write '" + (out / "config.json").string() + "'");
  os << config_to_json(c).dump(2) << '\n';
  return out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

void write_sidecar(const fs::path& out, const RunConfig& c, json extra) {
  json j;
  j["config"] = config_to_json(c);
  j["seed"] = c.seed;
  j["git_describe"] = QREADOUT_GIT_DESCRIBE;
  j["threads"] = worker_count();
  for (auto& [k, v] : extra.items()) j[k] = v;
  open_out(out / "run.json") << j.dump(2) << '\n';
}

Rng role_rng(const RunConfig& c, std::uint64_t role) {
  return Rng(detail::role_seed(c.seed, role));
}

Model fresh_model(const RunConfig& c, const std::string& arch) {
  if (arch == "cnn") return Model(c.cnn_architecture(), detail::role_seed(c.seed, 4));
  if (arch == "phase_robust")
    return Model(c.cnn_architecture(true), detail::role_seed(c.seed, 4));
  if (arch == "feedforward")
    return Model(c.feedforward_architecture(), detail::role_seed(c.seed, 4));
  throw ConfigError("unknown architecture '" + arch +
                    "' (expected cnn, phase_robust or feedforward)");
}

Model load_model(const std::string& path, const RunConfig& c) {
  if (!fs::exists(path)) throw Error("checkpoint not found: '" + path + "'");
  Model m = nn::load_checkpoint<float>(path);
  const std::size_t len = c.acq.n_samples / c.dsp.decimation;
  if (m.architecture().input_length != len)
    throw ConfigError("checkpoint '" + path + "' expects input length " +
                      std::to_string(m.architecture().input_length) +
                      ", configuration produces " + std::to_string(len));
  return m;
}

// ---------------------------------------------------------------------------

int cmd_gen_dataset(const CommonOptions& o, std::size_t n, double phase) {
  RunConfig c = resolve(o);
  if (n) c.n_per_state = n;
  c.validate();
  const fs::path out = prepare_out(c);
  Rng rng = role_rng(c, 6);
  DriftState d;
  d.phase_offset = phase;
  const LabeledBatch batch = generate_batch(c.device, c.acq, c.n_per_state, c.states, d, rng);
  save_traces((out / "dataset.qrt").string(), batch, c.acq.sample_rate);
  write_sidecar(out, c, {{"dataset", (out / "dataset.qrt").string()},
                         {"n_traces", batch.size()},
                         {"phase_offset", phase}});
  std::cout << "wrote " << batch.size() << " traces x " << c.acq.n_samples
            << " samples to " << (out / "dataset.qrt").string() << '\n';
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& arch,
              std::optional<std::size_t> cycles) {
  RunConfig c = resolve(o);
  std::size_t& n_cycles =
      arch == "phase_robust" ? c.sweep.train_cycles : c.schedule.initial_cycles;
  if (cycles) n_cycles = *cycles;
  const fs::path out = prepare_out(c);
  const Setup setup = c.setup();
  Model model = fresh_model(c, arch);
  TrainOptions opts;
  opts.n_per_state = c.n_per_state;
  opts.test_per_state = c.n_per_state;
  opts.states = c.states;
  if (arch == "phase_robust") opts.batch_options.wait_jitter = c.sweep.wait_jitter;
  Rng rng = role_rng(c, 3);
  const auto t0 = std::chrono::steady_clock::now();
  const auto curve =
      train_initial(model, setup, c.train, n_cycles, opts, rng);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string name = arch + ".json";
  nn::save_checkpoint(model, (out / name).string());
  {
    auto os = open_out(out / "train_curve.csv");
    write_curve_csv(os, curve);
  }
  json extra;
  extra["architecture"] = arch;
  extra["cycles"] = n_cycles;
  extra["wall_seconds"] = secs;
  if (!curve.empty()) {
    extra["final_f2"] = curve.back().f2;
    extra["final_f3"] = curve.back().f3;
    extra["final_conventional_f3"] = curve.back().conventional_f3;
  }
  write_sidecar(out, c, extra);
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& p : curve)
    if (p.cycle % 10 == 0 || p.cycle == curve.size())
      std::cout << "cycle " << std::setw(4) << p.cycle << "  loss " << p.loss << "  F2 "
                << p.f2 << "  F3 " << p.f3 << "  conventional F3 " << p.conventional_f3
                << '\n';
  std::cout << "checkpoint: " << (out / name).string() << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& data_path,
             const std::string& calib_path, const std::string& cnn_path,
             const std::string& ff_path) {
  RunConfig c = resolve(o);
  const fs::path out = prepare_out(c);
  if (!fs::exists(data_path)) throw Error("dataset not found: '" + data_path + "'");
  TraceFile file = load_traces(data_path);
  if (file.n_samples != c.acq.n_samples)
    throw ConfigError("dataset has " + std::to_string(file.n_samples) +
                      " samples per trace, configuration expects " +
                      std::to_string(c.acq.n_samples));
  if (std::abs(file.sample_rate - c.acq.sample_rate) > 1e-6 * c.acq.sample_rate)
    throw ConfigError("dataset sample rate differs from the configuration");
  const Downconverter ddc(c.setup().dsp, c.acq.n_samples);
  IqBatch all = ddc(file.batch);

  // Calibration/training data: a separate file, or the first half of the
  // dataset (the generator interleaves states, so halves stay balanced).
  IqBatch calib, test;
  if (!calib_path.empty()) {
    if (!fs::exists(calib_path)) throw Error("dataset not found: '" + calib_path + "'");
    calib = ddc(load_traces(calib_path).batch);
    test = std::move(all);
  } else {
    const std::size_t half = all.size() / 2;
    calib.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(half));
    test.assign(all.begin() + static_cast<std::ptrdiff_t>(half), all.end());
  }
  const auto states = states_present(test);
  if (states.size() < 2) throw Error("dataset needs at least two prepared states");

  std::vector<std::string> methods = o.methods;
  if (methods.empty())
    methods = {"conventional", "matched_filter", "knn", "feedforward", "cnn"};

  auto trained = [&](const std::string& path, const std::string& arch) {
    if (!path.empty()) return load_model(path, c);
    Model m = fresh_model(c, arch);
    for (std::size_t k = 0; k < c.schedule.initial_cycles; ++k)
      nn::train_cycle(m, calib, c.train);
    return m;
  };

  std::vector<ConfusionRecord> records;
  std::cout << std::left << std::setw(16) << "method" << std::right << std::setw(8) << "F2"
            << std::setw(8) << "F3" << '\n';
  std::cout << std::fixed << std::setprecision(3);
  std::vector<Model> keep;
  keep.reserve(2);
  for (const auto& m : methods) {
    Score s;
    if (m == "conventional") {
      s = score_classifier(test, centroid_classifier(calibrate_centroids(calib, states)));
    } else if (m == "matched_filter") {
      s = score_classifier(test, matched_classifier(build_matched_filters(calib, states)));
    } else if (m == "knn") {
      s = score_classifier(test, knn_classifier(calib, c.model.knn_k));
    } else if (m == "feedforward") {
      keep.push_back(trained(ff_path, "feedforward"));
      s = score_classifier(test, model_classifier(keep.back()));
    } else if (m == "cnn") {
      keep.push_back(trained(cnn_path, "cnn"));
      s = score_classifier(test, model_classifier(keep.back()));
    } else {
      throw ConfigError("unknown eval method '" + m +
                        "' (expected conventional, matched_filter, knn, feedforward, cnn)");
    }
    auto fmt = [](double v) {
      std::ostringstream os;
      if (std::isfinite(v)) os << std::fixed << std::setprecision(3) << v;
      else os << "-";
      return os.str();
    };
    std::cout << std::left << std::setw(16) << m << std::right << std::setw(8) << fmt(s.f2)
              << std::setw(8) << fmt(s.f3) << '\n';
    records.push_back({m, 0.0, s.f2, s.f3, s.cm});
  }
  auto os = open_out(out / "eval.csv");
  write_confusion_csv(os, records);
  write_sidecar(out, c, {{"dataset", data_path}, {"test_traces", test.size()}});
  return 0;
}

int cmd_stream(const CommonOptions& o, const std::string& cnn_path) {
  RunConfig c = resolve(o);
  if (!o.methods.empty()) {
    c.stream.methods.clear();
    for (const auto& m : o.methods) c.stream.methods.push_back(parse_method(m));
    if (!c.stream.has(Method::Cnn)) c.schedule.trigger = RetrainTrigger::Never;
  }
  c.validate();
  const fs::path out = prepare_out(c);
  StreamConfig sc = c.stream;
  sc.states = c.states;
  std::optional<Model> model;
  if (sc.has(Method::Cnn))
    model = cnn_path.empty() ? fresh_model(c, "cnn") : load_model(cnn_path, c);
  const StreamResult r = run_stream(c.setup(), c.drift, c.schedule, sc, c.train,
                                    model ? &*model : nullptr, c.seed);
  {
    auto os = open_out(out / "fidelity_log.csv");
    write_fidelity_csv(os, r.log);
  }
  {
    std::vector<ConfusionRecord> rows;
    for (const auto& rec : r.log.records)
      rows.push_back({method_name(rec.method), rec.t, rec.f2, rec.f3, rec.cm});
    auto os = open_out(out / "confusion_log.csv");
    write_confusion_csv(os, rows);
  }
  if (!r.initial_curve.empty()) {
    auto os = open_out(out / "train_curve.csv");
    write_curve_csv(os, r.initial_curve);
  }
  if (model) nn::save_checkpoint(*model, (out / "cnn.json").string());
  const auto tp = throughput_report(r.stats);
  json stats = {{"produced", r.stats.produced},
                {"consumed", r.stats.consumed},
                {"lost", r.stats.lost},
                {"duplicated", r.stats.duplicated},
                {"stalls", r.stats.stalls},
                {"backpressure_waits", r.stats.backpressure_waits},
                {"retrains", r.stats.retrains},
                {"wall_seconds", r.stats.wall_seconds},
                {"producer_traces_per_s", tp.producer_traces_per_s},
                {"consumer_traces_per_s", tp.consumer_traces_per_s},
                {"sustained_traces_per_min", tp.sustained_traces_per_min},
                {"mean_flush_seconds", tp.mean_flush_seconds},
                {"max_flush_seconds", tp.max_flush_seconds}};
  json means;
  for (Method m : sc.methods) means[method_name(m)] = r.log.mean_f3(m);
  write_sidecar(out, c, {{"stream_stats", stats}, {"mean_f3", means}});
  std::cout << "flushes " << r.stats.consumed << "/" << r.stats.produced << "  lost "
            << r.stats.lost << "  duplicated " << r.stats.duplicated << "  stalls "
            << r.stats.stalls << "  retrains " << r.stats.retrains << '\n';
  std::cout << std::fixed << std::setprecision(4);
  for (Method m : sc.methods)
    std::cout << "mean F3 " << std::left << std::setw(14) << method_name(m) << std::right
              << r.log.mean_f3(m) << '\n';
  std::cout << std::setprecision(0) << "throughput " << tp.sustained_traces_per_min
            << " traces/min sustained, producer " << tp.producer_traces_per_s
            << " traces/s, consumer " << tp.consumer_traces_per_s << " traces/s\n";
  return 0;
}

int cmd_phase_sweep(const CommonOptions& o, const std::string& cnn_path,
                    std::optional<std::size_t> points) {
  RunConfig c = resolve(o);
  if (points) c.sweep.n_points = *points;
  c.validate();
  const fs::path out = prepare_out(c);
  const Setup setup = c.setup();
  Model model = cnn_path.empty() ? fresh_model(c, "phase_robust") : load_model(cnn_path, c);
  std::vector<CurvePoint> curve;
  if (cnn_path.empty()) {
    TrainOptions opts;
    opts.n_per_state = c.n_per_state;
    opts.test_per_state = c.n_per_state;
    opts.states = c.states;
    opts.eval_every = 0;
    opts.batch_options.wait_jitter = c.sweep.wait_jitter;
    Rng rng = role_rng(c, 3);
    curve = train_initial(model, setup, c.train, c.sweep.train_cycles, opts, rng);
    nn::save_checkpoint(model, (out / "phase_robust.json").string());
  }
  SweepOptions so;
  so.n_points = c.sweep.n_points;
  so.n_per_state = c.sweep.n_per_state;
  so.states = c.states;
  so.common_random_numbers = c.sweep.common_random_numbers;
  const auto rows = phase_sweep(model, setup, so, c.seed);
  {
    auto os = open_out(out / "phase_sweep.csv");
    write_sweep_csv(os, rows);
  }
  const double cnn_range = sweep_range(rows, Method::Cnn);
  double base0 = 0.0, base_min = 1.0;
  for (const auto& r : rows)
    if (r.method == Method::Baseline) {
      if (r.phase == 0.0) base0 = r.f3;
      base_min = std::min(base_min, r.f3);
    }
  write_sidecar(out, c,
                {{"cnn_peak_to_trough", cnn_range},
                 {"baseline_f3_at_zero", base0},
                 {"baseline_worst_loss", base0 - base_min}});
  std::cout << std::fixed << std::setprecision(4) << "points " << so.n_points
            << "  CNN peak-to-trough " << cnn_range << "  baseline F3 at 0 " << base0
            << "  baseline worst drop " << base0 - base_min << '\n';
  return 0;
}

// Summaries of whatever CSV outputs exist in the directory.
std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_report(const CommonOptions& o) {
  const fs::path dir(o.out.empty() ? "out" : o.out);
  if (!fs::is_directory(dir)) throw Error("output directory not found: '" + dir.string() + "'");
  json report;
  bool any = false;
  if (fs::exists(dir / "fidelity_log.csv")) {
    any = true;
    std::map<std::string, std::pair<double, std::size_t>> acc;
    std::map<std::string, std::pair<double, double>> range;
    const auto rows = read_csv(dir / "fidelity_log.csv");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (rows[k].size() < 4 || rows[k][3].empty()) continue;
      const double f3 = std::stod(rows[k][3]);
      auto& a = acc[rows[k][1]];
      a.first += f3;
      ++a.second;
      auto [it, fresh] = range.try_emplace(rows[k][1], f3, f3);
      if (!fresh) {
        it->second.first = std::min(it->second.first, f3);
        it->second.second = std::max(it->second.second, f3);
      }
    }
    for (const auto& [m, a] : acc)
      report["stream"][m] = {{"mean_f3", a.first / static_cast<double>(a.second)},
                             {"min_f3", range[m].first},
                             {"max_f3", range[m].second},
                             {"records", a.second}};
  }
  if (fs::exists(dir / "phase_sweep.csv")) {
    any = true;
    std::map<std::string, std::pair<double, double>> range;
    const auto rows = read_csv(dir / "phase_sweep.csv");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (rows[k].size() < 3) continue;
      const double f3 = std::stod(rows[k][2]);
      auto [it, fresh] = range.try_emplace(rows[k][1], f3, f3);
      if (!fresh) {
        it->second.first = std::min(it->second.first, f3);
        it->second.second = std::max(it->second.second, f3);
      }
    }
    for (const auto& [m, r] : range)
      report["phase_sweep"][m] = {{"min_f3", r.first},
                                  {"max_f3", r.second},
                                  {"peak_to_trough", r.second - r.first}};
  }
  if (fs::exists(dir / "train_curve.csv")) {
    any = true;
    const auto rows = read_csv(dir / "train_curve.csv");
    std::optional<std::size_t> first_win;
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].size() >= 5 && !rows[k][3].empty() && !rows[k][4].empty() &&
          std::stod(rows[k][3]) > std::stod(rows[k][4])) {
        first_win = std::stoul(rows[k][0]);
        break;
      }
    report["train_curve"]["cycles"] = rows.size() > 1 ? rows.size() - 1 : 0;
    if (rows.size() > 1 && rows.back().size() >= 5) {
      report["train_curve"]["final_f3"] = rows.back()[3];
      report["train_curve"]["final_conventional_f3"] = rows.back()[4];
    }
    report["train_curve"]["first_cycle_beating_conventional"] =
        first_win ? json(*first_win) : json(nullptr);
  }
  if (fs::exists(dir / "eval.csv")) {
    any = true;
    const auto rows = read_csv(dir / "eval.csv");
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].size() >= 4)
        report["eval"][rows[k][0]] = {{"f2", rows[k][2]}, {"f3", rows[k][3]}};
  }
  if (!any) throw Error("no CSV outputs found in '" + dir.string() + "'");
  open_out(dir / "report.json") << report.dump(2) << '\n';
  std::cout << report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-shot qubit/qutrit readout simulation, DSP and classification"};
  app.require_subcommand(1);
  CommonOptions o;

  std::size_t n = 0;
  double phase = 0.0;
  auto* gen = app.add_subcommand("gen-dataset", "Simulate a labeled trace file");
  add_common(gen, o);
  gen->add_option("--n", n, "Traces per state");
  gen->add_option("--phase", phase, "Global phase offset in radians");

  std::string arch = "cnn";
  std::optional<std::size_t> cycles;
  auto* train = app.add_subcommand("train", "Train a network on fresh simulated batches");
  add_common(train, o);
  train->add_option("--arch", arch, "cnn, phase_robust or feedforward")
      ->check(CLI::IsMember({"cnn", "phase_robust", "feedforward"}));
  train->add_option("--cycles", cycles, "Training cycles (default: schedule.initial_cycles, or sweep.train_cycles for phase_robust)");

  std::string data, calib, cnn_path, ff_path;
  auto* eval = app.add_subcommand("eval", "Fidelity table for every method on one dataset");
  add_common(eval, o);
  eval->add_option("--data", data, "Trace file to evaluate")->required();
  eval->add_option("--calib", calib, "Separate calibration/training trace file");
  eval->add_option("--cnn", cnn_path, "CNN checkpoint (trained on calibration data if absent)");
  eval->add_option("--feedforward", ff_path, "Feedforward checkpoint");
  eval->add_option("--method", o.methods, "Methods to evaluate")->delimiter(',');

  auto* stream = app.add_subcommand("stream", "Streaming run with drift and retraining");
  add_common(stream, o);
  stream->add_flag("--realtime", o.realtime, "Pace the producer against the wall clock");
  stream->add_option("--method", o.methods, "baseline, cal_baseline, cnn")->delimiter(',');
  stream->add_option("--cnn", cnn_path, "Pre-trained CNN checkpoint");

  std::optional<std::size_t> points;
  auto* sweep = app.add_subcommand("phase-sweep", "Phase sweep of baseline vs phase-robust CNN");
  add_common(sweep, o);
  sweep->add_option("--cnn", cnn_path, "Pre-trained phase-robust checkpoint");
  sweep->add_option("--points", points, "Number of phase points");

  auto* report = app.add_subcommand("report", "Summarize CSV outputs in --out");
  report->add_option("--out", o.out, "Directory holding earlier outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen_dataset(o, n, phase);
    if (*train) return cmd_train(o, arch, cycles);
    if (*eval) return cmd_eval(o, data, calib, cnn_path, ff_path);
    if (*stream) return cmd_stream(o, cnn_path);
    if (*sweep) return cmd_phase_sweep(o, cnn_path, points);
    if (*report) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
