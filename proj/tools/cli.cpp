// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "dgate/checkpoint.hpp"
#include "dgate/contribution_analysis.hpp"
#include "dgate/data_io.hpp"
#include "dgate/error.hpp"
#include "dgate/generation.hpp"
#include "dgate/metrics.hpp"
#include "dgate/noise_schedule.hpp"
#include "dgate/sweep.hpp"
#include "dgate/timestep_distribution.hpp"
#include "dgate/training.hpp"

namespace dgate::cli {

namespace {

namespace fs = std::filesystem;

// Flag combinations CLI11 cannot express; reported like a parse error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw UsageError(what + ": '" + text + "' is not a finite number");
  return v;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError(what + ": expected lo:hi, got '" + text + "'");
  return {parse_real(text.substr(0, colon), what), parse_real(text.substr(colon + 1), what)};
}

// Writes to `fallback` when path is empty or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw IoError("cannot open '" + path + "' for writing");
    stream_ = file_.get();
    path_ = path;
  }

  std::ostream& stream() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write to '" + (path_.empty() ? "stdout" : path_) + "' failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
  std::string path_;
};

// ---- shared flag groups ----

struct ScheduleFlags {
  int T = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  void add(CLI::App& app) {
    app.add_option("--T", T, "Number of diffusion timesteps")->capture_default_str();
    app.add_option("--beta-start", beta_start, "First beta of the linear schedule")
        ->capture_default_str();
    app.add_option("--beta-end", beta_end, "Last beta of the linear schedule")
        ->capture_default_str();
  }
  Schedule make() const { return Schedule::linear(T, beta_start, beta_end); }
};

struct DataFlags {
  std::string path;
  bool synth = false;
  bool labeled = false;
  SynthOptions synth_opts;

  void add(CLI::App& app) {
    auto* data = app.add_option("--data", path, "Delimited signal file (one signal per row)");
    auto* syn = app.add_flag("--synth", synth, "Use the seeded synthetic 1D dataset");
    data->excludes(syn);
    app.add_flag("--labeled", labeled, "First column of --data is an integer class label");
    app.add_option("--synth-n", synth_opts.n, "Synthetic dataset size")->capture_default_str();
    app.add_option("--synth-dim", synth_opts.dim, "Synthetic signal length")->capture_default_str();
    app.add_option("--synth-classes", synth_opts.classes, "Synthetic class count")
        ->capture_default_str();
    app.add_option("--synth-seed", synth_opts.seed, "Synthetic dataset seed")->capture_default_str();
    app.add_option("--synth-noise", synth_opts.noise_scale, "Synthetic per-sample noise scale")
        ->capture_default_str();
  }

  SignalDataset load() const {
    if (path.empty() && !synth) throw UsageError("one of --data or --synth is required");
    if (synth) return synth_1d(synth_opts);
    return load_delimited(path, labeled);
  }
};

struct ArchFlags {
  int embed_dim = 32;
  std::vector<int> hidden{128, 128};

  void add(CLI::App& app) {
    app.add_option("--embed", embed_dim, "Timestep embedding width")->capture_default_str();
    app.add_option("--hidden", hidden, "Hidden layer widths, comma separated")
        ->delimiter(',')
        ->capture_default_str();
  }
  Architecture make(int input_dim) const {
    Architecture a{input_dim, embed_dim, hidden};
    a.validate();
    return a;
  }
};

std::optional<CIConfig> ci_from(const std::optional<double>& cl, const std::optional<double>& ch,
                                double z) {
  if (!cl && !ch) return std::nullopt;
  if (!cl || !ch) throw UsageError("--cl and --ch must be given together");
  CIConfig ci{*cl, *ch, z};
  ci.validate();
  return ci;
}

void check_fingerprint(const Provenance& prov, const Schedule& schedule) {
  if (prov.schedule_fingerprint != schedule.fingerprint())
    throw Error("schedule_mismatch",
                "checkpoint was trained with a different noise schedule than --T/--beta-start/"
                "--beta-end describe");
}

// ---- schedule ----

struct ScheduleCmd {
  ScheduleFlags sched;
  std::string out;

  void add(CLI::App& app) {
    sched.add(app);
    app.add_option("--out", out, "Output CSV (default stdout)");
  }

  void run(std::ostream& stdout_) const {
    const auto s = sched.make();
    Output o(out, stdout_);
    auto& os = o.stream();
    os << "t,beta,alpha_bar,sigma,snr\n";
    for (int t = 1; t <= s.T(); ++t)
      os << t << ',' << format_double(s.beta(t)) << ',' << format_double(s.alpha_bar(t)) << ','
         << format_double(s.sigma(t)) << ',' << format_double(s.snr(t)) << '\n';
    o.finish();
  }
};

// ---- analyze ----

struct AnalyzeCmd {
  ScheduleFlags sched;
  double cl = 0.0;
  double ch = 0.0;
  double z = kDefaultZ;
  double tau = kDefaultTau;
  std::string out;

  void add(CLI::App& app) {
    app.add_option("--cl", cl, "Lower timestep bound of the interval")->required();
    app.add_option("--ch", ch, "Upper timestep bound of the interval")->required();
    app.add_option("--z", z, "z-score the interval half-width corresponds to")
        ->capture_default_str();
    app.add_option("--tau", tau, "SNR threshold splitting the two regions")->capture_default_str();
    sched.add(app);
    app.add_option("--out", out, "Output CSV (default stdout)");
  }

  void run(std::ostream& stdout_) const {
    const auto s = sched.make();
    const CIConfig ci{cl, ch, z};
    const auto params = ci_to_params(ci);
    const auto pmf = TimestepPMF::build(params, s.T());
    const auto split = region_split(pmf, s, tau);
    Output o(out, stdout_);
    auto& os = o.stream();
    os << "# mu=" << format_double(params.mu) << " sigma=" << format_double(params.sigma)
       << " lambda=" << format_double(pmf.lambda()) << " tail=" << format_double(pmf.tail_mass())
       << '\n';
    os << "# total=" << format_double(split.total) << " high_region=" << format_double(split.high_region_mass)
       << " low_region=" << format_double(split.low_region_mass) << " tau=" << format_double(tau)
       << '\n';
    os << "t,prob,snr,contribution,dcontrib_dmu\n";
    for (int t = 1; t <= s.T(); ++t)
      os << t << ',' << format_double(pmf.prob(t)) << ',' << format_double(s.snr(t)) << ','
         << format_double(split.contributions[static_cast<std::size_t>(t - 1)]) << ','
         << format_double(contribution_dmu(params, s, t)) << '\n';
    o.finish();
  }
};

// ---- train ----

struct TrainCmd {
  DataFlags data;
  ScheduleFlags sched;
  ArchFlags arch;
  std::optional<double> cl, ch;
  double z = kDefaultZ;
  bool pretrain = false;
  std::optional<int> epochs;
  std::optional<double> lr;
  int batch = TrainConfig{}.batch_size;
  std::uint64_t seed = 0;
  std::uint64_t init_seed = 0;
  int checkpoint_every = 0;
  std::string from_checkpoint, out_checkpoint, report, histogram;

  void add(CLI::App& app) {
    data.add(app);
    sched.add(app);
    arch.add(app);
    auto* lo = app.add_option("--cl", cl, "Lower interval bound (omit for uniform sampling)");
    auto* hi = app.add_option("--ch", ch, "Upper interval bound");
    app.add_option("--z", z, "z-score of the interval half-width")->capture_default_str();
    auto* pre = app.add_flag("--pretrain", pretrain,
                             "Uniform-sampling baseline protocol (50 epochs, lr 1e-3 defaults)");
    pre->excludes(lo)->excludes(hi);
    app.add_option("--epochs", epochs, "Epochs (default 30, or 50 with --pretrain)");
    app.add_option("--lr", lr, "Learning rate (default 1e-4, or 1e-3 with --pretrain)");
    app.add_option("--batch", batch, "Batch size")->capture_default_str();
    app.add_option("--seed", seed, "Training stream seed")->capture_default_str();
    app.add_option("--init-seed", init_seed, "Weight initialization seed")->capture_default_str();
    app.add_option("--checkpoint-every", checkpoint_every,
                   "Also write --out-checkpoint every N epochs (0 = end only)")
        ->capture_default_str();
    app.add_option("--from-checkpoint", from_checkpoint, "Continue from this checkpoint");
    app.add_option("--out-checkpoint", out_checkpoint, "Write the trained checkpoint here");
    app.add_option("--report", report, "Per-epoch loss CSV (epoch,mean_loss)");
    app.add_option("--histogram", histogram, "Timestep draw histogram CSV (t,count)");
  }

  void run(std::ostream& stdout_) const {
    const auto dataset = data.load();
    const auto schedule = sched.make();
    const auto ci = ci_from(cl, ch, z);

    TrainConfig cfg = pretrain ? pretrain_config(seed) : TrainConfig{};
    cfg.seed = seed;
    cfg.ci = ci;
    cfg.batch_size = batch;
    cfg.checkpoint_every = checkpoint_every;
    if (epochs) cfg.epochs = *epochs;
    if (lr) cfg.learning_rate = *lr;

    DenoiserParams params;
    std::uint32_t prior_epochs = 0;
    if (!from_checkpoint.empty()) {
      auto ck = load_checkpoint(from_checkpoint);
      check_fingerprint(ck.provenance, schedule);
      if (ck.params.arch.input_dim != dataset.dim())
        throw CheckpointError(CheckpointError::Reason::kShapeMismatch,
                              "checkpoint " + ck.params.arch.describe() +
                                  " does not match data with D=" + std::to_string(dataset.dim()));
      params = std::move(ck.params);
      prior_epochs = ck.provenance.epochs_completed;
    } else {
      params = init_params(arch.make(dataset.dim()), init_seed);
    }

    auto provenance_at = [&](int done) {
      Provenance p;
      p.schedule_fingerprint = schedule.fingerprint();
      p.ci = ci;
      p.seed = seed;
      p.epochs_completed = prior_epochs + static_cast<std::uint32_t>(done);
      p.normalization = dataset.normalization;
      return p;
    };
    CheckpointHook hook;
    if (!out_checkpoint.empty())
      hook = [&](int done, const DenoiserParams& p) {
        save_checkpoint(out_checkpoint, p, provenance_at(done));
      };

    const auto result = train(std::move(params), dataset, schedule, pmf_for(cfg, schedule.T()), cfg, hook);

    if (!report.empty()) {
      Output o(report, stdout_);
      o.stream() << "epoch,mean_loss\n";
      for (std::size_t e = 0; e < result.report.epoch_mean_loss.size(); ++e)
        o.stream() << e + 1 << ',' << format_double(result.report.epoch_mean_loss[e]) << '\n';
      o.finish();
    }
    if (!histogram.empty()) {
      Output o(histogram, stdout_);
      o.stream() << "t,count\n";
      for (std::size_t t = 0; t < result.report.timestep_histogram.size(); ++t)
        o.stream() << t + 1 << ',' << result.report.timestep_histogram[t] << '\n';
      o.finish();
    }
    stdout_ << "epochs=" << cfg.epochs << " steps_per_epoch=" << result.report.steps_per_epoch
            << " final_loss=" << format_double(result.report.final_loss())
            << " sampling=" << (ci ? "interval" : "uniform") << '\n';
  }
};

// ---- generate ----

struct GenerateCmd {
  ScheduleFlags sched;
  std::string checkpoint;
  int num = GenerationConfig{}.num_samples;
  std::uint64_t seed = 0;
  std::string clip;
  bool normalized = false;
  std::string out;

  void add(CLI::App& app) {
    app.add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
    sched.add(app);
    app.add_option("--num", num, "Number of signals")->capture_default_str();
    app.add_option("--seed", seed, "Sampling seed")->capture_default_str();
    app.add_option("--clip", clip, "Clamp final samples to lo:hi (model units)");
    app.add_flag("--normalized", normalized,
                 "Keep model units instead of undoing the training normalization");
    app.add_option("--out", out, "Output CSV (default stdout)");
  }

  void run(std::ostream& stdout_) const {
    const auto ck = load_checkpoint(checkpoint);
    const auto schedule = sched.make();
    check_fingerprint(ck.provenance, schedule);
    GenerationConfig cfg;
    cfg.num_samples = num;
    cfg.seed = seed;
    if (!clip.empty()) cfg.clip_range = parse_range(clip, "--clip");
    Eigen::MatrixXd samples = ddpm_sample(ck.params, schedule, cfg);
    if (!normalized) {
      const auto& n = ck.provenance.normalization;
      samples = (samples.array() * n.scale + n.shift).matrix();
    }
    Output o(out, stdout_);
    write_signals_csv(o.stream(), samples);
    o.finish();
  }
};

// ---- eval ----

struct EvalCmd {
  std::string generated, train_path;
  bool labeled = false;
  int pca = 2;
  int bins = kDefaultBins;
  std::string aggregation = "mean";
  std::string out;

  void add(CLI::App& app) {
    app.add_option("--generated", generated, "Generated signals CSV")->required();
    app.add_option("--train", train_path, "Training signals file")->required();
    app.add_flag("--labeled", labeled, "First column of --train is a class label");
    app.add_option("--pca", pca, "PCA components")->capture_default_str();
    app.add_option("--bins", bins, "Histogram bins for JS distances")->capture_default_str();
    app.add_option("--aggregation", aggregation, "L2 aggregation over training signals")
        ->check(CLI::IsMember({"mean", "min"}))
        ->capture_default_str();
    app.add_option("--out", out, "Output CSV (default stdout)");
  }

  void run(std::ostream& stdout_) const {
    auto train_set = load_delimited(train_path, labeled, false);
    Eigen::MatrixXd gen = read_signals_csv(generated);
    // Both sets in the training set's standardized units.
    const auto norm = fit_standardization(train_set.signals);
    apply_normalization(train_set.signals, norm);
    apply_normalization(gen, norm);
    EvalOptions opts;
    opts.pca_components = pca;
    opts.bins = bins;
    opts.aggregation = aggregation == "min" ? L2Aggregation::kMin : L2Aggregation::kMean;
    const auto r = evaluate(gen, train_set.signals, opts);
    Output o(out, stdout_);
    auto& os = o.stream();
    os << "metric,value\n";
    os << "mean_l2," << format_double(r.mean_l2) << '\n';
    for (std::size_t c = 0; c < r.wasserstein_per_component.size(); ++c)
      os << "wasserstein_c" << c + 1 << ',' << format_double(r.wasserstein_per_component[c]) << '\n';
    for (std::size_t c = 0; c < r.js_per_component.size(); ++c)
      os << "js_c" << c + 1 << ',' << format_double(r.js_per_component[c]) << '\n';
    if (r.js_raw) os << "js_raw," << format_double(*r.js_raw) << '\n';
    o.finish();
  }
};

// ---- sweep ----

struct SweepCmd {
  DataFlags data;
  ScheduleFlags sched;
  ArchFlags arch;
  std::string bounds;
  double z = kDefaultZ;
  int seeds = 3;
  std::uint64_t base_seed = 0;
  int jobs = 1;
  std::string out_dir;
  std::string distance = "mean_l2";
  std::string baseline;
  int pretrain_epochs = 50;
  double pretrain_lr = 1e-3;
  std::uint64_t init_seed = 0;
  std::uint64_t pretrain_seed = 1;
  int epochs = 30;
  double lr = 1e-4;
  int batch = TrainConfig{}.batch_size;
  int num = GenerationConfig{}.num_samples;
  int pca = 2;
  int bins = kDefaultBins;
  std::string clip = "data";

  void add(CLI::App& app) {
    data.add(app);
    sched.add(app);
    arch.add(app);
    app.add_option("--bounds", bounds, "Interval bounds as a:b:step or a,b,c (default T/10..T)");
    app.add_option("--z", z, "z-score of the interval half-width")->capture_default_str();
    app.add_option("--seeds", seeds, "Replicates per cell")->capture_default_str();
    app.add_option("--base-seed", base_seed, "Root of every cell's seed")->capture_default_str();
    app.add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Directory for the CSV outputs")->required();
    app.add_option("--distance", distance, "Distance correlated with the covariates")
        ->check(CLI::IsMember({"mean_l2", "js_raw"}))
        ->capture_default_str();
    app.add_option("--baseline", baseline, "Baseline checkpoint (otherwise pretrained here)");
    app.add_option("--pretrain-epochs", pretrain_epochs, "Baseline epochs")->capture_default_str();
    app.add_option("--pretrain-lr", pretrain_lr, "Baseline learning rate")->capture_default_str();
    app.add_option("--init-seed", init_seed, "Baseline initialization seed")->capture_default_str();
    app.add_option("--pretrain-seed", pretrain_seed, "Baseline training seed")->capture_default_str();
    app.add_option("--epochs", epochs, "Fine-tune epochs per cell")->capture_default_str();
    app.add_option("--lr", lr, "Fine-tune learning rate")->capture_default_str();
    app.add_option("--batch", batch, "Batch size")->capture_default_str();
    app.add_option("--num", num, "Generated signals per cell")->capture_default_str();
    app.add_option("--pca", pca, "PCA components")->capture_default_str();
    app.add_option("--bins", bins, "Histogram bins")->capture_default_str();
    app.add_option("--clip", clip,
                   "Final-sample clamp: 'data' (training range), 'none', or lo:hi")
        ->capture_default_str();
  }

  void run(std::ostream& stdout_) const {
    if (seeds < 1) throw UsageError("--seeds must be >= 1");
    const auto dataset = data.load();
    const auto schedule = sched.make();
    const auto grid =
        build_grid(bounds.empty() ? default_bounds(schedule.T()) : parse_bounds(bounds), z, schedule.T());

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

    DenoiserParams base;
    if (!baseline.empty()) {
      auto ck = load_checkpoint(baseline);
      check_fingerprint(ck.provenance, schedule);
      base = std::move(ck.params);
    } else {
      TrainConfig pre = pretrain_config(pretrain_seed);
      pre.epochs = pretrain_epochs;
      pre.learning_rate = pretrain_lr;
      pre.batch_size = batch;
      auto trained = train(init_params(arch.make(dataset.dim()), init_seed), dataset, schedule,
                           TimestepPMF::uniform(schedule.T()), pre);
      Provenance prov;
      prov.schedule_fingerprint = schedule.fingerprint();
      prov.seed = pretrain_seed;
      prov.epochs_completed = static_cast<std::uint32_t>(pretrain_epochs);
      prov.normalization = dataset.normalization;
      save_checkpoint(fs::path(out_dir) / "baseline.ckpt", trained.params, prov);
      base = std::move(trained.params);
    }

    SweepConfig cfg;
    cfg.finetune.epochs = epochs;
    cfg.finetune.learning_rate = lr;
    cfg.finetune.batch_size = batch;
    cfg.generation.num_samples = num;
    if (clip == "data") {
      cfg.generation.clip_range = std::pair{dataset.signals.minCoeff(), dataset.signals.maxCoeff()};
    } else if (clip != "none") {
      cfg.generation.clip_range = parse_range(clip, "--clip");
    }
    cfg.eval.pca_components = pca;
    cfg.eval.bins = bins;
    cfg.seeds.clear();
    for (int s = 0; s < seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    cfg.base_seed = base_seed;
    cfg.jobs = jobs;
    cfg.distance = distance == "js_raw" ? DistanceColumn::kJsRaw : DistanceColumn::kMeanL2;

    const auto result = run_sweep(grid, dataset, base, schedule, cfg);
    auto write = [&](const char* name, auto&& fn) {
      Output o((fs::path(out_dir) / name).string(), stdout_);
      fn(o.stream());
      o.finish();
    };
    write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, result); });
    write("correlation.csv", [&](std::ostream& os) { write_correlation_csv(os, result); });
    write("loss_by_width.csv",
          [&](std::ostream& os) { write_loss_by_width_csv(os, loss_by_width_report(result)); });

    stdout_ << "rows=" << result.rows.size() << " failures=" << result.failures.size() << '\n';
    auto show = [&](const char* name, const std::optional<CorrelationResult>& c) {
      stdout_ << name << ' ';
      if (c) {
        stdout_ << "r=" << format_double(c->r) << " p=" << format_double(c->p_value) << '\n';
      } else {
        stdout_ << "undefined\n";
      }
    };
    show("mean_location", result.mean_location_corr);
    show("width", result.width_corr);
  }
};

// Merges config-file entries into the subcommand's argument list. Options
// already on the command line win.
std::vector<std::string> merge_config(CLI::App& sub, std::vector<std::string> args,
                                      const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  std::vector<std::pair<std::string, std::string>> entries;
  try {
    entries = parse_config_text(text.str());
  } catch (const std::runtime_error& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }

  std::set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));

  for (const auto& [key, value] : entries) {
    const CLI::Option* opt = key == "config" ? nullptr : sub.get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw UsageError("config '" + path + "': unknown key '" + key + "' for '" + sub.get_name() + "'");
    if (given.count(key)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        args.push_back("--" + key);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw UsageError("config '" + path + "': key '" + key + "' is a switch; got '" + value + "'");
      }
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected key=value");
    auto key = trim(t.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw std::runtime_error("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    entries.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return entries;
}

std::vector<double> parse_bounds(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_real(trim(item), "--bounds"));
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
      throw UsageError("--bounds: expected a:b:step with a <= b and step > 0, got '" + text + "'");
    const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), "--bounds"));
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence-interval timestep sampling lab for 1D diffusion models", "dgate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dgate 0.1.0");

  ScheduleCmd schedule_cmd;
  AnalyzeCmd analyze_cmd;
  TrainCmd train_cmd;
  GenerateCmd generate_cmd;
  EvalCmd eval_cmd;
  SweepCmd sweep_cmd;

  std::string config_path;
  auto add_sub = [&](const char* name, const char* help, auto& cmd) {
    auto* sub = app.add_subcommand(name, help);
    cmd.add(*sub);
    sub->add_option("--config", config_path, "key=value file; command-line flags win");
    return sub;
  };
  auto* s_schedule = add_sub("schedule", "Dump the noise schedule as CSV", schedule_cmd);
  auto* s_analyze = add_sub("analyze", "Timestep pmf and contribution profile for an interval", analyze_cmd);
  auto* s_train = add_sub("train", "Train or fine-tune a denoiser", train_cmd);
  auto* s_generate = add_sub("generate", "Sample signals from a checkpoint", generate_cmd);
  auto* s_eval = add_sub("eval", "Distances between generated and training signals", eval_cmd);
  auto* s_sweep = add_sub("sweep", "Fine-tune, generate and evaluate over an interval grid", sweep_cmd);

  try {
    std::vector<std::string> argv = args;
    if (!argv.empty()) {
      if (auto* sub = app.get_subcommand_no_throw(argv[0]); sub != nullptr) {
        if (auto path = find_config_path(argv)) argv = merge_config(*sub, argv, *path);
      }
    }
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::Success& e) {  // --help, --help-all, --version
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << " (see --help)\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error[usage]: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error[" << e.kind() << "]: " << e.what() << '\n';
    return kExitRuntime;
  }

  try {
    if (s_schedule->parsed()) schedule_cmd.run(out);
    else if (s_analyze->parsed()) analyze_cmd.run(out);
    else if (s_train->parsed()) train_cmd.run(out);
    else if (s_generate->parsed()) generate_cmd.run(out);
    else if (s_eval->parsed()) eval_cmd.run(out);
    else if (s_sweep->parsed()) sweep_cmd.run(out);
  } catch (const UsageError& e) {
    err << "error[usage]: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error[" << e.kind() << "]: " << msg << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dgate::cli
