// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "dgate/error.hpp"
#include "dgate/random.hpp"

namespace dgate {

namespace {

struct CellJob {
  double c_l;
  double c_h;
  std::uint64_t seed;
};

struct CellOutcome {
  std::optional<SweepRow> row;
  std::string error;
};

CellOutcome run_cell(const CellJob& job, const SweepGrid& grid, const SignalDataset& data,
                     const DenoiserParams& baseline, const Schedule& schedule,
                     const SweepConfig& cfg) {
  CellOutcome out;
  try {
    SweepRow row;
    row.c_l = job.c_l;
    row.c_h = job.c_h;
    row.seed = job.seed;
    row.cell_seed = cell_seed(cfg.base_seed, job.c_l, job.c_h, job.seed);

    TrainConfig tc = cfg.finetune;
    tc.ci = CIConfig{job.c_l, job.c_h, grid.z};
    tc.seed = derive_seed(row.cell_seed, {0x7472});
    auto trained = train(baseline, data, schedule, TimestepPMF::from_ci(*tc.ci, schedule.T()), tc);
    row.epoch_losses = trained.report.epoch_mean_loss;
    row.final_loss = trained.report.final_loss();

    GenerationConfig gc = cfg.generation;
    gc.seed = derive_seed(row.cell_seed, {0x67656e});
    const Eigen::MatrixXd generated = ddpm_sample(trained.params, schedule, gc);
    row.eval = evaluate(generated, data.signals, cfg.eval);
    out.row = std::move(row);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

std::vector<double> default_bounds(int T) {
  std::vector<double> b;
  for (int i = 1; i <= 10; ++i) b.push_back(static_cast<double>(T) * i / 10.0);
  return b;
}

SweepGrid build_grid(const std::vector<double>& bounds, double z, int T) {
  if (bounds.size() < 2) throw InvalidArgument("sweep grid: need at least two bounds");
  if (!(z > 0.0)) throw InvalidArgument("sweep grid: z must be positive");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!std::isfinite(bounds[i]) || bounds[i] < 0.0 || bounds[i] > T) {
      std::ostringstream msg;
      msg << "sweep grid: bound " << bounds[i] << " outside [0, " << T << "]";
      throw InvalidArgument(msg.str());
    }
    if (i > 0 && !(bounds[i] > bounds[i - 1]))
      throw InvalidArgument("sweep grid: bounds must be strictly increasing");
  }
  SweepGrid grid;
  grid.bounds = bounds;
  grid.z = z;
  for (std::size_t i = 0; i < bounds.size(); ++i)
    for (std::size_t j = i + 1; j < bounds.size(); ++j) grid.pairs.emplace_back(bounds[i], bounds[j]);
  return grid;
}

std::uint64_t cell_seed(std::uint64_t base_seed, double c_l, double c_h, std::uint64_t replicate) {
  return derive_seed(base_seed, {std::bit_cast<std::uint64_t>(c_l),
                                 std::bit_cast<std::uint64_t>(c_h), replicate});
}

double SweepResult::distance_of(const SweepRow& row) const {
  if (distance == DistanceColumn::kJsRaw) {
    if (!row.eval.js_raw) throw InvalidArgument("sweep: js_raw distance was not evaluated");
    return *row.eval.js_raw;
  }
  return row.eval.mean_l2;
}

void compute_correlations(SweepResult& result) {
  result.mean_location_corr.reset();
  result.width_corr.reset();
  if (result.rows.size() < 3) return;
  std::vector<double> loc, width, dist;
  for (const auto& row : result.rows) {
    loc.push_back(row.mean_location());
    width.push_back(row.width());
    dist.push_back(result.distance_of(row));
  }
  auto try_corr = [&](const std::vector<double>& x) -> std::optional<CorrelationResult> {
    try {
      return pearson_with_ci(x, dist);
    } catch (const InvalidArgument&) {
      return std::nullopt;
    }
  };
  result.mean_location_corr = try_corr(loc);
  result.width_corr = try_corr(width);
}

SweepResult run_sweep(const SweepGrid& grid, const SignalDataset& data,
                      const DenoiserParams& baseline, const Schedule& schedule,
                      const SweepConfig& cfg) {
  if (cfg.seeds.empty()) throw InvalidArgument("sweep: need at least one seed");
  if (grid.pairs.empty()) throw InvalidArgument("sweep: grid has no pairs");
  cfg.finetune.validate();
  cfg.generation.validate();

  std::vector<CellJob> jobs;
  for (const auto& [lo, hi] : grid.pairs) {
    if (lo < 0.0 || hi > schedule.T())
      throw InvalidArgument("sweep: grid pair outside the schedule horizon");
    for (std::uint64_t s : cfg.seeds) jobs.push_back({lo, hi, s});
  }

  std::vector<CellOutcome> outcomes(jobs.size());
  const int workers = std::clamp(cfg.jobs, 1, static_cast<int>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      outcomes[i] = run_cell(jobs[i], grid, data, baseline, schedule, cfg);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  SweepResult result;
  result.distance = cfg.distance;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].row) {
      result.rows.push_back(std::move(*outcomes[i].row));
    } else {
      result.failures.push_back({jobs[i].c_l, jobs[i].c_h, jobs[i].seed, outcomes[i].error});
    }
  }
  if (result.failures.size() * 10 > jobs.size()) {
    const auto& f = result.failures.front();
    std::ostringstream msg;
    msg << "sweep: " << result.failures.size() << " of " << jobs.size()
        << " cells failed (limit 10%); first failure at [" << f.c_l << ", " << f.c_h
        << "] seed " << f.seed << ": " << f.message;
    throw Error("sweep_failed", msg.str());
  }
  compute_correlations(result);
  return result;
}

std::map<double, std::vector<WidthLossRow>> loss_by_width_report(const SweepResult& result) {
  std::map<double, std::vector<WidthLossRow>> table;
  for (const auto& row : result.rows)
    table[row.width()].push_back({row.mean_location(), row.c_l, row.c_h, row.seed, row.final_loss});
  for (auto& [width, rows] : table)
    std::stable_sort(rows.begin(), rows.end(), [](const WidthLossRow& a, const WidthLossRow& b) {
      return a.mean_location < b.mean_location;
    });
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "c_l,c_h,mean_location,width,seed,final_loss,mean_l2,wasserstein_c1,wasserstein_c2,"
         "js_c1,js_c2,js_raw\n";
  auto component = [](const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? fmt(v[i]) : std::string();
  };
  for (const auto& row : result.rows) {
    out << fmt(row.c_l) << ',' << fmt(row.c_h) << ',' << fmt(row.mean_location()) << ','
        << fmt(row.width()) << ',' << row.seed << ',' << fmt(row.final_loss) << ','
        << fmt(row.eval.mean_l2) << ',' << component(row.eval.wasserstein_per_component, 0) << ','
        << component(row.eval.wasserstein_per_component, 1) << ','
        << component(row.eval.js_per_component, 0) << ','
        << component(row.eval.js_per_component, 1) << ','
        << (row.eval.js_raw ? fmt(*row.eval.js_raw) : std::string()) << '\n';
  }
}

void write_correlation_csv(std::ostream& out, const SweepResult& result) {
  out << "covariate,distance,n,r,ci_low,ci_high,p_value\n";
  const char* dist = result.distance == DistanceColumn::kJsRaw ? "js_raw" : "mean_l2";
  auto line = [&](const char* name, const std::optional<CorrelationResult>& c) {
    out << name << ',' << dist << ',';
    if (c) {
      out << c->n << ',' << fmt(c->r) << ',' << fmt(c->ci_low) << ',' << fmt(c->ci_high) << ','
          << fmt(c->p_value) << '\n';
    } else {
      out << result.rows.size() << ",,,,\n";
    }
  };
  line("mean_location", result.mean_location_corr);
  line("width", result.width_corr);
}

void write_loss_by_width_csv(std::ostream& out,
                             const std::map<double, std::vector<WidthLossRow>>& table) {
  out << "width,mean_location,c_l,c_h,seed,final_loss\n";
  for (const auto& [width, rows] : table)
    for (const auto& r : rows)
      out << fmt(width) << ',' << fmt(r.mean_location) << ',' << fmt(r.c_l) << ',' << fmt(r.c_h)
          << ',' << r.seed << ',' << fmt(r.final_loss) << '\n';
}

}  // namespace dgate
