#include "irsmec/experiments.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "irsmec/channel.hpp"

namespace irsmec {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::filesystem::path ensure_out_dir(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

/// Runs fn(0..count-1) on a small worker pool; each index is handled by
/// exactly one worker. The first exception wins and is rethrown after the
/// pool drains.
void run_parallel(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int pool = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, std::min(pool, count));
  if (pool == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  const auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(pool));
  for (int i = 0; i < pool; ++i) workers.emplace_back(work);
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path) {
    out_.open(path, std::ios::trunc);
    if (!out_) throw IoError("cannot write " + path.string());
    out_ << header << '\n';
  }

  void row(const std::string& line) { out_ << line << '\n'; }

  void close() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_.string());
    out_.close();
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_manifest(const std::filesystem::path& path, const char* command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::filesystem::path>& files) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "command = " << command << '\n';
  out << "library = irsmec " << library_version << '\n';
  out << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << '\n';
  out << "channel_seed_rule = base seed plus trial index\n";
  out << "initial_point_protocol = fresh random draws per (realization, restart)\n";
  out << "files =";
  for (const auto& f : files) out << ' ' << f.filename().string();
  out << '\n';
  out << "--- config ---\n";
  out << dump_config(cfg);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string channel_file_name(int n, std::uint64_t seed) {
  return "channels_n" + std::to_string(n) + "_s" + std::to_string(seed) + ".txt";
}

const char* mode_name(IrsMode mode) {
  switch (mode) {
    case IrsMode::None: return "none";
    case IrsMode::Random: return "random";
    case IrsMode::Optimized: return "optimized";
  }
  return "?";
}

const char* status_name(SumRatioStatus s) {
  switch (s) {
    case SumRatioStatus::Converged: return "converged";
    case SumRatioStatus::MaxIterations: return "max_iterations";
    case SumRatioStatus::Infeasible: return "infeasible";
  }
  return "?";
}

}  // namespace

CommandOutput cmd_gen_channels(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);

  struct Item {
    int n;
    std::uint64_t seed;
    std::filesystem::path path;
  };
  std::vector<Item> items;
  for (int n : cfg.n_elements)
    for (int t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(t);
      items.push_back({n, seed, dir / channel_file_name(n, seed)});
    }

  run_parallel(static_cast<int>(items.size()), cfg.threads, [&](int i) {
    const Item& it = items[static_cast<size_t>(i)];
    save_channels(generate_channels(make_geometry(cfg, it.n), it.seed), it.path);
  });

  CommandOutput out;
  for (const auto& it : items) out.files.push_back(it.path);
  const auto manifest = dir / "gen_channels_manifest.txt";
  write_manifest(manifest, "gen-channels", cfg, out.files);
  out.files.push_back(manifest);
  return out;
}

CommandOutput cmd_feas_trace(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);
  const int n = cfg.n_elements.front();
  const ChannelSet ch = generate_channels(make_geometry(cfg, n), cfg.seed);
  // One shared starting point across the floor sweep; offset keeps the
  // draw decoupled from the channel realization at the same seed.
  const PhaseVector phi0 = random_phases(n, cfg.seed + 0x517CC1B727220A95ULL);

  const std::vector<double> floors = sweep_floors(cfg);
  std::vector<std::vector<double>> traces(floors.size());
  run_parallel(static_cast<int>(floors.size()), cfg.threads, [&](int i) {
    const RVector target = RVector::Constant(cfg.users, floors[static_cast<size_t>(i)]);
    traces[static_cast<size_t>(i)] =
        feasibility_check_single(ch, target, phi0, cfg.feasibility).alpha_trace;
  });

  CommandOutput out;
  const auto csv_path = dir / "feas_trace.csv";
  CsvFile csv(csv_path, "floor,iteration,alpha");
  for (size_t i = 0; i < floors.size(); ++i)
    for (size_t it = 0; it < traces[i].size(); ++it)
      csv.row(fmt(floors[i]) + ',' + std::to_string(it) + ',' + fmt(traces[i][it]));
  csv.close();
  out.files.push_back(csv_path);
  const auto manifest = dir / "feas_trace_manifest.txt";
  write_manifest(manifest, "feas-trace", cfg, out.files);
  out.files.push_back(manifest);
  return out;
}

CommandOutput cmd_feas_prob(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);

  struct Cell {
    int n;
    IrsMode mode;
  };
  const std::vector<double> floors = sweep_floors(cfg);
  std::vector<Cell> grid;
  for (int n : cfg.n_elements)
    for (IrsMode m : {IrsMode::None, IrsMode::Random, IrsMode::Optimized})
      grid.push_back({n, m});

  std::vector<std::vector<double>> prob(grid.size());
  run_parallel(static_cast<int>(grid.size()), cfg.threads, [&](int i) {
    const Cell& c = grid[static_cast<size_t>(i)];
    prob[static_cast<size_t>(i)] = feasibility_probability_sweep(
        make_geometry(cfg, c.n), floors, cfg.trials, cfg.seed, c.mode, cfg.feasibility);
  });

  CommandOutput out;
  const auto csv_path = dir / "feas_prob.csv";
  CsvFile csv(csv_path, "n,floor,mode,probability");
  for (size_t i = 0; i < grid.size(); ++i)
    for (size_t j = 0; j < floors.size(); ++j)
      csv.row(std::to_string(grid[i].n) + ',' + fmt(floors[j]) + ',' + mode_name(grid[i].mode) +
              ',' + fmt(prob[i][j]));
  csv.close();
  out.files.push_back(csv_path);
  const auto manifest = dir / "feas_prob_manifest.txt";
  write_manifest(manifest, "feas-prob", cfg, out.files);
  out.files.push_back(manifest);
  return out;
}

CommandOutput cmd_optimize(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);
  const int n = cfg.n_elements.front();
  const double floor = cfg.optimize_floor();
  const OffloadEconomy economy = make_economy(cfg, floor);

  struct TrialOut {
    SumRatioResult res;
    double random_objective = 0.0;
    bool random_defined = false;  // all random-phase rates positive
    bool random_feasible = false;
  };
  std::vector<TrialOut> outs(static_cast<size_t>(cfg.trials));

  run_parallel(cfg.trials, cfg.threads, [&](int t) {
    TrialOut& o = outs[static_cast<size_t>(t)];
    const std::uint64_t trial_seed = cfg.seed + static_cast<std::uint64_t>(t);
    const ChannelSet ch = generate_channels(make_geometry(cfg, n), trial_seed);
    SumRatioOptions opts = cfg.sumratio;
    opts.feasibility.seed = trial_seed;
    o.res = optimize(ch, economy, opts);

    const PhaseVector random_phi = random_phases(n, trial_seed ^ 0xD1B54A32D192ED03ULL);
    const RVector random_rates = rates(ch, random_phi);
    o.random_feasible = ((random_rates - economy.rate_floor).array() >= -1e-6).all();
    if ((random_rates.array() > 0.0).all()) {
      o.random_defined = true;
      o.random_objective = transmit_cost_objective(economy, random_rates);
    }
  });

  CommandOutput out;
  const auto trace_path = dir / "optimize_trace.csv";
  CsvFile trace(trace_path, "trial,t,objective,delta,min_rate_slack,inner_iterations");
  for (int t = 0; t < cfg.trials; ++t) {
    const SumRatioResult& r = outs[static_cast<size_t>(t)].res;
    for (size_t i = 0; i < r.objective_trace.size(); ++i)
      trace.row(std::to_string(t) + ',' + std::to_string(i + 1) + ',' +
                fmt(r.objective_trace[i]) + ',' + fmt(r.delta_pre_trace[i]) + ',' +
                fmt(r.min_slack_trace[i]) + ',' + std::to_string(r.inner_iterations[i]));
  }
  trace.close();
  out.files.push_back(trace_path);

  std::string header =
      "trial,channel_seed,status,newton_iterations,objective,earning,start_objective,"
      "random_objective,random_feasible,delta,min_rate_slack";
  for (int k = 0; k < cfg.users; ++k) header += ",rate_" + std::to_string(k);
  const auto summary_path = dir / "optimize_summary.csv";
  CsvFile summary(summary_path, header);
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialOut& o = outs[static_cast<size_t>(t)];
    const SumRatioResult& r = o.res;
    std::string row = std::to_string(t) + ',' +
                      std::to_string(cfg.seed + static_cast<std::uint64_t>(t)) + ',' +
                      status_name(r.status) + ',' + std::to_string(r.newton_iterations) + ',';
    if (r.status != SumRatioStatus::Infeasible) {
      row += fmt(transmit_cost_objective(economy, r.final_rates));
      row += ',' + fmt(r.earning) + ',' + fmt(r.start_cost);
    } else {
      row += ",,";
    }
    row += ',';
    if (o.random_defined) row += fmt(o.random_objective);
    row += ',';
    row += o.random_feasible ? '1' : '0';
    if (r.status != SumRatioStatus::Infeasible && !r.delta_pre_trace.empty()) {
      row += ',' + fmt(r.delta_pre_trace.back()) + ',' + fmt(r.min_slack_trace.back());
    } else {
      row += ",,";
    }
    for (int k = 0; k < cfg.users; ++k) {
      row += ',';
      if (r.status != SumRatioStatus::Infeasible) row += fmt(r.final_rates(k));
    }
    summary.row(row);
  }
  summary.close();
  out.files.push_back(summary_path);

  const auto manifest = dir / "optimize_manifest.txt";
  write_manifest(manifest, "optimize", cfg, out.files);
  out.files.push_back(manifest);
  return out;
}

}  // namespace irsmec
