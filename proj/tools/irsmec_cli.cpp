// Experiment driver: channel generation, feasibility sweeps, and the
// earning maximization, all steered by a key = value config file with
// command-line overrides for the common knobs.
//
// Exit codes: 0 success, 2 bad config, 3 I/O trouble, 4 solver failure.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "irsmec/experiments.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string out_dir;
  int n_elements = 0;
  double rate_min = 0, rate_max = 0, rate_step = 0, rate_floor = 0;
  int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted offloading experiments"};
  app.require_subcommand(1);

  Overrides ov;
  const auto o_config = app.add_option("--config", ov.config_path, "config file (key = value)");
  const auto o_seed = app.add_option("--seed", ov.seed, "base RNG seed");
  const auto o_trials = app.add_option("--trials", ov.trials, "Monte-Carlo realizations");
  const auto o_out = app.add_option("--out", ov.out_dir, "output directory");
  const auto o_n = app.add_option("--n-elements", ov.n_elements, "surface size (overrides the config list)");
  const auto o_rmin = app.add_option("--rate-min", ov.rate_min, "floor sweep start, nats");
  const auto o_rmax = app.add_option("--rate-max", ov.rate_max, "floor sweep end, nats");
  const auto o_rstep = app.add_option("--rate-step", ov.rate_step, "floor sweep step, nats");
  const auto o_rfloor = app.add_option("--rate-floor", ov.rate_floor, "common floor for optimize");
  const auto o_threads = app.add_option("--threads", ov.threads, "worker pool size, 0 = auto");

  auto* gen = app.add_subcommand("gen-channels", "write channel realizations to disk");
  auto* trace = app.add_subcommand("feas-trace", "per-floor feasibility search trace");
  auto* prob = app.add_subcommand("feas-prob", "feasibility probability over the (N, floor) grid");
  auto* optim = app.add_subcommand("optimize", "earning maximization per realization");
  for (auto* sub : {gen, trace, prob, optim}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    irsmec::ExperimentConfig cfg;
    if (*o_config) cfg = irsmec::load_config(ov.config_path);
    if (*o_seed) cfg.seed = ov.seed;
    if (*o_trials) cfg.trials = ov.trials;
    if (*o_out) cfg.out_dir = ov.out_dir;
    if (*o_n) cfg.n_elements = {ov.n_elements};
    if (*o_rmin) cfg.rate_min = ov.rate_min;
    if (*o_rmax) cfg.rate_max = ov.rate_max;
    if (*o_rstep) cfg.rate_step = ov.rate_step;
    if (*o_rfloor) cfg.rate_floor = ov.rate_floor;
    if (*o_threads) cfg.threads = ov.threads;
    cfg.feasibility.seed = cfg.seed;
    cfg.sumratio.feasibility = cfg.feasibility;
    cfg.sumratio.qcqp = cfg.feasibility.qcqp;
    cfg.validate();

    irsmec::CommandOutput result;
    if (gen->parsed()) result = irsmec::cmd_gen_channels(cfg);
    else if (trace->parsed()) result = irsmec::cmd_feas_trace(cfg);
    else if (prob->parsed()) result = irsmec::cmd_feas_prob(cfg);
    else result = irsmec::cmd_optimize(cfg);

    for (const auto& f : result.files) std::cout << f.string() << '\n';
    return 0;
  } catch (const irsmec::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 4;
  }
}
