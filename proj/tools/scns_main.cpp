// Command-line driver: simulate | ensemble | sweep | verify | inspect.
// Exit codes: 0 success, 1 validation error, 2 runtime rejection,
// 3 verification failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "scns/config.hpp"
#include "scns/verify.hpp"

namespace fs = std::filesystem;
using namespace scns;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string preset;
};

RunConfig load_with_overrides(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed_root = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.threads > 0) cfg.ensemble.workers = args.threads;
  if (!args.preset.empty()) cfg.preset = args.preset;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path);
  os << text;
}

int cmd_simulate(const CommonArgs& args) {
  RunConfig cfg = load_with_overrides(args);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/effective_config.txt", emit_config(cfg));

  FluidState initial = cfg.make_initial();
  NoiseModel noise = cfg.make_noise();
  write_checkpoint(cfg.out_dir + "/initial.ckpt", initial, cfg.params);

  PathResult r = run_path(initial, cfg.params, noise, 0, cfg.T, cfg.make_run_options());
  write_trace(cfg.out_dir + "/trace.tsv", r.rows);
  write_checkpoint(cfg.out_dir + "/final.ckpt", r.final_state, cfg.params);

  std::ostringstream summary;
  summary << "status " << (r.failed ? "rejected" : "completed") << "\n";
  summary << "t_final " << r.final_state.t << "\n";
  summary << "records " << r.rows.size() << "\n";
  summary << "r_exited " << (r.r_exited ? 1 : 0) << "\n";
  if (r.r_exited) summary << "first_r_exit_time " << r.first_r_exit_time << "\n";
  summary << "mass_initial " << r.rows.front().mass << "\n";
  summary << "mass_final " << r.rows.back().mass << "\n";
  summary << "energy_final " << r.rows.back().e_total << "\n";
  summary << "ebal_residual " << r.rows.back().ebal_residual << "\n";
  summary << "bd_residual " << r.rows.back().bd_residual << "\n";
  if (r.failed) {
    summary << "failure_reason "
            << (r.fail_reason == Rejection::positivity ? "positivity" : "solver")
            << "\n";
  }
  write_text(cfg.out_dir + "/summary.txt", summary.str());
  if (r.failed) {
    std::cerr << "run rejected; partial trace written to " << cfg.out_dir << "\n";
    return 2;
  }
  std::cout << "trace written to " << cfg.out_dir << "/trace.tsv\n";
  return 0;
}

int cmd_ensemble(const CommonArgs& args) {
  RunConfig cfg = load_with_overrides(args);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/effective_config.txt", emit_config(cfg));

  FluidState initial = cfg.make_initial();
  NoiseModel noise = cfg.make_noise();
  EnsembleConfig ecfg = cfg.ensemble;
  ecfg.horizon = cfg.T;
  ecfg.record_dt = cfg.record_dt;
  ecfg.run = cfg.make_run_options();
  EnsembleResult result = run_ensemble(initial, cfg.params, noise, ecfg);

  fs::create_directories(cfg.out_dir + "/paths");
  for (std::size_t p = 0; p < result.paths.size(); ++p) {
    char name[64];
    std::snprintf(name, sizeof(name), "/paths/path_%04zu.tsv", p);
    write_trace(cfg.out_dir + name, result.paths[p].rows);
  }
  std::ostringstream rep;
  rep << "n_paths " << result.report.n_paths << "\n";
  rep << "n_failed " << result.report.n_failed << "\n";
  rep << "n_r_exited " << result.report.n_r_exited << "\n";
  rep << "reliable " << (result.report.reliable ? 1 : 0) << "\n";
  for (const auto& [name, by_r] : result.report.sup_moments) {
    for (const auto& [r, est] : by_r) {
      rep << "sup_moment " << name << " r " << r << " value " << est.value << " ci "
          << est.ci_lo << " " << est.ci_hi << "\n";
    }
  }
  for (const auto& [r, c] : result.report.c_hat_energy)
    rep << "c_hat_energy r " << r << " " << c << "\n";
  for (const auto& [r, c] : result.report.c_hat_mv)
    rep << "c_hat_mv r " << r << " " << c << "\n";
  write_text(cfg.out_dir + "/ensemble_report.txt", rep.str());
  std::cout << "ensemble report written to " << cfg.out_dir << "/ensemble_report.txt\n";
  return result.report.reliable ? 0 : 2;
}

int cmd_sweep(const CommonArgs& args, bool resume) {
  RunConfig cfg = load_with_overrides(args);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/effective_config.txt", emit_config(cfg));

  FluidState initial = cfg.make_initial();
  NoiseModel noise = cfg.make_noise();
  LimitSchedule sched = build_schedule(cfg.params, cfg.schedule);
  SweepConfig scfg;
  scfg.ensemble = cfg.ensemble;
  scfg.ensemble.horizon = cfg.T;
  scfg.ensemble.record_dt = cfg.record_dt;
  scfg.ensemble.run = cfg.make_run_options();
  scfg.out_dir = cfg.out_dir;
  scfg.resume = resume;
  write_sweep_manifest(cfg.out_dir + "/manifest.txt", sched, scfg);
  ConvergenceReport rep = sweep(initial, noise, sched, scfg);
  write_convergence_report(cfg.out_dir + "/convergence_report.txt", rep);
  std::cout << "sweep report written to " << cfg.out_dir
            << "/convergence_report.txt\n";
  for (const auto& t : rep.tuples)
    if (t.n_failed > 0) return 2;
  return 0;
}

int cmd_verify(const std::string& suite, double tol_scale) {
  auto results = run_verification(suite, tol_scale, &std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? 0 : 3;
}

int cmd_inspect(const std::string& path) {
  CheckpointHeader h = read_checkpoint_header(path);
  std::cout << "version " << h.version << "\n";
  std::cout << "d " << h.d << "\n";
  std::cout << "N " << h.n << "\n";
  std::cout << "m " << h.m << "\n";
  std::cout << "t " << h.t << "\n";
  std::cout << "params_hash " << h.params_hash << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral lab for the regularized stochastic compressible "
               "Navier-Stokes system on the torus"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string suite;
  double tol_scale = 1.0;
  std::string inspect_path;
  bool resume = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", args.config_path, "configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--seed", args.seed, "seed_root override")
        ->each([&](const std::string&) { args.seed_set = true; });
    sub->add_option("--threads", args.threads,
                    "worker count (must not change results)");
    sub->add_option("--preset", args.preset, "initial-condition preset override");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run one path, write trace and checkpoints");
  add_common(sim, true);
  CLI::App* ens = app.add_subcommand("ensemble", "run a Monte Carlo ensemble");
  add_common(ens, true);
  CLI::App* swp = app.add_subcommand("sweep", "run the vanishing-parameter continuation");
  add_common(swp, true);
  swp->add_flag("--resume", resume, "reuse per-tuple results found in the output dir");
  CLI::App* ver = app.add_subcommand("verify", "run the property battery");
  ver->add_option("--suite", suite, "substring filter for check names");
  ver->add_option("--tol-scale", tol_scale,
                  "multiply every tolerance (0 = negative control)");
  CLI::App* ins = app.add_subcommand("inspect", "print checkpoint metadata");
  ins->add_option("file", inspect_path, "checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (ens->parsed()) return cmd_ensemble(args);
    if (swp->parsed()) return cmd_sweep(args, resume);
    if (ver->parsed()) return cmd_verify(suite, tol_scale);
    if (ins->parsed()) return cmd_inspect(inspect_path);
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "runtime rejection: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
