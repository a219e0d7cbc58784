#pragma once

#include <map>
#include <string>

#include "scns/limits.hpp"

namespace scns {

// Structured-text run configuration: `key = value` pairs inside named blocks,
// e.g.  grid { d = 1  N = 32 }.  Unknown keys are rejected so typos surface
// as validation errors.
struct RunConfig {
  // grid
  int d = 1;
  int N = 32;
  // params
  RegularizationParams params;
  // noise
  int k_modes = 0;
  double f1 = 0.0;
  double decay = 1.0;
  NoiseFamily family = NoiseFamily::constant;
  std::uint64_t seed_root = 1;
  // initial
  std::string preset = "single_mode";  // constant | single_mode | random_smooth
  double rho0 = 1.0;
  double rho_amp = 0.2;
  int rho_mode = 1;
  double u_amp = 0.1;
  int u_mode = 1;
  std::uint64_t init_seed = 7;
  // run
  double T = 0.1;
  double record_dt = 0.0;
  bool frozen_window = true;
  bool uniform_chi = false;
  bool track_balances = true;
  bool track_mv = false;
  double mv_K = 0.0;
  // ensemble
  EnsembleConfig ensemble;
  // schedule
  LimitScheduleConfig schedule;
  // output
  std::string out_dir = "out";

  TorusGrid make_grid() const;
  NoiseModel make_noise() const;
  FluidState make_initial() const;
  RunOptions make_run_options() const;
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
// Effective configuration, re-parseable to an identical run.
std::string emit_config(const RunConfig& config);

}  // namespace scns
