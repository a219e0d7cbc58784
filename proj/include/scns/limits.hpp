#pragma once

#include "scns/montecarlo.hpp"

namespace scns {

// One parameter tuple of the continuation; vanishing coefficients are carried
// in log space because the faithful exponents underflow double precision.
struct LimitTuple {
  int stage = 0;             // 1..4
  int index = 0;             // position within the stage
  RegularizationParams params;
  double log10_delta = -std::numeric_limits<double>::infinity();
  double log10_eta = -std::numeric_limits<double>::infinity();
  double log10_r0 = -std::numeric_limits<double>::infinity();
  double K_mv = 0.0;         // phi_K level coupled to kappa in stage 2
  int n = 0;                 // truncation index in stage 3
  bool underflowed = false;  // a faithful-mode coefficient is numerically zero
};

struct LimitScheduleConfig {
  // stage 1: eps halving sequence
  int stage1_count = 3;
  double eps0 = 1e-4;
  // stage 2: kappa halving with K = kappa^{-3/4}
  int stage2_count = 3;
  double kappa0 = 1e-4;
  // stage 3: joint (n, delta = n^-alpha, eta = n^-beta, r0 coupled)
  std::vector<int> stage3_n = {2, 3, 4};
  double alpha = 77.0;  // must exceed 76
  double beta = 3.0;    // must exceed 2400/947
  bool illustrative = false;  // replace (alpha, beta) by small stand-ins, labeled
  double alpha_illustrative = 2.0;
  double beta_illustrative = 1.5;
  // stage 4: (r1, r2) halvings
  int stage4_count = 4;
  double r10 = 0.4, r20 = 0.4;
};

struct LimitSchedule {
  std::vector<LimitTuple> tuples;  // stages in order 1,2,3,4
  bool illustrative = false;
};

// Explicit tuples for every run of every stage; exponent constraints are
// validated against the printed inequalities (alpha > 76, beta > 2400/947).
LimitSchedule build_schedule(const RegularizationParams& base,
                             const LimitScheduleConfig& config);

struct TupleDiagnostics {
  int stage = 0;
  int index = 0;
  double mean_energy = 0.0;       // ensemble mean of sup_t E
  double mean_bd = 0.0;
  double mean_mv = 0.0;
  double mean_vacuum_frac = 0.0;
  double final_state_distance = 0.0;  // L2 distance to the previous tuple's states
  int n_failed = 0;
};

struct ConvergenceReport {
  std::vector<TupleDiagnostics> tuples;
  // successive |diag(j+1) - diag(j)| per stage, per diagnostic
  struct CauchyRow {
    int stage = 0;
    std::vector<double> energy_diffs;
    std::vector<double> state_diffs;
    bool decreasing = false;  // diffs shrink monotonically (factor handled by caller)
  };
  std::vector<CauchyRow> cauchy;
  bool stages_in_order = true;
};

struct SweepConfig {
  EnsembleConfig ensemble;
  std::string out_dir;  // empty: no files written
  bool resume = false;  // reuse per-tuple result files found in out_dir
};

// Matched-seed sweep across the schedule: every tuple runs the same ensemble
// with common random numbers so parameter effects are isolated from the noise
// realization.
ConvergenceReport sweep(const FluidState& initial, const NoiseModel& noise,
                        const LimitSchedule& schedule, const SweepConfig& config);

void write_sweep_manifest(const std::string& path, const LimitSchedule& schedule,
                          const SweepConfig& config);
void write_convergence_report(const std::string& path, const ConvergenceReport& report);

}  // namespace scns
