#pragma once

#include <string>

#include "scns/balances.hpp"
#include "scns/scheme.hpp"

namespace scns {

// One recorded row of the per-path diagnostic time series.
struct TraceRow {
  double t = 0.0;
  double mass = 0.0;
  double e_kin = 0.0, e_press = 0.0, e_eta = 0.0, e_quant = 0.0, e_delta = 0.0,
         e_total = 0.0;
  double bd_total = 0.0;
  double mv_trunc = 0.0, mv_exact = 0.0;
  double min_rho = 0.0, max_rho = 0.0, vacuum_frac = 0.0;
  double u_norm = 0.0, divu_sup = 0.0, chi = 1.0;
  double diss_viscous = 0.0, diss_rot = 0.0;
  double ebal_residual = 0.0, bd_residual = 0.0, mv_residual = 0.0;
  std::array<double, 10> I_cum{};
  int r_exited = 0;
  int retries = 0;
};

struct RunOptions {
  double record_dt = 0.0;       // 0: record every window
  bool track_balances = true;   // energy + B-D accumulators per substep
  bool track_mv_balance = false;
  double mv_K = 0.0;            // 0: 4 * sup rho0
  SchemeOptions scheme;
};

struct PathResult {
  std::vector<TraceRow> rows;
  FluidState final_state;
  bool failed = false;
  Rejection fail_reason = Rejection::none;
  bool r_exited = false;
  double first_r_exit_time = -1.0;
  std::vector<double> divu_sup_per_window;
};

// Integrate one sample path to T, fully deterministic in (seed_root, path_id);
// records diagnostics at the configured cadence and reports balance residuals
// computed from the stepper's own increments.
PathResult run_path(const FluidState& initial, const RegularizationParams& params,
                    const NoiseModel& noise, std::uint64_t path_id, double T,
                    const RunOptions& opts = {},
                    const StepObserver& extra_observer = nullptr);

void write_trace(const std::string& path, const std::vector<TraceRow>& rows);

}  // namespace scns
