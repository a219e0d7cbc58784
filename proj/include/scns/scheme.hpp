#pragma once

#include <optional>

#include "scns/noise.hpp"
#include "scns/state.hpp"

namespace scns {

// Velocity-norm cutoff: 1 below R, 0 above R+1, smooth bump bridge between.
double chi_r(double norm, double R);

// Every named term of the momentum drift, evaluated in H_m.  The stepper
// applies exactly the sum of these fields; balance bookkeeping reads them
// back term by term.
struct DriftBreakdown {
  SpectralField convection;      // -div(rho [u*]_R x u*)
  SpectralField pressure;        // -chi grad(a rho^gamma)
  SpectralField viscous;         // +chi div(rho D u*)
  SpectralField eta_pressure;    // +chi (11/10) eta grad rho^-10
  SpectralField rayleigh;        // -r0 |u*|^2 [u*]_R
  SpectralField drag_cubic;      // -r1 rho |u*|^2 [u*]_R
  SpectralField drag_linear;     // -r2 [u*]_R
  SpectralField eps_cross;       // -chi eps (grad rho . grad) u*
  SpectralField eps_bilap;       // -chi eps Delta^2 u*
  SpectralField delta_pressure;  // +chi delta rho grad Delta^9 rho
  SpectralField quantum;         // +chi kappa rho grad(Delta sqrt rho / sqrt rho)
  double chi = 1.0;
  // | quantum evaluated by both printed formulas |_2 gap, logged per call
  double quantum_alt_gap = 0.0;

  SpectralField total() const;
};

enum class Rejection { none, positivity, r_exit, solver_failure };

struct StepOutcome {
  FluidState state;
  bool accepted = false;
  double dt_used = 0.0;
  Rejection reason = Rejection::none;
  bool r_exited = false;
  double exit_norm = 0.0;
  int retries = 0;
};

struct SchemeOptions {
  bool frozen_window = true;   // freeze u at window starts as printed
  bool uniform_chi = false;    // apply chi_R to every drift term uniformly
  double solver_tol = 1e-10;   // Gram-solve relative residual
  int retry_cap = 8;           // dt halvings per window before giving up
  double c_stab = 0.5;         // explicit-term stability constant
};

// Advance the density by dt: exact integrating factor for eps Laplacian,
// explicit dealiased advection by the (already truncated) frozen velocity.
// Returns nothing when the new density dips below rho_floor.
std::optional<SpectralField> transport_step(const SpectralField& rho,
                                            const SpectralField& u_trunc, double eps,
                                            double dt, const RegularizationParams& params);

// All drift terms at (rho, u_drift), with the convection/damping slots fed by
// u_transport = chi * u_drift and the scalar chi multiplying the terms the
// printed scheme truncates.
DriftBreakdown momentum_drift(const SpectralField& rho, const SpectralField& u_drift,
                              const RegularizationParams& params, double chi,
                              bool uniform_chi = false);

// One Euler-Maruyama momentum substep plus velocity recovery.
StepOutcome momentum_step(const FluidState& state, const RegularizationParams& params,
                          const NoiseModel& noise, const WienerIncrement& incr, double dt,
                          const SchemeOptions& opts = {});

// Largest stable explicit step at this state.
double stability_dt(const FluidState& state, const RegularizationParams& params,
                    double c_stab = 0.5);

// Per-substep record handed to observers (balance accumulators, weak forms).
struct StepRecord {
  const FluidState* before = nullptr;
  const FluidState* after = nullptr;
  const DriftBreakdown* drift = nullptr;
  const std::vector<SpectralField>* applied_noise = nullptr;  // chi Pi_m[G_k]
  const WienerIncrement* increment = nullptr;
  double dt = 0.0;
};
using StepObserver = std::function<void(const StepRecord&)>;

// One frozen-velocity window [t, t+h]: transport + momentum substeps with u
// frozen at the window start, recovery and R-exit detection at the end.  On a
// positivity rejection the window is retried with halved dt up to the cap.
StepOutcome window_step(const FluidState& state, const RegularizationParams& params,
                        const NoiseModel& noise, std::uint64_t path_id,
                        std::uint64_t step_base, const SchemeOptions& opts,
                        const StepObserver& observer = nullptr);

}  // namespace scns
