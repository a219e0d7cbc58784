#pragma once

#include <map>

#include "scns/driver.hpp"

namespace scns {

struct EnsembleConfig {
  int n_paths = 2;
  std::uint64_t seed_root = 0;   // overrides the noise model's seed when nonzero
  std::vector<double> r_orders = {2.5, 3.0, 4.0};  // moment orders, r > 2
  double horizon = 0.1;
  double record_dt = 0.0;
  int workers = 1;               // must not change any result
  RunOptions run;
};

struct MomentEstimate {
  double value = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap percentile interval
};

struct MomentReport {
  // per functional name ("energy", "bd_entropy", "mv"), per order r:
  // E[ sup_t X(t)^r ] with bootstrap CIs
  std::map<std::string, std::map<double, MomentEstimate>> sup_moments;
  // empirical constants in E[sup E^r] <= C (E[E(0)^r] + 1) and the
  // Mellet-Vasseur analogue
  std::map<double, double> c_hat_energy;
  std::map<double, double> c_hat_mv;
  int n_paths = 0;
  int n_failed = 0;
  int n_r_exited = 0;
  bool reliable = true;  // false when more than 10% of paths failed
};

struct EnsembleResult {
  MomentReport report;
  std::vector<PathResult> paths;  // per-path traces, index == path id
};

// n_paths independent trajectories, deterministic in seed_root and
// independent of the worker count (fixed per-path seeds, sequential
// reduction in path order).
EnsembleResult run_ensemble(const FluidState& initial, const RegularizationParams& params,
                            const NoiseModel& noise, const EnsembleConfig& config);

// Bootstrap percentile CI (10^3 resamples) of the mean of `samples`.
MomentEstimate bootstrap_mean(const std::vector<double>& samples, std::uint64_t seed,
                              int resamples = 1000);

// ---- appendix tool checks ---------------------------------------------------

struct BdgReport {
  double ratio = 0.0;       // E[(M*)^{2m}] / E[<M>^m]
  double ci_lo = 0.0, ci_hi = 0.0;
  double lower = 0.0, upper = 0.0;  // bracket (only certified for m = 1)
  bool bracket_checked = false;
  bool degenerate = false;  // zero martingale
  bool pass = false;
};
// M = int H dW discretized on `steps` uniform steps of [0,T]; H constant.
BdgReport bdg_ratio(int m_order, int n_paths, int steps, double T, double h_scale,
                    std::uint64_t seed);

struct HolderReport {
  double exponent = 0.0;  // fitted slope(alpha)/alpha over dyadic lags
  double slope = 0.0;
  int lags = 0;
  bool ok = false;        // enough samples for the regression
};
// Scaling-exponent regression of log E|X_{t+L} - X_t|^alpha on log L over
// dyadic lags L = dt * 2^j, j in [j0, j1).
HolderReport holder_exponent(const std::vector<std::vector<double>>& paths, double dt,
                             double alpha, int j0, int j1);

// Sampled path families for the regularity check.
std::vector<std::vector<double>> brownian_paths(int n_paths, int steps, double T,
                                                std::uint64_t seed);
std::vector<std::vector<double>> linear_drift_paths(int n_paths, int steps, double T,
                                                    double slope);
// X_t = <q_t, w> along the frozen-density multiplicative momentum process with
// linear drag; the mean reversion pulls the fitted exponent strictly below 1/2.
std::vector<std::vector<double>> momentum_integral_paths(int n_paths, int steps, double T,
                                                         double drag,
                                                         std::uint64_t seed);

enum class ItoCheckKind { deterministic_product, w_squared, independent_pair };
struct ItoReport {
  double mean_residual = 0.0;
  double se = 0.0;
  bool within_3se = false;
};
ItoReport ito_product_check(ItoCheckKind kind, int n_paths, int steps, double T,
                            std::uint64_t seed);

// ---- Euler-Maruyama order estimation ----------------------------------------

enum class EmTestProblem { additive_linear, multiplicative_momentum, zero_noise };
struct OrderReport {
  double order = 0.0;                 // log2(error(dt)/error(dt/2)), averaged
  std::vector<double> errors;         // strong errors per level vs the finest
};
// Coupled-increment refinement study: levels share Brownian paths by summing
// fine increments.
OrderReport em_order_estimate(EmTestProblem problem, int n_paths, int base_steps,
                              int levels, double T, std::uint64_t seed);

// Frozen-density linear noise test (constant coefficient family, no drift):
// returns the ensemble mean of the kinetic energy at T and its standard error,
// plus the closed-form prediction 1/2 q0^2 + (t/2) sum f_k^2 |shape_k|_2^2.
struct FrozenLinearReport {
  double mean = 0.0;
  double se = 0.0;
  double closed_form = 0.0;
  bool within_3se = false;
};
FrozenLinearReport frozen_linear_noise_test(const TorusGrid& grid, int m, double q0,
                                            const NoiseModel& noise, double T, int steps,
                                            int n_paths);

}  // namespace scns
