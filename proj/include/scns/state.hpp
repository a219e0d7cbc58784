#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scns/spectral.hpp"

namespace scns {

// Every constant of the regularized scheme in one place.
struct RegularizationParams {
  double a = 1.0;        // pressure constant, p = a rho^gamma
  double gamma = 1.5;    // adiabatic exponent, > 1 (theorems need > 6/5)
  double eps = 0.0;      // artificial density viscosity
  double kappa = 0.0;    // quantum (Bohm) coefficient
  double delta = 0.0;    // high-order pressure delta rho grad Delta^9 rho
  double eta = 0.0;      // negative-power pressure (11/10) eta grad rho^-10
  double r0 = 0.0;       // Rayleigh damping -r0 |u|^2 u
  double r1 = 0.0;       // cubic drag      -r1 rho |u|^2 u
  double r2 = 0.0;       // linear drag     -r2 u
  int m = 8;             // Galerkin cutoff
  double R = 1e9;        // velocity-norm truncation level
  int n_mv = 8;          // Mellet-Vasseur truncation index
  double h = 1e-3;       // iteration window length
  double dt = 1e-3;      // inner time step
  double rho_floor = 1e-8;

  void validate(const TorusGrid& grid) const;
  std::uint64_t hash(const TorusGrid& grid) const;
};

struct FluidState {
  SpectralField rho;  // scalar density
  SpectralField q;    // momentum rho u
  SpectralField u;    // velocity, consistent with (rho, q) through the Gram solve
  double t = 0.0;

  double mass() const { return field_mean(rho); }
  double min_rho() const { return min_value(rho); }
  bool finite() const { return rho.finite() && q.finite() && u.finite(); }
};

// Inverse of the mass operator M[rho]: find u in H_m with
// <rho u, phi> = <q, phi> for every phi in H_m.  Conjugate gradients on the
// SPD Gram operator z -> Pi_m(rho z); one application costs a dealiased
// product plus a projection.
SpectralField velocity_from_momentum(const SpectralField& rho, const SpectralField& q,
                                     int m, double tol = 1e-10, int max_iter = -1);

// Forward direction M[rho](u) = Pi_m(rho u), dealiased.
SpectralField momentum_from_velocity(const SpectralField& rho, const SpectralField& u,
                                     int m);

struct PositivityReport {
  double min_value = 0.0;
  double vacuum_fraction = 0.0;
};
PositivityReport positivity_report(const SpectralField& rho, double threshold);

// Two-sided parabolic maximum-principle envelope
//   inf rho0 * exp(-int ||div u||_inf)  <=  rho(t)  <=  sup rho0 * exp(+int ...).
// The source prints the same decaying factor on both sides; the standard
// two-sided version is implemented here.
struct MaxPrincipleBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};
MaxPrincipleBounds maximum_principle_bounds(const SpectralField& rho0,
                                            std::span<const double> divu_sup,
                                            double dt);

// Project raw initial data onto H_m; if the projected density dips below
// rho_floor, clip, rescale to the original total mass, and re-project.
FluidState prepare_initial(const SpectralField& rho_raw, const SpectralField& u_raw,
                           const RegularizationParams& params);

// Binary checkpoint: header {magic, version, d, N, m, t, params hash} then
// little-endian complex coefficient arrays for rho and each component of q.
void write_checkpoint(const std::string& path, const FluidState& state,
                      const RegularizationParams& params);
struct CheckpointHeader {
  std::uint32_t version = 0;
  std::uint32_t d = 0, n = 0, m = 0;
  double t = 0.0;
  std::uint64_t params_hash = 0;
};
CheckpointHeader read_checkpoint_header(const std::string& path);
FluidState read_checkpoint(const std::string& path, const RegularizationParams& params);

}  // namespace scns
