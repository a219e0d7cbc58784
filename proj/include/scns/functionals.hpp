#pragma once

#include <array>
#include <functional>

#include "scns/spectral.hpp"
#include "scns/state.hpp"

namespace scns {

class PositivityError : public std::runtime_error {
 public:
  explicit PositivityError(const std::string& what) : std::runtime_error(what) {}
};

// ---- smooth cutoff profiles -------------------------------------------------
// The standard bump exp(1 - 1/(1-s^2)) bridging 1 (s <= 0) to 0 (s >= 1);
// chi_R and phi_K are both rescalings of it.
double bump_profile(double s);
double bump_profile_deriv(double s);

struct PhiK {
  double value = 0.0;
  double derivative = 0.0;
};
// 1 below K, 0 above 2K, smooth monotone bridge with |phi'| <= 4/K.
PhiK phi_K(double rho_value, double K);

// ---- Mellet-Vasseur truncation family ---------------------------------------
// Branch index C_n = e (1+n)^2 - 1.
double varphi_tilde(double y, double n);
double varphi_tilde_prime(double y, double n);
double varphi_tilde_double_prime(double y, double n);
double varphi_cn(double n);

struct VarphiEval {
  double value = 0.0;
  std::array<double, 3> gradient{0, 0, 0};
  std::array<std::array<double, 3>, 3> hessian{};
};
VarphiEval varphi_n(const std::array<double, 3>& u, int dim, double n);

// ---- scalar functionals ------------------------------------------------------
struct EnergyReport {
  double kinetic = 0.0;       // 1/2 int rho |u|^2
  double pressure_int = 0.0;  // (a/gamma) int rho^gamma
  double eta_part = 0.0;      // (eta/10) int rho^-10
  double quantum_part = 0.0;  // (kappa/2) int |grad sqrt(rho)|^2
  double delta_part = 0.0;    // (delta/2) int |grad Delta^4 rho|^2
  double total = 0.0;
};
EnergyReport energy(const FluidState& state, const RegularizationParams& params);

// Exact potential for the balance bookkeeping: a/(gamma-1) int (rho^gamma - rho).
double pressure_potential(const SpectralField& rho, const RegularizationParams& params);
// Balance-normalized energy: kinetic + a/(gamma-1)(rho^gamma - rho) + eta/10 rho^-10
// + kappa |grad sqrt rho|^2 + delta/2 |grad Delta^4 rho|^2.  The quantum weight is
// kappa (not kappa/2): that is the normalization under which the semi-discrete
// balance closes exactly.
double balance_energy(const FluidState& state, const RegularizationParams& params);

struct BDReport {
  double kinetic_mod = 0.0;    // 1/2 int rho |u + grad log rho|^2
  double pressure_pot = 0.0;   // a/(gamma-1) int (rho^gamma - rho)
  double eta_part = 0.0;
  double quantum_part = 0.0;   // (kappa/2) int |grad sqrt rho|^2 (printed weight)
  double delta_part = 0.0;
  double log_minus = 0.0;      // r2 int log_- rho
  double total = 0.0;
  // dissipation rates at this state
  double diss_rot = 0.0;            // 1/2 int (rho/2)|grad u - grad u^T|^2
  double diss_pressure = 0.0;       // a gamma int rho^gamma |grad log rho|^2
  double diss_eta = 0.0;            // (11/25) eta int |grad rho^-5|^2
  double diss_delta = 0.0;          // delta int |Delta^5 rho|^2
  double diss_quantum_hess = 0.0;   // (kappa/2) int rho |grad^2 log rho|^2
  double diss_quantum_grad = 0.0;   // kappa int rho |grad log rho|^2 (variant)
};
BDReport bd_entropy(const FluidState& state, const RegularizationParams& params);

// Balance-normalized B-D entropy (quantum weight kappa, no log_- term).
double balance_bd_entropy(const FluidState& state, const RegularizationParams& params);

// int rho phi_n(|u|^2) dx, or the exact (1+|u|^2) ln(1+|u|^2) weight.
double mv_functional(const FluidState& state, double n, bool exact = false);

// phi_K-cut stress and remainder of the truncated momentum identity.
struct CutStressPair {
  SpectralField S;  // rho phi_K(rho) (D u + kappa (Delta sqrt rho / sqrt rho) I), d*d
  SpectralField R;  // remainder, d components
};
CutStressPair cut_stress_pair(const FluidState& state, const RegularizationParams& params,
                              double K);

// LHS - RHS of int f |grad^2 log f|^2 >= 1/7 int |grad^2 sqrt f|^2 + 1/8 int |grad f^(1/4)|^4,
// evaluated on a refined grid.
struct JungelReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};
JungelReport jungel_report(const SpectralField& f, int refine = 2);
double jungel_gap(const SpectralField& f, int refine = 2);

// || 2 rho grad(Delta sqrt rho / sqrt rho) - div(rho grad^2 log rho) ||_2 / ||rho||_2.
double quantum_identity_residual(const SpectralField& rho);

// grad log rho evaluated pseudo-spectrally on the full band (diagnostics).
SpectralField grad_log_rho(const SpectralField& rho);

}  // namespace scns
