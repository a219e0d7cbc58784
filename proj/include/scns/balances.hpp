#pragma once

#include <array>

#include "scns/functionals.hpp"
#include "scns/scheme.hpp"

namespace scns {

// Discrete balance bookkeeping driven by the stepper's own increments: every
// accumulator consumes the same drift fields, applied-noise fields and
// Brownian increments the scheme applied, so the residuals measure only the
// time-discretization error of the printed identities.

// Energy balance:  dE + (dissipation) dt = (Ito correction) dt + martingale.
// E here is the balance-normalized energy (pressure potential a/(gamma-1),
// quantum weight kappa).
class EnergyBalanceAccumulator {
 public:
  explicit EnergyBalanceAccumulator(const RegularizationParams& params)
      : params_(params) {}
  void observe(const StepRecord& rec);

  double residual() const { return residual_; }
  double dissipation() const { return diss_cum_; }
  double ito_correction() const { return ito_cum_; }
  double martingale() const { return mart_cum_; }

 private:
  RegularizationParams params_;
  double residual_ = 0.0, diss_cum_ = 0.0, ito_cum_ = 0.0, mart_cum_ = 0.0;
};

// Stochastic B-D entropy balance with the I_1..I_10 source decomposition.
class BDBalanceAccumulator {
 public:
  explicit BDBalanceAccumulator(const RegularizationParams& params) : params_(params) {}
  void observe(const StepRecord& rec);

  double residual() const { return residual_; }
  const std::array<double, 10>& I_cumulative() const { return I_; }
  double dissipation() const { return diss_cum_; }

 private:
  RegularizationParams params_;
  double residual_ = 0.0, diss_cum_ = 0.0;
  std::array<double, 10> I_{};  // I_1..I_10 cumulative (dW terms as realized sums)
};

// Ito evolution of int rho phi_n(v), v = phi_K(rho) u, against the cut stress
// pair (S, R).
class MVBalanceAccumulator {
 public:
  MVBalanceAccumulator(const RegularizationParams& params, double K, double n)
      : params_(params), K_(K), n_(n) {}
  void observe(const StepRecord& rec);

  double residual() const { return residual_; }
  double ito_term() const { return ito_cum_; }
  double martingale() const { return mart_cum_; }

 private:
  RegularizationParams params_;
  double K_ = 1.0, n_ = 1.0;
  double residual_ = 0.0, ito_cum_ = 0.0, mart_cum_ = 0.0;
};

// One space-time test function theta(t) w(x); w scalar for the continuity
// equation, d components for the momentum equation.
struct WeakFormTest {
  SpectralField w;
  std::function<double(double)> theta;
  std::function<double(double)> theta_dot;
  bool momentum = false;
};

// Distributional residuals of the continuity and momentum equations for the
// configured artificial system, with every space derivative moved onto the
// test function where the weak form does so.
class WeakFormBattery {
 public:
  WeakFormBattery(const RegularizationParams& params, std::vector<WeakFormTest> tests)
      : params_(params), tests_(std::move(tests)), acc_(tests_.size(), 0.0) {}
  void observe(const StepRecord& rec);

  struct Result {
    double mass_residual = 0.0;      // max over mass tests
    double momentum_residual = 0.0;  // max over momentum tests
  };
  Result finalize(const FluidState& initial, const FluidState& final_state) const;

 private:
  RegularizationParams params_;
  std::vector<WeakFormTest> tests_;
  std::vector<double> acc_;
};

}  // namespace scns
