#include "scns/functionals.hpp"

#include <cmath>

namespace scns {

namespace {

// Grid-mean quadrature of a pointwise expression over collocation values.
template <typename Fn>
double qmean(const TorusGrid& g, Fn&& fn) {
  double s = 0.0;
  for (std::int64_t j = 0; j < g.points(); ++j) s += fn(j);
  return s / static_cast<double>(g.points());
}

void require_positive(const SpectralField& rho, const char* who) {
  if (min_value(rho) <= 0.0)
    throw PositivityError(std::string(who) + ": density not positive on the grid");
}

SpectralField map_values(const SpectralField& f, const std::function<double(double)>& fn) {
  return pointwise_map(f, fn, /*dealias_result=*/false);
}

}  // namespace

double bump_profile(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_profile_deriv(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double om = 1.0 - s * s;
  return bump_profile(s) * (-2.0 * s / (om * om));
}

PhiK phi_K(double rho_value, double K) {
  if (!(K > 0.0)) throw ConfigError("phi_K needs K > 0");
  if (rho_value <= K) return {1.0, 0.0};
  if (rho_value >= 2.0 * K) return {0.0, 0.0};
  const double s = (rho_value - K) / K;
  return {bump_profile(s), bump_profile_deriv(s) / K};
}

double varphi_cn(double n) { return std::exp(1.0) * (1.0 + n) * (1.0 + n) - 1.0; }

double varphi_tilde(double y, double n) {
  const double cn = varphi_cn(n);
  if (y < 0.0) y = 0.0;
  if (y < n) return (1.0 + y) * std::log1p(y);
  if (y <= cn)
    return 2.0 * (1.0 + std::log1p(n)) * y - (1.0 + y) * std::log1p(y) +
           2.0 * (std::log1p(n) - n);
  return std::exp(1.0) * (1.0 + n) * (1.0 + n) - 2.0 * n - 2.0;
}

double varphi_tilde_prime(double y, double n) {
  const double cn = varphi_cn(n);
  if (y < 0.0) y = 0.0;
  if (y <= n) return 1.0 + std::log1p(y);
  if (y <= cn) return 1.0 + 2.0 * std::log1p(n) - std::log1p(y);
  return 0.0;
}

double varphi_tilde_double_prime(double y, double n) {
  const double cn = varphi_cn(n);
  if (y < 0.0) y = 0.0;
  if (y <= n) return 1.0 / (1.0 + y);
  if (y <= cn) return -1.0 / (1.0 + y);
  return 0.0;
}

VarphiEval varphi_n(const std::array<double, 3>& u, int dim, double n) {
  double y = 0.0;
  for (int i = 0; i < dim; ++i) y += u[i] * u[i];
  VarphiEval e;
  e.value = varphi_tilde(y, n);
  const double p = varphi_tilde_prime(y, n);
  const double pp = varphi_tilde_double_prime(y, n);
  for (int i = 0; i < dim; ++i) {
    e.gradient[i] = 2.0 * p * u[i];
    for (int j = 0; j < dim; ++j)
      e.hessian[i][j] = 2.0 * (2.0 * pp * u[i] * u[j] + (i == j ? p : 0.0));
  }
  return e;
}

EnergyReport energy(const FluidState& state, const RegularizationParams& params) {
  const TorusGrid& g = state.rho.grid();
  const SpectralField& rho = state.rho;
  const SpectralField& u = state.u;
  EnergyReport r;
  r.kinetic = 0.5 * qmean(g, [&](std::int64_t j) {
    double s = 0.0;
    for (int c = 0; c < g.dim(); ++c) s += u.value(c, j) * u.value(c, j);
    return rho.value(0, j) * s;
  });
  r.pressure_int = (params.a / params.gamma) *
                   qmean(g, [&](std::int64_t j) {
                     return std::pow(rho.value(0, j), params.gamma);
                   });
  if (params.eta > 0.0) {
    require_positive(rho, "energy (eta term)");
    r.eta_part = (params.eta / 10.0) *
                 qmean(g, [&](std::int64_t j) { return std::pow(rho.value(0, j), -10.0); });
  }
  if (params.kappa > 0.0) {
    require_positive(rho, "energy (quantum term)");
    SpectralField gs = gradient(map_values(rho, [](double v) { return std::sqrt(v); }));
    r.quantum_part = 0.5 * params.kappa * inner_product(gs, gs);
  }
  if (params.delta > 0.0) {
    SpectralField gd = gradient(laplacian(rho, 4));
    r.delta_part = 0.5 * params.delta * inner_product(gd, gd);
  }
  r.total = r.kinetic + r.pressure_int + r.eta_part + r.quantum_part + r.delta_part;
  return r;
}

double pressure_potential(const SpectralField& rho, const RegularizationParams& params) {
  return params.a / (params.gamma - 1.0) *
         qmean(rho.grid(), [&](std::int64_t j) {
           const double v = rho.value(0, j);
           return std::pow(v, params.gamma) - v;
         });
}

double balance_energy(const FluidState& state, const RegularizationParams& params) {
  EnergyReport r = energy(state, params);
  double e = r.kinetic + pressure_potential(state.rho, params) + r.eta_part +
             2.0 * r.quantum_part + r.delta_part;
  return e;
}

SpectralField grad_log_rho(const SpectralField& rho) {
  return gradient(pointwise_map(rho, [](double v) { return std::log(v); }, false));
}

BDReport bd_entropy(const FluidState& state, const RegularizationParams& params) {
  const TorusGrid& g = state.rho.grid();
  const SpectralField& rho = state.rho;
  const SpectralField& u = state.u;
  require_positive(rho, "bd_entropy");
  BDReport r;
  SpectralField L = grad_log_rho(rho);
  r.kinetic_mod = 0.5 * qmean(g, [&](std::int64_t j) {
    double s = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
      const double w = u.value(c, j) + L.value(c, j);
      s += w * w;
    }
    return rho.value(0, j) * s;
  });
  r.pressure_pot = pressure_potential(rho, params);
  EnergyReport e = energy(state, params);
  r.eta_part = e.eta_part;
  r.delta_part = e.delta_part;
  if (params.kappa > 0.0) {
    SpectralField gs = gradient(map_values(rho, [](double v) { return std::sqrt(v); }));
    r.quantum_part = 0.5 * params.kappa * inner_product(gs, gs);
  }
  r.log_minus = params.r2 * qmean(g, [&](std::int64_t j) {
    return -std::log(std::min(rho.value(0, j), 1.0));
  });
  r.total = r.kinetic_mod + r.pressure_pot + r.eta_part + r.quantum_part + r.delta_part +
            r.log_minus;

  // dissipation rates
  SpectralField jac = gradient(u);
  const int d = g.dim();
  // 1/2 int (rho/2)|grad u - grad u^T|^2 = 1/4 int rho |A|^2
  r.diss_rot = 0.25 * qmean(g, [&](std::int64_t j) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        const double a = jac.value(i * d + k, j) - jac.value(k * d + i, j);
        s += a * a;
      }
    return rho.value(0, j) * s;
  });
  r.diss_pressure = params.a * params.gamma *
                    qmean(g, [&](std::int64_t j) {
                      double s = 0.0;
                      for (int c = 0; c < d; ++c) s += L.value(c, j) * L.value(c, j);
                      return std::pow(rho.value(0, j), params.gamma) * s;
                    });
  if (params.eta > 0.0) {
    SpectralField g5 = gradient(map_values(rho, [](double v) { return std::pow(v, -5.0); }));
    r.diss_eta = (11.0 / 25.0) * params.eta * inner_product(g5, g5);
  }
  if (params.delta > 0.0) {
    SpectralField l5 = laplacian(rho, 5);
    r.diss_delta = params.delta * inner_product(l5, l5);
  }
  if (params.kappa > 0.0) {
    SpectralField hess = gradient(L);  // grad^2 log rho, d*d components
    r.diss_quantum_hess = 0.5 * params.kappa *
                          qmean(g, [&](std::int64_t j) {
                            double s = 0.0;
                            for (int c = 0; c < d * d; ++c)
                              s += hess.value(c, j) * hess.value(c, j);
                            return rho.value(0, j) * s;
                          });
    r.diss_quantum_grad = params.kappa * qmean(g, [&](std::int64_t j) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += L.value(c, j) * L.value(c, j);
      return rho.value(0, j) * s;
    });
  }
  return r;
}

double balance_bd_entropy(const FluidState& state, const RegularizationParams& params) {
  BDReport r = bd_entropy(state, params);
  return r.kinetic_mod + r.pressure_pot + r.eta_part + 2.0 * r.quantum_part +
         r.delta_part;
}

double mv_functional(const FluidState& state, double n, bool exact) {
  const TorusGrid& g = state.rho.grid();
  return qmean(g, [&](std::int64_t j) {
    double y = 0.0;
    for (int c = 0; c < g.dim(); ++c) y += state.u.value(c, j) * state.u.value(c, j);
    const double w = exact ? (1.0 + y) * std::log1p(y) : varphi_tilde(y, n);
    return state.rho.value(0, j) * w;
  });
}

CutStressPair cut_stress_pair(const FluidState& state, const RegularizationParams& params,
                              double K) {
  const TorusGrid& g = state.rho.grid();
  const int d = g.dim();
  const SpectralField& rho = state.rho;
  const SpectralField& u = state.u;
  require_positive(rho, "cut_stress_pair");

  SpectralField phi = map_values(rho, [&](double v) { return phi_K(v, K).value; });
  SpectralField phip = map_values(rho, [&](double v) { return phi_K(v, K).derivative; });
  SpectralField du = deformation(u);
  SpectralField sq = map_values(rho, [](double v) { return std::sqrt(v); });
  SpectralField dsq = laplacian(sq);
  SpectralField gsq = gradient(sq);
  SpectralField divu = divergence(u);
  SpectralField grho = gradient(rho);

  // S = rho phi (D u + kappa (Delta sqrt rho / sqrt rho) I)
  std::vector<double> svals(d * d * g.points());
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (std::int64_t j = 0; j < g.points(); ++j) {
        double v = du.value(i * d + k, j);
        if (i == k && params.kappa > 0.0)
          v += params.kappa * dsq.value(0, j) / sq.value(0, j);
        svals[(i * d + k) * g.points() + j] = rho.value(0, j) * phi.value(0, j) * v;
      }

  // R, term by term, all pointwise on the grid
  SpectralField grg = gradient(map_values(
      rho, [&](double v) { return std::pow(v, 0.5 * params.gamma); }));
  SpectralField ge = params.eta > 0.0
                         ? gradient(map_values(rho, [](double v) { return std::pow(v, -10.0); }))
                         : SpectralField::zero(g, d);
  SpectralField gl9 = params.delta > 0.0 ? gradient(laplacian(rho, 9))
                                         : SpectralField::zero(g, d);

  std::vector<double> rvals(d * g.points(), 0.0);
  for (std::int64_t j = 0; j < g.points(); ++j) {
    const double rv = rho.value(0, j);
    const double ph = phi.value(0, j);
    const double php = phip.value(0, j);
    double usq = 0.0;
    for (int c = 0; c < d; ++c) usq += u.value(c, j) * u.value(c, j);
    const double rg = std::pow(rv, 0.5 * params.gamma);
    for (int i = 0; i < d; ++i) {
      double v = 0.0;
      v += rv * rv * u.value(i, j) * php * divu.value(0, j);
      v += 2.0 * params.a * rg * grg.value(i, j) * ph;
      // rho (D u) grad(phi_K(rho)), with grad phi = phi' grad rho
      double dphi = 0.0;
      for (int k = 0; k < d; ++k)
        dphi += du.value(i * d + k, j) * php * grho.value(k, j);
      v += rv * dphi;
      v += params.r0 * usq * u.value(i, j) * ph;
      v += params.r1 * rv * usq * u.value(i, j) * ph;
      v += params.r2 * u.value(i, j) * ph;
      if (params.eta > 0.0) v -= (11.0 / 10.0) * params.eta * ge.value(i, j) * ph;
      if (params.delta > 0.0) v -= params.delta * rv * gl9.value(i, j) * ph;
      if (params.kappa > 0.0) {
        v += params.kappa * sq.value(0, j) * php * grho.value(i, j) * dsq.value(0, j);
        v += 2.0 * params.kappa * ph * gsq.value(i, j) * dsq.value(0, j);
      }
      rvals[i * g.points() + j] = v;
    }
  }

  CutStressPair out{SpectralField::from_values(g, d * d, std::move(svals)),
                    SpectralField::from_values(g, d, std::move(rvals))};
  return out;
}

JungelReport jungel_report(const SpectralField& f, int refine) {
  if (min_value(f) <= 0.0) throw PositivityError("jungel_gap: field must be positive");
  SpectralField ff = refine > 1 ? resample(f, f.grid().n() * refine) : f;
  const TorusGrid& g = ff.grid();
  const int d = g.dim();

  SpectralField lg = map_values(ff, [](double v) { return std::log(v); });
  SpectralField hess = gradient(gradient(lg));
  double lhs = qmean(g, [&](std::int64_t j) {
    double s = 0.0;
    for (int c = 0; c < d * d; ++c) s += hess.value(c, j) * hess.value(c, j);
    return ff.value(0, j) * s;
  });

  SpectralField sq = map_values(ff, [](double v) { return std::sqrt(v); });
  SpectralField hs = gradient(gradient(sq));
  double rhs1 = qmean(g, [&](std::int64_t j) {
    double s = 0.0;
    for (int c = 0; c < d * d; ++c) s += hs.value(c, j) * hs.value(c, j);
    return s;
  }) / 7.0;

  SpectralField qr = map_values(ff, [](double v) { return std::pow(v, 0.25); });
  SpectralField gq = gradient(qr);
  double rhs2 = qmean(g, [&](std::int64_t j) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += gq.value(c, j) * gq.value(c, j);
    return s * s;
  }) / 8.0;

  JungelReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs1 + rhs2;
  rep.gap = lhs - rhs1 - rhs2;
  return rep;
}

double jungel_gap(const SpectralField& f, int refine) {
  return jungel_report(f, refine).gap;
}

double quantum_identity_residual(const SpectralField& rho) {
  if (min_value(rho) <= 0.0)
    throw PositivityError("quantum_identity_residual: density must be positive");
  const TorusGrid& g = rho.grid();
  const int d = g.dim();

  SpectralField sq = map_values(rho, [](double v) { return std::sqrt(v); });
  SpectralField dsq = laplacian(sq);
  std::vector<double> ratio(g.points());
  for (std::int64_t j = 0; j < g.points(); ++j)
    ratio[j] = dsq.value(0, j) / sq.value(0, j);
  SpectralField grad_ratio = gradient(SpectralField::from_values(g, 1, std::move(ratio)));
  std::vector<double> avals(d * g.points());
  for (int c = 0; c < d; ++c)
    for (std::int64_t j = 0; j < g.points(); ++j)
      avals[c * g.points() + j] = 2.0 * rho.value(0, j) * grad_ratio.value(c, j);

  SpectralField lg = map_values(rho, [](double v) { return std::log(v); });
  SpectralField hess = gradient(gradient(lg));
  std::vector<double> hvals(d * d * g.points());
  for (int c = 0; c < d * d; ++c)
    for (std::int64_t j = 0; j < g.points(); ++j)
      hvals[c * g.points() + j] = rho.value(0, j) * hess.value(c, j);
  SpectralField b =
      tensor_divergence(SpectralField::from_values(g, d * d, std::move(hvals)));

  double num = 0.0, den = 0.0;
  for (std::int64_t j = 0; j < g.points(); ++j) {
    for (int c = 0; c < d; ++c) {
      const double diff = avals[c * g.points() + j] - b.value(c, j);
      num += diff * diff;
    }
    den += rho.value(0, j) * rho.value(0, j);
  }
  return std::sqrt(num / den);
}

}  // namespace scns
