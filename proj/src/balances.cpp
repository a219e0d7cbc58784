#include "scns/balances.hpp"

#include <cmath>

namespace scns {

namespace {

template <typename Fn>
double qmean(const TorusGrid& g, Fn&& fn) {
  double s = 0.0;
  for (std::int64_t j = 0; j < g.points(); ++j) s += fn(j);
  return s / static_cast<double>(g.points());
}

// quadrature of a.b over components
double qdot(const SpectralField& a, const SpectralField& b) {
  return inner_product(a, b);
}

}  // namespace

void EnergyBalanceAccumulator::observe(const StepRecord& rec) {
  const FluidState& s = *rec.before;
  const TorusGrid& g = s.rho.grid();
  const int d = g.dim();
  const double dt = rec.dt;
  const double chi = rec.drift->chi;
  const RegularizationParams& p = params_;

  const double e_before = balance_energy(s, p);
  const double e_after = balance_energy(*rec.after, p);

  // named dissipation rates at the pre-step state
  double diss = 0.0;
  {
    SpectralField du = deformation(s.u);
    diss += chi * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d * d; ++c) t += du.value(c, j) * du.value(c, j);
      return s.rho.value(0, j) * t;
    });
    double u4 = qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += s.u.value(c, j) * s.u.value(c, j);
      return t * t;
    });
    double ru4 = qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += s.u.value(c, j) * s.u.value(c, j);
      return s.rho.value(0, j) * t * t;
    });
    double u2 = qdot(s.u, s.u);
    diss += chi * (p.r0 * u4 + p.r1 * ru4 + p.r2 * u2);
    if (p.eps > 0.0) {
      SpectralField lu = laplacian(s.u);
      diss += chi * p.eps * qdot(lu, lu);
      SpectralField gg = gradient(pointwise_map(
          s.rho, [&](double v) { return std::pow(v, 0.5 * p.gamma); }, false));
      diss += p.eps * (4.0 * p.a / p.gamma) * qdot(gg, gg);
      if (p.eta > 0.0) {
        SpectralField g5 = gradient(pointwise_map(
            s.rho, [](double v) { return std::pow(v, -5.0); }, false));
        diss += p.eps * p.eta * (11.0 / 25.0) * qdot(g5, g5);
      }
      if (p.delta > 0.0) {
        SpectralField l5 = laplacian(s.rho, 5);
        diss += p.eps * p.delta * qdot(l5, l5);
      }
      if (p.kappa > 0.0) {
        SpectralField hess = gradient(grad_log_rho(s.rho));
        diss += 0.5 * p.eps * p.kappa * qmean(g, [&](std::int64_t j) {
          double t = 0.0;
          for (int c = 0; c < d * d; ++c) t += hess.value(c, j) * hess.value(c, j);
          return s.rho.value(0, j) * t;
        });
      }
    }
  }

  // Ito correction and martingale increment from the applied noise fields
  double ito = 0.0, mart = 0.0;
  for (std::size_t k = 0; k < rec.applied_noise->size(); ++k) {
    const SpectralField& ak = (*rec.applied_noise)[k];
    ito += 0.5 * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += ak.value(c, j) * ak.value(c, j);
      return t / s.rho.value(0, j);
    });
    mart += qdot(s.u, ak) * rec.increment->db[k];
  }

  // cutoff remainder: the printed eps-cross cancellation needs chi == 1
  double chi_rem = 0.0;
  if (p.eps > 0.0 && chi != 1.0) {
    SpectralField lr = laplacian(s.rho);
    chi_rem = 0.5 * p.eps * (chi - 1.0) * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += s.u.value(c, j) * s.u.value(c, j);
      return lr.value(0, j) * t;
    });
  }

  diss_cum_ += dt * diss;
  ito_cum_ += dt * ito;
  mart_cum_ += mart;
  residual_ += (e_after - e_before) + dt * diss - dt * ito - mart - dt * chi_rem;
}

void BDBalanceAccumulator::observe(const StepRecord& rec) {
  const FluidState& s = *rec.before;
  const TorusGrid& g = s.rho.grid();
  const int d = g.dim();
  const double dt = rec.dt;
  const double chi = rec.drift->chi;
  const RegularizationParams& p = params_;

  const double e_before = balance_bd_entropy(s, p);
  const double e_after = balance_bd_entropy(*rec.after, p);

  SpectralField L = grad_log_rho(s.rho);
  SpectralField jac = gradient(s.u);
  SpectralField m_field = divergence(s.q);
  SpectralField lr = laplacian(s.rho);

  // dissipation block
  double diss = 0.0;
  {
    // rotation part 1/2 int (rho/2) |grad u - grad u^T|^2
    diss += chi * 0.25 * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
          double a = jac.value(i * d + k, j) - jac.value(k * d + i, j);
          t += a * a;
        }
      return s.rho.value(0, j) * t;
    });
    diss += chi * p.a * p.gamma * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += L.value(c, j) * L.value(c, j);
      return std::pow(s.rho.value(0, j), p.gamma) * t;
    });
    double u4 = qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += s.u.value(c, j) * s.u.value(c, j);
      return t * t;
    });
    double ru4 = qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += s.u.value(c, j) * s.u.value(c, j);
      return s.rho.value(0, j) * t * t;
    });
    diss += chi * (p.r0 * u4 + p.r1 * ru4 + p.r2 * qdot(s.u, s.u));
    if (p.eta > 0.0) {
      SpectralField g5 = gradient(pointwise_map(
          s.rho, [](double v) { return std::pow(v, -5.0); }, false));
      diss += (chi + p.eps) * (11.0 / 25.0) * p.eta * qdot(g5, g5);
    }
    if (p.delta > 0.0) {
      SpectralField l5 = laplacian(s.rho, 5);
      diss += (chi + p.eps) * p.delta * qdot(l5, l5);
    }
    if (p.kappa > 0.0) {
      SpectralField hess = gradient(L);
      double hq = qmean(g, [&](std::int64_t j) {
        double t = 0.0;
        for (int c = 0; c < d * d; ++c) t += hess.value(c, j) * hess.value(c, j);
        return s.rho.value(0, j) * t;
      });
      diss += (chi + p.eps) * 0.5 * p.kappa * hq;
    }
    if (p.eps > 0.0) {
      SpectralField lu = laplacian(s.u);
      diss += chi * p.eps * qdot(lu, lu);
      SpectralField gg = gradient(pointwise_map(
          s.rho, [&](double v) { return std::pow(v, 0.5 * p.gamma); }, false));
      diss += p.eps * (4.0 * p.a / p.gamma) * qdot(gg, gg);
    }
  }

  // I terms (deterministic rates; the dW entries accumulate realized sums)
  double I4 = 0.0, I5 = 0.0, I6 = 0.0, I7 = 0.0;
  if (p.eps > 0.0) {
    SpectralField glr = gradient(lr);
    // I4 carries the full grad(log rho)-weighted diffusion rate of the
    // |grad rho|^2 / rho part: grad rho . grad lap rho / rho - (1/2)|L|^2 lap rho.
    I4 = p.eps * qmean(g, [&](std::int64_t j) {
      double l2 = 0.0, gdot = 0.0;
      for (int c = 0; c < d; ++c) {
        l2 += L.value(c, j) * L.value(c, j);
        gdot += glr.value(c, j) * L.value(c, j);
      }
      return gdot - 0.5 * l2 * lr.value(0, j);
    });
    I5 = -chi * p.eps * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int i = 0; i < d; ++i) {
        double adv = 0.0;
        for (int k = 0; k < d; ++k)
          adv += s.rho.value(0, j) * L.value(k, j) * jac.value(i * d + k, j);
        t += adv * L.value(i, j);
      }
      return t;
    });
    I6 = -p.eps * qmean(g, [&](std::int64_t j) {
      return m_field.value(0, j) * lr.value(0, j) / s.rho.value(0, j);
    });
    SpectralField dlu = laplacian(s.u);
    SpectralField gdl = gradient(laplacian(pointwise_map(
        s.rho, [](double v) { return std::log(v); }, false)));
    I7 = -chi * p.eps * qdot(dlu, gdl);
  }
  double I8 = 0.0, I9 = 0.0, I10 = 0.0;
  {
    double uu_l = qmean(g, [&](std::int64_t j) {
      double usq = 0.0, ul = 0.0;
      for (int c = 0; c < d; ++c) {
        usq += s.u.value(c, j) * s.u.value(c, j);
        ul += s.u.value(c, j) * L.value(c, j);
      }
      return usq * ul;
    });
    double ruu_l = qmean(g, [&](std::int64_t j) {
      double usq = 0.0, ul = 0.0;
      for (int c = 0; c < d; ++c) {
        usq += s.u.value(c, j) * s.u.value(c, j);
        ul += s.u.value(c, j) * L.value(c, j);
      }
      return s.rho.value(0, j) * usq * ul;
    });
    I8 = -chi * p.r0 * uu_l;
    I9 = -chi * p.r1 * ruu_l;
    I10 = -chi * p.r2 * qdot(s.u, L);
  }

  double I1 = 0.0, I2 = 0.0, I3 = 0.0;
  for (std::size_t k = 0; k < rec.applied_noise->size(); ++k) {
    const SpectralField& ak = (*rec.applied_noise)[k];
    I1 += qdot(s.u, ak) * rec.increment->db[k];
    I2 += 0.5 * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += ak.value(c, j) * ak.value(c, j);
      return t / s.rho.value(0, j);
    });
    I3 += qdot(L, ak) * rec.increment->db[k];
  }

  double chi_rem = 0.0;
  if (p.eps > 0.0 && chi != 1.0) {
    chi_rem = 0.5 * p.eps * (chi - 1.0) * qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += s.u.value(c, j) * s.u.value(c, j);
      return lr.value(0, j) * t;
    });
  }

  I_[0] += I1;
  I_[1] += dt * I2;
  I_[2] += I3;
  I_[3] += dt * I4;
  I_[4] += dt * I5;
  I_[5] += dt * I6;
  I_[6] += dt * I7;
  I_[7] += dt * I8;
  I_[8] += dt * I9;
  I_[9] += dt * I10;
  diss_cum_ += dt * diss;
  residual_ += (e_after - e_before) + dt * diss -
               (I1 + dt * I2 + I3 + dt * (I4 + I5 + I6 + I7 + I8 + I9 + I10)) -
               dt * chi_rem;
}

void MVBalanceAccumulator::observe(const StepRecord& rec) {
  const FluidState& s = *rec.before;
  const TorusGrid& g = s.rho.grid();
  const int d = g.dim();
  const double dt = rec.dt;
  const double chi = rec.drift->chi;
  const RegularizationParams& p = params_;

  auto mv_weight = [&](const FluidState& st) {
    return qmean(g, [&](std::int64_t j) {
      const double ph = phi_K(st.rho.value(0, j), K_).value;
      double y = 0.0;
      for (int c = 0; c < d; ++c) {
        const double v = ph * st.u.value(c, j);
        y += v * v;
      }
      return st.rho.value(0, j) * varphi_tilde(y, n_);
    });
  };
  const double m_before = mv_weight(s);
  const double m_after = mv_weight(*rec.after);

  CutStressPair cs = cut_stress_pair(s, p, K_);

  // pointwise gradient field of phi_n at v, and phi factors
  std::vector<double> gvals(d * g.points());
  std::vector<double> phivals(g.points()), phipvals(g.points());
  for (std::int64_t j = 0; j < g.points(); ++j) {
    auto pk = phi_K(s.rho.value(0, j), K_);
    phivals[j] = pk.value;
    phipvals[j] = pk.derivative;
    std::array<double, 3> v{0, 0, 0};
    for (int c = 0; c < d; ++c) v[c] = pk.value * s.u.value(c, j);
    auto e = varphi_n(v, d, n_);
    for (int c = 0; c < d; ++c) gvals[c * g.points() + j] = e.gradient[c];
  }
  SpectralField Gfld = SpectralField::from_values(g, d, std::move(gvals));
  SpectralField Gjac = gradient(Gfld);

  double det_rate = -qdot(Gfld, cs.R);
  det_rate -= qmean(g, [&](std::int64_t j) {
    double t = 0.0;
    for (int c = 0; c < d * d; ++c) t += cs.S.value(c, j) * Gjac.value(c, j);
    return t;
  });
  det_rate *= chi;

  // Ito hessian term and martingale from the applied noise
  double ito = 0.0, mart = 0.0;
  for (std::size_t k = 0; k < rec.applied_noise->size(); ++k) {
    const SpectralField& ak = (*rec.applied_noise)[k];
    ito += qmean(g, [&](std::int64_t j) {
      std::array<double, 3> v{0, 0, 0};
      for (int c = 0; c < d; ++c) v[c] = phivals[j] * s.u.value(c, j);
      auto e = varphi_n(v, d, n_);
      double t = 0.0;
      for (int i = 0; i < d; ++i)
        for (int c = 0; c < d; ++c)
          t += ak.value(i, j) * e.hessian[i][c] * ak.value(c, j);
      return 0.5 * phivals[j] * phivals[j] * t / s.rho.value(0, j);
    });
    double pair = qmean(g, [&](std::int64_t j) {
      double t = 0.0;
      for (int c = 0; c < d; ++c)
        t += phivals[j] * Gfld.value(c, j) * ak.value(c, j);
      return t;
    });
    mart += pair * rec.increment->db[k];
  }

  double eps_ext = 0.0;
  if (p.eps > 0.0) {
    SpectralField lr = laplacian(s.rho);
    eps_ext = p.eps * qmean(g, [&](std::int64_t j) {
      double y = 0.0, gu = 0.0;
      for (int c = 0; c < d; ++c) {
        const double v = phivals[j] * s.u.value(c, j);
        y += v * v;
        gu += Gfld.value(c, j) * s.u.value(c, j);
      }
      const double hrho = varphi_tilde(y, n_) +
                          (s.rho.value(0, j) * phipvals[j] - phivals[j]) * gu;
      return hrho * lr.value(0, j);
    });
  }

  ito_cum_ += dt * ito;
  mart_cum_ += mart;
  residual_ += (m_after - m_before) - dt * (det_rate + ito + eps_ext) - mart;
}

void WeakFormBattery::observe(const StepRecord& rec) {
  const FluidState& s = *rec.before;
  const TorusGrid& g = s.rho.grid();
  const int d = g.dim();
  const double dt = rec.dt;
  const double chi = rec.drift->chi;
  const RegularizationParams& p = params_;
  const double t = s.t;

  for (std::size_t i = 0; i < tests_.size(); ++i) {
    const WeakFormTest& tf = tests_[i];
    const double th = tf.theta(t);
    const double thd = tf.theta_dot(t);
    double rate = 0.0;
    if (!tf.momentum) {
      rate += thd * inner_product(s.rho, tf.w);
      SpectralField gw = gradient(tf.w);
      rate += th * chi * qmean(g, [&](std::int64_t j) {
        double a = 0.0;
        for (int c = 0; c < d; ++c)
          a += s.rho.value(0, j) * s.u.value(c, j) * gw.value(c, j);
        return a;
      });
      if (p.eps > 0.0) rate += th * p.eps * inner_product(s.rho, laplacian(tf.w));
    } else {
      rate += thd * inner_product(s.q, tf.w);
      SpectralField gw = gradient(tf.w);  // d*d jacobian of the test field
      // convection: + chi <rho u x u, grad w>
      rate += th * chi * qmean(g, [&](std::int64_t j) {
        double a = 0.0;
        for (int ii = 0; ii < d; ++ii)
          for (int jj = 0; jj < d; ++jj)
            a += s.rho.value(0, j) * s.u.value(ii, j) * s.u.value(jj, j) *
                 gw.value(ii * d + jj, j);
        return a;
      });
      // pressure: + chi <a rho^gamma, div w>
      SpectralField dw = divergence(tf.w);
      rate += th * chi * p.a * qmean(g, [&](std::int64_t j) {
        return std::pow(s.rho.value(0, j), p.gamma) * dw.value(0, j);
      });
      // viscous: - chi <rho D u, grad w>
      SpectralField du = deformation(s.u);
      rate -= th * chi * qmean(g, [&](std::int64_t j) {
        double a = 0.0;
        for (int c = 0; c < d * d; ++c)
          a += s.rho.value(0, j) * du.value(c, j) * gw.value(c, j);
        return a;
      });
      // eta pressure: - chi (11/10) eta <rho^-10, div w>
      if (p.eta > 0.0) {
        rate -= th * chi * (11.0 / 10.0) * p.eta * qmean(g, [&](std::int64_t j) {
          return std::pow(s.rho.value(0, j), -10.0) * dw.value(0, j);
        });
      }
      // damping terms, direct pairing
      rate -= th * chi * qmean(g, [&](std::int64_t j) {
        double usq = 0.0;
        for (int c = 0; c < d; ++c) usq += s.u.value(c, j) * s.u.value(c, j);
        double a = 0.0;
        for (int c = 0; c < d; ++c)
          a += (p.r0 * usq * s.u.value(c, j) +
                p.r1 * s.rho.value(0, j) * usq * s.u.value(c, j) +
                p.r2 * s.u.value(c, j)) *
               tf.w.value(c, j);
        return a;
      });
      if (p.eps > 0.0) {
        // eps cross: direct; eps bilaplacian: onto the test function
        SpectralField jac = gradient(s.u);
        SpectralField grho = gradient(s.rho);
        rate -= th * chi * p.eps * qmean(g, [&](std::int64_t j) {
          double a = 0.0;
          for (int ii = 0; ii < d; ++ii) {
            double adv = 0.0;
            for (int k = 0; k < d; ++k)
              adv += grho.value(k, j) * jac.value(ii * d + k, j);
            a += adv * tf.w.value(ii, j);
          }
          return a;
        });
        rate -= th * chi * p.eps * inner_product(s.u, laplacian(tf.w, 2));
      }
      if (p.delta > 0.0) {
        SpectralField g9 = gradient(laplacian(s.rho, 9));
        rate += th * chi * p.delta * qmean(g, [&](std::int64_t j) {
          double a = 0.0;
          for (int c = 0; c < d; ++c)
            a += s.rho.value(0, j) * g9.value(c, j) * tf.w.value(c, j);
          return a;
        });
      }
      if (p.kappa > 0.0) {
        // quantum term in its divergence form: -(kappa/2) <rho grad^2 log rho, grad w>
        SpectralField hess = gradient(grad_log_rho(s.rho));
        rate -= th * chi * 0.5 * p.kappa * qmean(g, [&](std::int64_t j) {
          double a = 0.0;
          for (int c = 0; c < d * d; ++c)
            a += s.rho.value(0, j) * hess.value(c, j) * gw.value(c, j);
          return a;
        });
      }
      // noise increments
      for (std::size_t k = 0; k < rec.applied_noise->size(); ++k)
        acc_[i] += th * inner_product((*rec.applied_noise)[k], tf.w) *
                   rec.increment->db[k];
    }
    acc_[i] += dt * rate;
  }
}

WeakFormBattery::Result WeakFormBattery::finalize(const FluidState& initial,
                                                  const FluidState& final_state) const {
  Result r;
  for (std::size_t i = 0; i < tests_.size(); ++i) {
    const WeakFormTest& tf = tests_[i];
    double boundary;
    if (!tf.momentum) {
      boundary = tf.theta(final_state.t) * inner_product(final_state.rho, tf.w) -
                 tf.theta(initial.t) * inner_product(initial.rho, tf.w);
    } else {
      boundary = tf.theta(final_state.t) * inner_product(final_state.q, tf.w) -
                 tf.theta(initial.t) * inner_product(initial.q, tf.w);
    }
    const double res = std::abs(boundary - acc_[i]);
    if (tf.momentum)
      r.momentum_residual = std::max(r.momentum_residual, res);
    else
      r.mass_residual = std::max(r.mass_residual, res);
  }
  return r;
}

}  // namespace scns
