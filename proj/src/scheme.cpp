#include "scns/scheme.hpp"

#include <cmath>
#include <limits>

#include "scns/functionals.hpp"

namespace scns {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

// (grad rho . grad) u, pointwise contraction of the Jacobian against grad rho.
SpectralField advective_gradient(const SpectralField& rho, const SpectralField& u) {
  const TorusGrid& g = rho.grid();
  const int d = g.dim();
  SpectralField jac = gradient(u);
  SpectralField grho = gradient(rho);
  std::vector<double> vals(d * g.points(), 0.0);
  for (int i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < g.points(); ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += grho.value(k, j) * jac.value(i * d + k, j);
      vals[i * g.points() + j] = s;
    }
  return dealias(SpectralField::from_values(g, d, std::move(vals)));
}
}  // namespace

double chi_r(double norm, double R) {
  if (!(R > 0.0)) throw ConfigError("chi_R needs R > 0");
  if (norm <= R) return 1.0;
  if (norm >= R + 1.0) return 0.0;
  return bump_profile(norm - R);
}

SpectralField DriftBreakdown::total() const {
  SpectralField s = convection;
  for (const SpectralField* f : {&pressure, &viscous, &eta_pressure, &rayleigh,
                                 &drag_cubic, &drag_linear, &eps_cross, &eps_bilap,
                                 &delta_pressure, &quantum})
    s = add(s, *f);
  return s;
}

std::optional<SpectralField> transport_step(const SpectralField& rho,
                                            const SpectralField& u_trunc, double eps,
                                            double dt,
                                            const RegularizationParams& params) {
  SpectralField adv = project(
      scaled(divergence(scale_vector(rho, u_trunc)), -1.0), params.m);
  SpectralField next = integrating_factor(add(rho, scaled(adv, dt)), eps, dt);
  if (min_value(next) < params.rho_floor) return std::nullopt;
  return next;
}

DriftBreakdown momentum_drift(const SpectralField& rho, const SpectralField& u_drift,
                              const RegularizationParams& params, double chi,
                              bool uniform_chi) {
  // With the norm-based cutoff, chi_R(||u||) is a global scalar and the
  // printed placement puts exactly one factor on every term (the damping
  // lines carry theirs through [u]_R); the uniform variant therefore
  // evaluates to the same drift.
  (void)uniform_chi;
  const TorusGrid& g = rho.grid();
  const int m = params.m;
  DriftBreakdown d;
  d.chi = chi;

  const bool needs_positive = params.eta > 0.0 || params.kappa > 0.0;
  if (needs_positive && min_value(rho) < params.rho_floor)
    throw PositivityError("momentum drift: density below floor for singular terms");

  d.convection = scaled(
      project(tensor_divergence(outer_product(scale_vector(rho, u_drift), u_drift)), m),
      -chi);
  d.pressure = scaled(
      project(gradient(pointwise_map(
                  rho, [&](double v) { return params.a * std::pow(v, params.gamma); })),
              m),
      -chi);
  d.viscous =
      scaled(project(tensor_divergence(scale_vector(rho, deformation(u_drift))), m), chi);
  if (params.eta > 0.0) {
    d.eta_pressure = scaled(
        project(gradient(pointwise_map(rho, [](double v) { return std::pow(v, -10.0); })),
                m),
        chi * (11.0 / 10.0) * params.eta);
  } else {
    d.eta_pressure = SpectralField::zero(g, g.dim());
  }
  SpectralField usq = dot_field(u_drift, u_drift);
  d.rayleigh = scaled(project(scale_vector(usq, u_drift), m), -params.r0 * chi);
  d.drag_cubic = scaled(project(scale_vector(rho, scale_vector(usq, u_drift)), m),
                        -params.r1 * chi);
  d.drag_linear = scaled(project(u_drift, m), -params.r2 * chi);
  if (params.eps > 0.0) {
    d.eps_cross = scaled(project(advective_gradient(rho, u_drift), m), -params.eps * chi);
    d.eps_bilap = scaled(project(laplacian(u_drift, 2), m), -params.eps * chi);
  } else {
    d.eps_cross = SpectralField::zero(g, g.dim());
    d.eps_bilap = SpectralField::zero(g, g.dim());
  }
  if (params.delta > 0.0) {
    d.delta_pressure = scaled(
        project(scale_vector(rho, gradient(laplacian(rho, 9))), m), params.delta * chi);
  } else {
    d.delta_pressure = SpectralField::zero(g, g.dim());
  }
  if (params.kappa > 0.0) {
    SpectralField sq = pointwise_map(rho, [](double v) { return std::sqrt(v); }, false);
    SpectralField dsq = laplacian(sq);
    std::vector<double> ratio(g.points());
    for (std::int64_t j = 0; j < g.points(); ++j)
      ratio[j] = dsq.value(0, j) / sq.value(0, j);
    SpectralField rat = dealias(SpectralField::from_values(g, 1, std::move(ratio)));
    d.quantum = scaled(project(scale_vector(rho, gradient(rat)), m), params.kappa * chi);
    // alternative evaluation through div(rho grad^2 log rho)/2
    SpectralField hess = gradient(grad_log_rho(rho));
    SpectralField alt = scaled(
        project(tensor_divergence(scale_vector(rho, hess)), m), 0.5 * params.kappa * chi);
    d.quantum_alt_gap =
        l2_norm(subtract(d.quantum, alt)) / (1.0 + l2_norm(d.quantum));
  } else {
    d.quantum = SpectralField::zero(g, g.dim());
  }
  return d;
}

double stability_dt(const FluidState& state, const RegularizationParams& params,
                    double c_stab) {
  const double tm = kTwoPi * params.m;
  const double rho_max = max_value(state.rho);
  const double rho_min = std::max(min_value(state.rho), params.rho_floor);
  const double u_inf = linf_norm(state.u);
  double denom = 0.0;
  denom += params.eps * tm * tm * tm * tm;
  denom += params.delta * rho_max * std::pow(tm, 20.0);
  denom += params.kappa * tm * tm * tm * tm / rho_min;
  denom += params.a * params.gamma * std::pow(rho_max, params.gamma - 1.0) * tm * tm;
  denom += u_inf * tm;
  denom += params.r0 * u_inf * u_inf;
  denom += params.r1 * rho_max * u_inf * u_inf;
  denom += params.r2;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return c_stab / denom;
}

namespace {

std::vector<SpectralField> applied_noise_fields(const NoiseModel& noise,
                                                const SpectralField& rho,
                                                const SpectralField& u_eval, double chi,
                                                int m) {
  // Pi_m[ rho Pi_m[F_k] ], scaled by the cutoff, exactly as the scheme applies it.
  std::vector<SpectralField> fk = evaluate_coefficients(noise, rho, u_eval);
  for (auto& f : fk) f = scaled(project(scale_vector(rho, project(f, m)), m), chi);
  return fk;
}

}  // namespace

StepOutcome momentum_step(const FluidState& state, const RegularizationParams& params,
                          const NoiseModel& noise, const WienerIncrement& incr, double dt,
                          const SchemeOptions& opts) {
  StepOutcome out;
  out.dt_used = dt;
  const double chi = chi_r(hm_norm(state.u), params.R);
  try {
    DriftBreakdown drift = momentum_drift(state.rho, state.u, params, chi);
    SpectralField q = add(state.q, scaled(drift.total(), dt));
    if (noise.k_modes() > 0) {
      auto ak = applied_noise_fields(noise, state.rho, state.u, chi, params.m);
      for (int k = 0; k < noise.k_modes(); ++k)
        q = add(q, scaled(ak[k], incr.db[k]));
    }
    FluidState next;
    next.u = velocity_from_momentum(state.rho, q, params.m, opts.solver_tol);
    next.rho = state.rho;
    next.q = std::move(q);
    next.t = state.t + dt;
    if (!next.finite() || min_value(next.rho) < params.rho_floor) {
      out.reason = Rejection::positivity;
      out.state = state;
      return out;
    }
    const double norm = hm_norm(next.u);
    out.r_exited = norm > params.R + 1.0;
    out.exit_norm = norm;
    out.state = std::move(next);
    out.accepted = true;
  } catch (const PositivityError&) {
    out.reason = Rejection::positivity;
    out.state = state;
  } catch (const SolverError&) {
    out.reason = Rejection::solver_failure;
    out.state = state;
  }
  return out;
}

StepOutcome window_step(const FluidState& state, const RegularizationParams& params,
                        const NoiseModel& noise, std::uint64_t path_id,
                        std::uint64_t step_base, const SchemeOptions& opts,
                        const StepObserver& observer) {
  StepOutcome out;
  double dt_target = std::min(params.dt, stability_dt(state, params, opts.c_stab));
  dt_target = std::min(dt_target, params.h);

  for (int attempt = 0; attempt <= opts.retry_cap; ++attempt) {
    const int n_sub = static_cast<int>(std::ceil(params.h / dt_target - 1e-12));
    const double dt = params.h / n_sub;
    out.retries = attempt;
    out.dt_used = dt;
    out.r_exited = false;

    SpectralField rho = state.rho;
    SpectralField q = state.q;
    SpectralField u_frozen = state.u;
    double chi = chi_r(hm_norm(u_frozen), params.R);
    bool failed = false;
    Rejection why = Rejection::none;

    for (int j = 0; j < n_sub && !failed; ++j) {
      try {
        SpectralField u_eval = u_frozen;
        if (!opts.frozen_window) {
          u_eval = velocity_from_momentum(rho, q, params.m, opts.solver_tol);
          chi = chi_r(hm_norm(u_eval), params.R);
        }
        FluidState before;
        if (observer) {
          before.rho = rho;
          before.q = q;
          before.u = opts.frozen_window
                         ? velocity_from_momentum(rho, q, params.m, opts.solver_tol)
                         : u_eval;
          before.t = state.t + j * dt;
        }

        DriftBreakdown drift = momentum_drift(rho, u_eval, params, chi);
        auto ak = applied_noise_fields(noise, rho, u_eval, chi, params.m);
        WienerIncrement incr = sample_increment(noise, path_id, step_base + j, dt);

        SpectralField q_next = add(q, scaled(drift.total(), dt));
        for (int k = 0; k < noise.k_modes(); ++k)
          q_next = add(q_next, scaled(ak[k], incr.db[k]));

        auto rho_next = transport_step(rho, scaled(u_eval, chi), params.eps, dt, params);
        if (!rho_next.has_value() || !q_next.finite()) {
          failed = true;
          why = Rejection::positivity;
          break;
        }

        if (observer) {
          FluidState after;
          after.rho = *rho_next;
          after.q = q_next;
          after.u = velocity_from_momentum(*rho_next, q_next, params.m, opts.solver_tol);
          after.t = state.t + (j + 1) * dt;
          StepRecord rec;
          rec.before = &before;
          rec.after = &after;
          rec.drift = &drift;
          rec.applied_noise = &ak;
          rec.increment = &incr;
          rec.dt = dt;
          observer(rec);
        }
        rho = std::move(*rho_next);
        q = std::move(q_next);
      } catch (const PositivityError&) {
        failed = true;
        why = Rejection::positivity;
      } catch (const SolverError&) {
        failed = true;
        why = Rejection::solver_failure;
      }
    }

    if (!failed) {
      try {
        FluidState next;
        next.u = velocity_from_momentum(rho, q, params.m, opts.solver_tol);
        next.rho = std::move(rho);
        next.q = std::move(q);
        next.t = state.t + params.h;
        const double norm = hm_norm(next.u);
        out.r_exited = norm > params.R + 1.0;
        out.exit_norm = norm;
        out.state = std::move(next);
        out.accepted = true;
        out.reason = Rejection::none;
        return out;
      } catch (const SolverError&) {
        failed = true;
        why = Rejection::solver_failure;
      }
    }
    out.reason = why;
    dt_target = dt / 2.0;
  }
  out.accepted = false;
  out.state = state;
  return out;
}

}  // namespace scns
