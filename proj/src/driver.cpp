#include "scns/driver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace scns {

namespace {

TraceRow make_row(const FluidState& s, const RegularizationParams& p,
                  const EnergyBalanceAccumulator& ebal, const BDBalanceAccumulator& bd,
                  const MVBalanceAccumulator* mv, double divu_sup, int r_exited,
                  int retries) {
  TraceRow r;
  r.t = s.t;
  r.mass = s.mass();
  EnergyReport e = energy(s, p);
  r.e_kin = e.kinetic;
  r.e_press = e.pressure_int;
  r.e_eta = e.eta_part;
  r.e_quant = e.quantum_part;
  r.e_delta = e.delta_part;
  r.e_total = e.total;
  if (s.min_rho() > 0.0) {
    BDReport b = bd_entropy(s, p);
    r.bd_total = b.total;
    r.diss_rot = b.diss_rot;
  }
  r.mv_trunc = mv_functional(s, p.n_mv);
  r.mv_exact = mv_functional(s, p.n_mv, true);
  auto pos = positivity_report(s.rho, 10.0 * p.rho_floor);
  r.min_rho = pos.min_value;
  r.max_rho = max_value(s.rho);
  r.vacuum_frac = pos.vacuum_fraction;
  r.u_norm = hm_norm(s.u);
  r.divu_sup = divu_sup;
  r.chi = chi_r(r.u_norm, p.R);
  SpectralField du = deformation(s.u);
  double visc = 0.0;
  const TorusGrid& g = s.rho.grid();
  for (std::int64_t j = 0; j < g.points(); ++j) {
    double t = 0.0;
    for (int c = 0; c < g.dim() * g.dim(); ++c) t += du.value(c, j) * du.value(c, j);
    visc += s.rho.value(0, j) * t;
  }
  r.diss_viscous = visc / static_cast<double>(g.points());
  r.ebal_residual = ebal.residual();
  r.bd_residual = bd.residual();
  r.mv_residual = mv ? mv->residual() : 0.0;
  r.I_cum = bd.I_cumulative();
  r.r_exited = r_exited;
  r.retries = retries;
  return r;
}

}  // namespace

PathResult run_path(const FluidState& initial, const RegularizationParams& params,
                    const NoiseModel& noise, std::uint64_t path_id, double T,
                    const RunOptions& opts, const StepObserver& extra_observer) {
  params.validate(initial.rho.grid());
  PathResult result;

  EnergyBalanceAccumulator ebal(params);
  BDBalanceAccumulator bdbal(params);
  const double mv_K = opts.mv_K > 0.0 ? opts.mv_K : 4.0 * max_value(initial.rho);
  MVBalanceAccumulator mvbal(params, mv_K, params.n_mv);

  StepObserver observer = nullptr;
  const bool need_obs = opts.track_balances || opts.track_mv_balance ||
                        static_cast<bool>(extra_observer);
  if (need_obs) {
    observer = [&](const StepRecord& rec) {
      if (opts.track_balances && rec.before->min_rho() > 0.0) {
        ebal.observe(rec);
        bdbal.observe(rec);
      }
      if (opts.track_mv_balance && rec.before->min_rho() > 0.0) mvbal.observe(rec);
      if (extra_observer) extra_observer(rec);
    };
  }

  FluidState state = initial;
  result.rows.push_back(make_row(state, params,
                                 ebal, bdbal,
                                 opts.track_mv_balance ? &mvbal : nullptr, 0.0, 0, 0));

  const std::uint64_t kStepsPerWindow = 1ull << 20;
  std::uint64_t window = 0;
  double next_record = opts.record_dt > 0.0 ? state.t + opts.record_dt : state.t;
  const double t_end = initial.t + T;

  while (state.t < t_end - 1e-12 * std::max(1.0, t_end)) {
    StepOutcome out = window_step(state, params, noise, path_id,
                                  window * kStepsPerWindow, opts.scheme, observer);
    ++window;
    if (!out.accepted) {
      result.failed = true;
      result.fail_reason = out.reason;
      break;
    }
    state = out.state;
    const double dsup = linf_norm(divergence(state.u));
    result.divu_sup_per_window.push_back(dsup);
    if (out.r_exited && !result.r_exited) {
      result.r_exited = true;
      result.first_r_exit_time = state.t;
    }
    const bool record = opts.record_dt <= 0.0 || state.t >= next_record - 1e-12 ||
                        state.t >= t_end - 1e-12;
    if (record) {
      result.rows.push_back(make_row(state, params, ebal, bdbal,
                                     opts.track_mv_balance ? &mvbal : nullptr, dsup,
                                     out.r_exited ? 1 : 0, out.retries));
      if (opts.record_dt > 0.0)
        while (next_record <= state.t + 1e-15) next_record += opts.record_dt;
    }
  }
  result.final_state = state;
  return result;
}

void write_trace(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot open trace file: " + path);
  os << "t\tmass\te_kin\te_press\te_eta\te_quant\te_delta\te_total\tbd_total"
        "\tmv_trunc\tmv_exact\tmin_rho\tmax_rho\tvacuum_frac\tu_norm\tdivu_sup\tchi"
        "\tdiss_viscous\tdiss_rot\tebal_residual\tbd_residual\tmv_residual";
  for (int i = 1; i <= 10; ++i) os << "\tI" << i;
  os << "\tr_exited\tretries\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (const TraceRow& r : rows) {
    put(r.t);
    for (double v : {r.mass, r.e_kin, r.e_press, r.e_eta, r.e_quant, r.e_delta,
                     r.e_total, r.bd_total, r.mv_trunc, r.mv_exact, r.min_rho,
                     r.max_rho, r.vacuum_frac, r.u_norm, r.divu_sup, r.chi,
                     r.diss_viscous, r.diss_rot, r.ebal_residual, r.bd_residual,
                     r.mv_residual}) {
      os << '\t';
      put(v);
    }
    for (double v : r.I_cum) {
      os << '\t';
      put(v);
    }
    os << '\t' << r.r_exited << '\t' << r.retries << '\n';
  }
}

}  // namespace scns
