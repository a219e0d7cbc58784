#include "scns/limits.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace scns {

namespace {

double pow10_safe(double log10v) {
  // underflows to zero honestly; the log-space value is kept alongside
  return std::pow(10.0, log10v);
}

}  // namespace

LimitSchedule build_schedule(const RegularizationParams& base,
                             const LimitScheduleConfig& config) {
  if (!config.illustrative) {
    if (!(config.alpha > 76.0))
      throw ConfigError("stage-3 exponent alpha must exceed 76");
    if (!(config.beta > 2400.0 / 947.0))
      throw ConfigError("stage-3 exponent beta must exceed 2400/947");
  }
  LimitSchedule sched;
  sched.illustrative = config.illustrative;

  RegularizationParams current = base;

  // stage 1: eps down
  for (int i = 0; i < config.stage1_count; ++i) {
    LimitTuple t;
    t.stage = 1;
    t.index = i;
    current.eps = config.eps0 * std::pow(0.5, i);
    t.params = current;
    sched.tuples.push_back(t);
  }
  current.eps = 0.0;

  // stage 2: kappa down with K = kappa^{-3/4}
  for (int i = 0; i < config.stage2_count; ++i) {
    LimitTuple t;
    t.stage = 2;
    t.index = i;
    current.kappa = config.kappa0 * std::pow(0.5, i);
    t.params = current;
    t.K_mv = std::pow(current.kappa, -0.75);
    sched.tuples.push_back(t);
  }
  current.kappa = 0.0;

  // stage 3: joint (n, delta, eta, r0)
  const double alpha = config.illustrative ? config.alpha_illustrative : config.alpha;
  const double beta = config.illustrative ? config.beta_illustrative : config.beta;
  int prev_n = 0;
  for (std::size_t i = 0; i < config.stage3_n.size(); ++i) {
    const int n = config.stage3_n[i];
    if (n <= prev_n) throw ConfigError("stage-3 n sequence must be strictly increasing");
    prev_n = n;
    LimitTuple t;
    t.stage = 3;
    t.index = static_cast<int>(i);
    t.n = n;
    t.log10_delta = -alpha * std::log10(static_cast<double>(n));
    t.log10_eta = -beta * std::log10(static_cast<double>(n));
    const double r0_exp = 1.0 + (7.0 / 4.0) * ((13.0 / 10.0) * alpha + 1.5 * beta) +
                          0.5 * beta;
    t.log10_r0 = -r0_exp * std::log10(static_cast<double>(n));
    current.delta = pow10_safe(t.log10_delta);
    current.eta = pow10_safe(t.log10_eta);
    current.r0 = pow10_safe(t.log10_r0);
    current.n_mv = n;
    t.underflowed = (current.delta == 0.0 && t.log10_delta != -std::numeric_limits<double>::infinity()) ||
                    (current.eta == 0.0) || (current.r0 == 0.0);
    t.params = current;
    sched.tuples.push_back(t);
  }
  current.delta = 0.0;
  current.eta = 0.0;
  current.r0 = 0.0;

  // stage 4: (r1, r2) down
  for (int i = 0; i < config.stage4_count; ++i) {
    LimitTuple t;
    t.stage = 4;
    t.index = i;
    current.r1 = config.r10 * std::pow(0.5, i);
    current.r2 = config.r20 * std::pow(0.5, i);
    t.params = current;
    sched.tuples.push_back(t);
  }
  return sched;
}

namespace {

TupleDiagnostics diag_from_ensemble(const EnsembleResult& er, int stage, int index) {
  TupleDiagnostics d;
  d.stage = stage;
  d.index = index;
  d.n_failed = er.report.n_failed;
  int n = 0;
  for (const auto& p : er.paths) {
    if (p.failed) continue;
    double sup_e = 0.0, sup_bd = 0.0, sup_mv = 0.0, vac = 0.0;
    for (const auto& r : p.rows) {
      sup_e = std::max(sup_e, r.e_total);
      sup_bd = std::max(sup_bd, r.bd_total);
      sup_mv = std::max(sup_mv, r.mv_exact);
      vac = std::max(vac, r.vacuum_frac);
    }
    d.mean_energy += sup_e;
    d.mean_bd += sup_bd;
    d.mean_mv += sup_mv;
    d.mean_vacuum_frac += vac;
    ++n;
  }
  if (n > 0) {
    d.mean_energy /= n;
    d.mean_bd /= n;
    d.mean_mv /= n;
    d.mean_vacuum_frac /= n;
  }
  return d;
}

std::string tuple_file(const std::string& dir, const LimitTuple& t) {
  return dir + "/tuple_s" + std::to_string(t.stage) + "_i" + std::to_string(t.index) +
         ".tsv";
}

void save_tuple(const std::string& path, const TupleDiagnostics& d) {
  std::ofstream os(path, std::ios::trunc);
  os << "stage\tindex\tmean_energy\tmean_bd\tmean_mv\tmean_vacuum_frac"
        "\tfinal_state_distance\tn_failed\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  os << d.stage << '\t' << d.index << '\t';
  put(d.mean_energy);
  os << '\t';
  put(d.mean_bd);
  os << '\t';
  put(d.mean_mv);
  os << '\t';
  put(d.mean_vacuum_frac);
  os << '\t';
  put(d.final_state_distance);
  os << '\t' << d.n_failed << '\n';
}

bool load_tuple(const std::string& path, TupleDiagnostics& d) {
  std::ifstream is(path);
  if (!is) return false;
  std::string header;
  std::getline(is, header);
  is >> d.stage >> d.index >> d.mean_energy >> d.mean_bd >> d.mean_mv >>
      d.mean_vacuum_frac >> d.final_state_distance >> d.n_failed;
  return static_cast<bool>(is);
}

}  // namespace

ConvergenceReport sweep(const FluidState& initial, const NoiseModel& noise,
                        const LimitSchedule& schedule, const SweepConfig& config) {
  ConvergenceReport report;
  std::vector<FluidState> prev_finals;
  int prev_stage = 0;

  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

  for (const LimitTuple& t : schedule.tuples) {
    if (t.stage < prev_stage)
      throw ConfigError("schedule stages out of order");  // cannot be produced by build
    prev_stage = t.stage;

    TupleDiagnostics d;
    bool loaded = false;
    std::vector<FluidState> finals;
    const std::string tf =
        config.out_dir.empty() ? std::string() : tuple_file(config.out_dir, t);
    if (config.resume && !tf.empty() && load_tuple(tf, d)) {
      loaded = true;
      prev_finals.clear();  // state distances across a resume boundary are kept as saved
    }
    if (!loaded) {
      EnsembleResult er = run_ensemble(initial, t.params, noise, config.ensemble);
      d = diag_from_ensemble(er, t.stage, t.index);
      for (const auto& p : er.paths)
        if (!p.failed) finals.push_back(p.final_state);
      // common-random-number distance to the previous tuple of the same stage
      if (!prev_finals.empty() && prev_finals.size() == finals.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < finals.size(); ++i) {
          acc += l2_norm(subtract(finals[i].q, prev_finals[i].q)) +
                 l2_norm(subtract(finals[i].rho, prev_finals[i].rho));
        }
        d.final_state_distance = acc / finals.size();
      }
      if (!tf.empty()) save_tuple(tf, d);
    }
    report.tuples.push_back(d);
    prev_finals = std::move(finals);
  }

  // Cauchy rows per stage
  for (int stage = 1; stage <= 4; ++stage) {
    ConvergenceReport::CauchyRow row;
    row.stage = stage;
    const TupleDiagnostics* prev = nullptr;
    for (const auto& d : report.tuples) {
      if (d.stage != stage) continue;
      if (prev) {
        row.energy_diffs.push_back(std::abs(d.mean_energy - prev->mean_energy));
        row.state_diffs.push_back(d.final_state_distance);
      }
      prev = &d;
    }
    row.decreasing = true;
    for (std::size_t i = 0; i + 1 < row.state_diffs.size(); ++i)
      if (row.state_diffs[i + 1] > row.state_diffs[i]) row.decreasing = false;
    report.cauchy.push_back(row);
  }
  return report;
}

void write_sweep_manifest(const std::string& path, const LimitSchedule& schedule,
                          const SweepConfig& config) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write sweep manifest: " + path);
  os << "# sweep manifest\n";
  os << "mode " << (schedule.illustrative ? "illustrative" : "faithful") << "\n";
  os << "seed_root " << config.ensemble.seed_root << "\n";
  os << "n_paths " << config.ensemble.n_paths << "\n";
  os << "horizon " << config.ensemble.horizon << "\n";
  os << "stage index eps kappa log10_delta log10_eta log10_r0 r1 r2 n K_mv underflowed\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    os << buf;
  };
  for (const auto& t : schedule.tuples) {
    os << t.stage << ' ' << t.index << ' ';
    put(t.params.eps);
    os << ' ';
    put(t.params.kappa);
    os << ' ';
    put(t.log10_delta);
    os << ' ';
    put(t.log10_eta);
    os << ' ';
    put(t.log10_r0);
    os << ' ';
    put(t.params.r1);
    os << ' ';
    put(t.params.r2);
    os << ' ' << t.n << ' ';
    put(t.K_mv);
    os << ' ' << (t.underflowed ? 1 : 0) << '\n';
  }
}

void write_convergence_report(const std::string& path, const ConvergenceReport& report) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write convergence report: " + path);
  os << "# convergence report\n";
  os << "stage index mean_energy mean_bd mean_mv mean_vacuum_frac state_distance "
        "n_failed\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    os << buf;
  };
  for (const auto& d : report.tuples) {
    os << d.stage << ' ' << d.index << ' ';
    put(d.mean_energy);
    os << ' ';
    put(d.mean_bd);
    os << ' ';
    put(d.mean_mv);
    os << ' ';
    put(d.mean_vacuum_frac);
    os << ' ';
    put(d.final_state_distance);
    os << ' ' << d.n_failed << '\n';
  }
  os << "# cauchy verdicts\n";
  for (const auto& row : report.cauchy) {
    os << "stage " << row.stage << " state_diffs";
    for (double v : row.state_diffs) {
      os << ' ';
      put(v);
    }
    os << " decreasing " << (row.decreasing ? 1 : 0) << '\n';
  }
}

}  // namespace scns
