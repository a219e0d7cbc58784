#include "scns/noise.hpp"

#include <cmath>
#include <limits>

#include "scns/rng.hpp"

namespace scns {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

double shape_value(const NoiseShape& s, const std::array<double, 3>& x) {
  double ph = kTwoPi * (s.wave[0] * x[0] + s.wave[1] * x[1] + s.wave[2] * x[2]);
  return s.use_sin ? std::sin(ph) : std::cos(ph);
}
}  // namespace

NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "constant") return NoiseFamily::constant;
  if (s == "density-saturating" || s == "density_saturating")
    return NoiseFamily::density_saturating;
  if (s == "velocity-saturating" || s == "velocity_saturating")
    return NoiseFamily::velocity_saturating;
  throw ConfigError("unknown noise family: " + s);
}

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::constant: return "constant";
    case NoiseFamily::density_saturating: return "density-saturating";
    case NoiseFamily::velocity_saturating: return "velocity-saturating";
  }
  return "?";
}

NoiseModel NoiseModel::make(int k_modes, double f1, double decay, NoiseFamily family,
                            std::uint64_t seed_root, int dim) {
  if (k_modes < 0) throw ConfigError("noise.K_modes must be nonnegative");
  if (f1 < 0.0) throw ConfigError("noise.f1 must be nonnegative");
  NoiseModel m;
  m.family_ = family;
  m.seed_root_ = seed_root;
  m.decay_ = decay;
  m.f1_ = f1;
  m.f_.resize(k_modes);
  m.shapes_.resize(k_modes);
  for (int k = 0; k < k_modes; ++k) {
    m.f_[k] = f1 * std::pow(static_cast<double>(k + 1), -decay);
    NoiseShape& s = m.shapes_[k];
    int cycle = k / 2;
    s.use_sin = (k % 2) == 1;
    s.direction = cycle % dim;
    int mode = 1 + cycle / dim;
    s.wave = {0, 0, 0};
    s.wave[(cycle / dim) % dim] = mode;  // walk through low modes per axis
    if (s.wave[0] == 0 && s.wave[1] == 0 && s.wave[2] == 0) s.wave[0] = 1;
  }
  return m;
}

double NoiseModel::sum_f_sq() const {
  double s = 0.0;
  for (double v : f_) s += v * v;
  return s;
}

double NoiseModel::tail_bound() const {
  if (decay_ <= 0.5) return std::numeric_limits<double>::infinity();
  // sum_{k>K} f1^2 k^{-2 decay} <= f1^2 int_K^inf x^{-2 decay} dx
  const double K = static_cast<double>(k_modes());
  if (K == 0.0) return f1_ * f1_ / (2.0 * decay_ - 1.0);
  return f1_ * f1_ * std::pow(K, 1.0 - 2.0 * decay_) / (2.0 * decay_ - 1.0);
}

WienerIncrement sample_increment(const NoiseModel& model, std::uint64_t path_id,
                                 std::uint64_t step, double dt) {
  if (!(dt > 0.0)) throw ConfigError("increment needs dt > 0");
  WienerIncrement w;
  w.step = step;
  w.db.resize(model.k_modes());
  const double s = std::sqrt(dt);
  for (int k = 0; k < model.k_modes(); ++k)
    w.db[k] = s * gauss_draw(model.seed_root(), path_id, step, static_cast<std::uint64_t>(k));
  return w;
}

std::vector<SpectralField> evaluate_coefficients(const NoiseModel& model,
                                                 const SpectralField& rho,
                                                 const SpectralField& u) {
  const TorusGrid& g = rho.grid();
  const int d = g.dim();
  std::vector<SpectralField> out;
  out.reserve(model.k_modes());
  for (int k = 0; k < model.k_modes(); ++k) {
    const NoiseShape& sh = model.shapes()[k];
    const double fk = model.f()[k] * model.miscale();
    std::vector<double> vals(d * g.points(), 0.0);
    for (std::int64_t j = 0; j < g.points(); ++j) {
      const double s = shape_value(sh, g.coords(j));
      switch (model.family()) {
        case NoiseFamily::constant:
          vals[sh.direction * g.points() + j] = fk * s;
          break;
        case NoiseFamily::density_saturating:
          vals[sh.direction * g.points() + j] = 0.5 * fk * s * std::tanh(rho.value(0, j));
          break;
        case NoiseFamily::velocity_saturating:
          for (int c = 0; c < d; ++c)
            vals[c * g.points() + j] = 0.5 * fk * s * std::tanh(u.value(c, j));
          break;
      }
    }
    out.push_back(SpectralField::from_values(g, d, std::move(vals)));
  }
  return out;
}

std::vector<SpectralField> evaluate_noise(const NoiseModel& model,
                                          const SpectralField& rho,
                                          const SpectralField& u) {
  std::vector<SpectralField> fk = evaluate_coefficients(model, rho, u);
  for (auto& f : fk) f = scale_vector(rho, f);
  return fk;
}

SpectralField noise_energy_density(const NoiseModel& model, const SpectralField& rho,
                                   const SpectralField& u) {
  const TorusGrid& g = rho.grid();
  std::vector<SpectralField> fk = evaluate_coefficients(model, rho, u);
  std::vector<double> vals(g.points(), 0.0);
  for (const auto& f : fk) {
    for (std::int64_t j = 0; j < g.points(); ++j) {
      double s = 0.0;
      for (int c = 0; c < g.dim(); ++c) s += f.value(c, j) * f.value(c, j);
      vals[j] += 0.5 * rho.value(0, j) * s;
    }
  }
  return SpectralField::from_values(g, 1, std::move(vals));
}

CertificateReport lipschitz_certificate(
    const NoiseModel& model,
    const std::vector<std::pair<SpectralField, SpectralField>>& states) {
  CertificateReport rep;
  const double hr = 1e-5, hu = 1e-5;
  for (const auto& [rho, u] : states) {
    const TorusGrid& g = rho.grid();
    auto bump_rho = [&](double dh) {
      return pointwise_map(rho, [&](double v) { return v + dh; }, false);
    };
    auto bump_u = [&](double dh) {
      std::vector<double> vals = u.values();
      for (auto& v : vals) v += dh;
      return SpectralField::from_values(g, u.components(), std::move(vals));
    };
    auto f0 = evaluate_coefficients(model, rho, u);
    auto fr_p = evaluate_coefficients(model, bump_rho(hr), u);
    auto fr_m = evaluate_coefficients(model, bump_rho(-hr), u);
    auto fu_p = evaluate_coefficients(model, rho, bump_u(hu));
    auto fu_m = evaluate_coefficients(model, rho, bump_u(-hu));
    for (int k = 0; k < model.k_modes(); ++k) {
      double sup_f = 0.0, sup_dr = 0.0, sup_du = 0.0;
      for (int c = 0; c < g.dim(); ++c) {
        for (std::int64_t j = 0; j < g.points(); ++j) {
          sup_f = std::max(sup_f, std::abs(f0[k].value(c, j)));
          sup_dr = std::max(sup_dr, std::abs(fr_p[k].value(c, j) - fr_m[k].value(c, j)) /
                                        (2.0 * hr));
          sup_du = std::max(sup_du, std::abs(fu_p[k].value(c, j) - fu_m[k].value(c, j)) /
                                        (2.0 * hu));
        }
      }
      const double fk = model.f()[k];
      if (fk > 0.0) rep.max_ratio = std::max(rep.max_ratio, (sup_f + sup_dr + sup_du) / fk);
    }
  }
  rep.pass = rep.max_ratio <= 1.0 + 1e-6;
  return rep;
}

}  // namespace scns
