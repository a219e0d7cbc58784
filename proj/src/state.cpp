#include "scns/state.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace scns {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
std::uint64_t fnv_value(T v, std::uint64_t h) {
  return fnv1a(&v, sizeof(v), h);
}

}  // namespace

void RegularizationParams::validate(const TorusGrid& grid) const {
  if (!(gamma > 1.0)) throw ConfigError("params.gamma must exceed 1");
  if (!(dt > 0.0) || !(h > 0.0) || dt > h * (1 + 1e-12))
    throw ConfigError("params.dt must be positive and no larger than params.h");
  if (!(rho_floor > 0.0)) throw ConfigError("params.rho_floor must be positive");
  if (m < 1) throw ConfigError("params.m must be at least 1");
  if (grid.n() < 3 * m + 1)
    throw ConfigError("grid too coarse: need N >= 3m+1 for cutoff m");
  if (!(R > 0.0)) throw ConfigError("params.R must be positive");
  if (n_mv < 1) throw ConfigError("params.n_mv must be at least 1");
  const double cs[] = {a, eps, kappa, delta, eta, r0, r1, r2};
  for (double c : cs)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw ConfigError("scheme coefficients must be finite and nonnegative");
}

std::uint64_t RegularizationParams::hash(const TorusGrid& grid) const {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv_value(grid.dim(), h);
  h = fnv_value(grid.n(), h);
  for (double v : {a, gamma, eps, kappa, delta, eta, r0, r1, r2, R, this->h, dt,
                   rho_floor})
    h = fnv_value(v, h);
  h = fnv_value(m, h);
  h = fnv_value(n_mv, h);
  return h;
}

SpectralField momentum_from_velocity(const SpectralField& rho, const SpectralField& u,
                                     int m) {
  return project(scale_vector(rho, u), m);
}

SpectralField velocity_from_momentum(const SpectralField& rho, const SpectralField& q,
                                     int m, double tol, int max_iter) {
  if (min_value(rho) <= 0.0)
    throw SolverError("mass operator is singular: density not positive", 0.0);
  const TorusGrid& g = rho.grid();
  const int d = g.dim();
  if (max_iter < 0) {
    std::int64_t modes = 1;
    for (int i = 0; i < d; ++i) modes *= (2 * m + 1);
    max_iter = static_cast<int>(10 * modes);
  }

  auto apply = [&](const SpectralField& z) { return momentum_from_velocity(rho, z, m); };

  SpectralField b = project(q, m);
  const double bnorm = l2_norm(b);
  if (bnorm == 0.0) return SpectralField::zero(g, d);

  // Initial guess q / mean(rho): exact for constant density.
  SpectralField x = scaled(b, 1.0 / field_mean(rho));
  SpectralField r = subtract(b, apply(x));
  SpectralField p = r;
  double rr = inner_product(r, r);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= tol * bnorm) return x;
    SpectralField ap = apply(p);
    double pap = inner_product(p, ap);
    if (!(pap > 0.0))
      throw SolverError("Gram operator lost positivity during CG", std::sqrt(rr));
    double alpha = rr / pap;
    x = add(x, scaled(p, alpha));
    r = subtract(r, scaled(ap, alpha));
    double rr_new = inner_product(r, r);
    p = add(r, scaled(p, rr_new / rr));
    rr = rr_new;
  }
  if (std::sqrt(rr) <= tol * bnorm) return x;
  throw SolverError("velocity recovery did not converge", std::sqrt(rr) / bnorm);
}

PositivityReport positivity_report(const SpectralField& rho, double threshold) {
  PositivityReport r;
  r.min_value = min_value(rho);
  std::int64_t below = 0;
  for (std::int64_t j = 0; j < rho.grid().points(); ++j)
    if (rho.value(0, j) < threshold) ++below;
  r.vacuum_fraction = static_cast<double>(below) / rho.grid().points();
  return r;
}

MaxPrincipleBounds maximum_principle_bounds(const SpectralField& rho0,
                                            std::span<const double> divu_sup,
                                            double dt) {
  MaxPrincipleBounds b;
  const double lo = min_value(rho0);
  const double hi = max_value(rho0);
  double integral = 0.0;
  b.lower.push_back(lo);
  b.upper.push_back(hi);
  for (double s : divu_sup) {
    integral += s * dt;
    b.lower.push_back(lo * std::exp(-integral));
    b.upper.push_back(hi * std::exp(integral));
  }
  return b;
}

FluidState prepare_initial(const SpectralField& rho_raw, const SpectralField& u_raw,
                           const RegularizationParams& params) {
  const TorusGrid& g = rho_raw.grid();
  params.validate(g);
  const double mass0 = field_mean(rho_raw);
  if (!(mass0 > 0.0)) throw ConfigError("initial data has nonpositive total mass");

  SpectralField rho = project(rho_raw, params.m);
  if (min_value(rho) < params.rho_floor) {
    std::vector<double> vals = rho.values();
    for (auto& v : vals) v = std::max(v, params.rho_floor);
    SpectralField clipped = SpectralField::from_values(g, 1, std::move(vals));
    const double scale = field_mean(rho) / field_mean(clipped);
    rho = project(scaled(clipped, scale), params.m);
  }

  SpectralField u = project(u_raw, params.m);
  SpectralField q = momentum_from_velocity(rho, u, params.m);
  FluidState s;
  s.u = velocity_from_momentum(rho, q, params.m);
  s.rho = std::move(rho);
  s.q = std::move(q);
  s.t = 0.0;
  return s;
}

namespace {
constexpr char kMagic[8] = {'S', 'C', 'N', 'S', 'C', 'K', 'P', 'T'};

void write_raw(std::ofstream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void read_raw(std::ifstream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw ConfigError("checkpoint truncated or unreadable");
}
}  // namespace

void write_checkpoint(const std::string& path, const FluidState& state,
                      const RegularizationParams& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
  const TorusGrid& g = state.rho.grid();
  std::uint32_t version = 1, d = g.dim(), n = g.n(), m = params.m;
  std::uint64_t ph = params.hash(g);
  write_raw(os, kMagic, 8);
  write_raw(os, &version, 4);
  write_raw(os, &d, 4);
  write_raw(os, &n, 4);
  write_raw(os, &m, 4);
  write_raw(os, &state.t, 8);
  write_raw(os, &ph, 8);
  auto dump = [&](const SpectralField& f) {
    write_raw(os, f.coeffs().data(), f.coeffs().size() * sizeof(std::complex<double>));
  };
  dump(state.rho);
  dump(state.q);
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  read_raw(is, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("not a checkpoint file: " + path);
  CheckpointHeader h;
  read_raw(is, &h.version, 4);
  read_raw(is, &h.d, 4);
  read_raw(is, &h.n, 4);
  read_raw(is, &h.m, 4);
  read_raw(is, &h.t, 8);
  read_raw(is, &h.params_hash, 8);
  return h;
}

FluidState read_checkpoint(const std::string& path, const RegularizationParams& params) {
  CheckpointHeader h = read_checkpoint_header(path);
  std::ifstream is(path, std::ios::binary);
  is.seekg(8 + 4 * 4 + 8 + 8);
  TorusGrid g(static_cast<int>(h.d), static_cast<int>(h.n));
  auto load = [&](int comps) {
    std::vector<std::complex<double>> c(comps * g.spectral_points());
    read_raw(is, c.data(), c.size() * sizeof(std::complex<double>));
    return SpectralField::from_coeffs(g, comps, std::move(c));
  };
  FluidState s;
  s.rho = load(1);
  s.q = load(g.dim());
  s.t = h.t;
  s.u = velocity_from_momentum(s.rho, s.q, static_cast<int>(h.m));
  (void)params;
  return s;
}

}  // namespace scns
