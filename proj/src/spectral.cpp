#include "scns/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace scns {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// FFTW plan pair for one (dim, n) combination.  Plans are created once with
// FFTW_UNALIGNED so they can execute on any caller-owned buffer; execution
// through the new-array API is thread safe, plan creation is not.
struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

PlanPair& plans_for(int dim, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::int64_t real_sz = 1;
  for (int i = 0; i < dim; ++i) real_sz *= n;
  std::int64_t spec_sz = real_sz / n * (n / 2 + 1);
  std::vector<double> rbuf(real_sz);
  std::vector<std::complex<double>> cbuf(spec_sz);
  std::vector<int> dims(dim, n);

  PlanPair p;
  p.r2c = fftw_plan_dft_r2c(dim, dims.data(), rbuf.data(),
                            reinterpret_cast<fftw_complex*>(cbuf.data()),
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.c2r = fftw_plan_dft_c2r(dim, dims.data(),
                            reinterpret_cast<fftw_complex*>(cbuf.data()),
                            rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  auto [ins, ok] = cache.emplace(key, p);
  (void)ok;
  return ins->second;
}

void forward(const TorusGrid& g, const double* in, std::complex<double>* out) {
  PlanPair& p = plans_for(g.dim(), g.n());
  std::vector<double> scratch(in, in + g.points());
  fftw_execute_dft_r2c(p.r2c, scratch.data(),
                       reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / static_cast<double>(g.points());
  for (std::int64_t k = 0; k < g.spectral_points(); ++k) out[k] *= scale;
}

void inverse(const TorusGrid& g, const std::complex<double>* in, double* out) {
  PlanPair& p = plans_for(g.dim(), g.n());
  // c2r destroys its input; run on a copy.
  std::vector<std::complex<double>> scratch(in, in + g.spectral_points());
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()),
                       out);
}

double ipow(double base, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= base;
  return r;
}

// Apply a per-mode complex multiplier to one component.
template <typename SymbolFn>
std::vector<std::complex<double>> apply_symbol(const TorusGrid& g,
                                               const std::complex<double>* in,
                                               SymbolFn&& sym) {
  std::vector<std::complex<double>> out(g.spectral_points());
  for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
    out[k] = in[k] * sym(wave_vector(g, k));
  }
  return out;
}

}  // namespace

TorusGrid::TorusGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
  if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2 or 3");
  if (n_ < 4 || n_ % 2 != 0) throw ConfigError("points per axis must be even and >= 4");
  points_ = 1;
  for (int i = 0; i < dim_; ++i) points_ *= n_;
  spec_points_ = points_ / n_ * (n_ / 2 + 1);
}

std::array<double, 3> TorusGrid::coords(std::int64_t flat) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int i = dim_ - 1; i >= 0; --i) {
    x[i] = static_cast<double>(flat % n_) / n_;
    flat /= n_;
  }
  return x;
}

std::array<int, 3> wave_vector(const TorusGrid& grid, std::int64_t spec_flat) {
  std::array<int, 3> k{0, 0, 0};
  const int n = grid.n();
  const int last = n / 2 + 1;
  k[grid.dim() - 1] = static_cast<int>(spec_flat % last);
  spec_flat /= last;
  for (int i = grid.dim() - 2; i >= 0; --i) {
    int idx = static_cast<int>(spec_flat % n);
    spec_flat /= n;
    k[i] = idx <= n / 2 ? idx : idx - n;
  }
  return k;
}

SpectralField SpectralField::from_values(const TorusGrid& grid, int components,
                                         std::vector<double> values) {
  if (static_cast<std::int64_t>(values.size()) != components * grid.points())
    throw ConfigError("value array size does not match grid");
  SpectralField f;
  f.grid_ = grid;
  f.comps_ = components;
  f.values_ = std::move(values);
  f.coeffs_.resize(components * grid.spectral_points());
  for (int c = 0; c < components; ++c) {
    forward(grid, f.values_.data() + c * grid.points(),
            f.coeffs_.data() + c * grid.spectral_points());
  }
  return f;
}

SpectralField SpectralField::from_coeffs(const TorusGrid& grid, int components,
                                         std::vector<std::complex<double>> coeffs) {
  if (static_cast<std::int64_t>(coeffs.size()) != components * grid.spectral_points())
    throw ConfigError("coefficient array size does not match grid");
  SpectralField f;
  f.grid_ = grid;
  f.comps_ = components;
  f.coeffs_ = std::move(coeffs);
  f.values_.resize(components * grid.points());
  for (int c = 0; c < components; ++c) {
    inverse(grid, f.coeffs_.data() + c * grid.spectral_points(),
            f.values_.data() + c * grid.points());
  }
  return f;
}

SpectralField SpectralField::zero(const TorusGrid& grid, int components) {
  SpectralField f;
  f.grid_ = grid;
  f.comps_ = components;
  f.values_.assign(components * grid.points(), 0.0);
  f.coeffs_.assign(components * grid.spectral_points(), {0.0, 0.0});
  return f;
}

SpectralField SpectralField::constant(const TorusGrid& grid, double value) {
  SpectralField f = zero(grid, 1);
  std::fill(f.values_.begin(), f.values_.end(), value);
  f.coeffs_[0] = value;
  return f;
}

bool SpectralField::finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

SpectralField project(const SpectralField& f, int m) {
  const TorusGrid& g = f.grid();
  if (m < 1) throw ConfigError("projection cutoff m must be >= 1");
  if (m > g.dealias_limit())
    throw ConfigError("projection cutoff m exceeds N/3 for this grid");
  std::vector<std::complex<double>> out = f.coeffs();
  for (int c = 0; c < f.components(); ++c) {
    for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
      auto wv = wave_vector(g, k);
      int kmax = 0;
      for (int i = 0; i < g.dim(); ++i) kmax = std::max(kmax, std::abs(wv[i]));
      if (kmax > m) out[c * g.spectral_points() + k] = 0.0;
    }
  }
  return SpectralField::from_coeffs(g, f.components(), std::move(out));
}

SpectralField dealias(const SpectralField& f) {
  const TorusGrid& g = f.grid();
  std::vector<std::complex<double>> out = f.coeffs();
  const int lim = g.dealias_limit();
  for (int c = 0; c < f.components(); ++c) {
    for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
      auto wv = wave_vector(g, k);
      int kmax = 0;
      for (int i = 0; i < g.dim(); ++i) kmax = std::max(kmax, std::abs(wv[i]));
      if (kmax > lim) out[c * g.spectral_points() + k] = 0.0;
    }
  }
  return SpectralField::from_coeffs(g, f.components(), std::move(out));
}

double inner_product(const SpectralField& f, const SpectralField& g) {
  if (f.grid() != g.grid() || f.components() != g.components())
    throw ConfigError("inner product requires matching grids and components");
  double s = 0.0;
  const auto& a = f.values();
  const auto& b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(f.grid().points());
}

SpectralField gradient(const SpectralField& f) {
  const TorusGrid& g = f.grid();
  const int d = g.dim();
  const int nc = f.components();
  std::vector<std::complex<double>> out(nc * d * g.spectral_points());
  const int nyq = g.n() / 2;
  for (int c = 0; c < nc; ++c) {
    for (int axis = 0; axis < d; ++axis) {
      auto part = apply_symbol(
          g, f.coeffs().data() + c * g.spectral_points(),
          [&](const std::array<int, 3>& k) -> std::complex<double> {
            if (std::abs(k[axis]) == nyq) return {0.0, 0.0};
            return {0.0, kTwoPi * k[axis]};
          });
      std::copy(part.begin(), part.end(),
                out.begin() + (c * d + axis) * g.spectral_points());
    }
  }
  return SpectralField::from_coeffs(g, nc * d, std::move(out));
}

SpectralField divergence(const SpectralField& v) {
  const TorusGrid& g = v.grid();
  const int d = g.dim();
  if (v.components() != d) throw ConfigError("divergence needs a d-component field");
  const int nyq = g.n() / 2;
  std::vector<std::complex<double>> out(g.spectral_points(), {0.0, 0.0});
  for (int axis = 0; axis < d; ++axis) {
    for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
      auto wv = wave_vector(g, k);
      if (std::abs(wv[axis]) == nyq) continue;
      out[k] += v.coeff(axis, k) * std::complex<double>{0.0, kTwoPi * wv[axis]};
    }
  }
  return SpectralField::from_coeffs(g, 1, std::move(out));
}

SpectralField laplacian(const SpectralField& f, int power) {
  const TorusGrid& g = f.grid();
  std::vector<std::complex<double>> out(f.coeffs().size());
  for (int c = 0; c < f.components(); ++c) {
    auto part = apply_symbol(
        g, f.coeffs().data() + c * g.spectral_points(),
        [&](const std::array<int, 3>& k) -> std::complex<double> {
          double k2 = 0.0;
          for (int i = 0; i < g.dim(); ++i) k2 += double(k[i]) * k[i];
          return ipow(-kTwoPi * kTwoPi * k2, power);
        });
    std::copy(part.begin(), part.end(), out.begin() + c * g.spectral_points());
  }
  return SpectralField::from_coeffs(g, f.components(), std::move(out));
}

SpectralField deformation(const SpectralField& u) {
  const TorusGrid& g = u.grid();
  const int d = g.dim();
  if (u.components() != d) throw ConfigError("deformation needs a d-component field");
  SpectralField jac = gradient(u);  // J_{ij} = d u_i / d x_j at component i*d+j
  std::vector<std::complex<double>> out(d * d * g.spectral_points());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
        out[(i * d + j) * g.spectral_points() + k] =
            0.5 * (jac.coeff(i * d + j, k) + jac.coeff(j * d + i, k));
      }
    }
  }
  return SpectralField::from_coeffs(g, d * d, std::move(out));
}

SpectralField tensor_divergence(const SpectralField& t) {
  const TorusGrid& g = t.grid();
  const int d = g.dim();
  if (t.components() != d * d) throw ConfigError("tensor divergence needs d*d components");
  const int nyq = g.n() / 2;
  std::vector<std::complex<double>> out(d * g.spectral_points(), {0.0, 0.0});
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
        auto wv = wave_vector(g, k);
        if (std::abs(wv[j]) == nyq) continue;
        out[i * g.spectral_points() + k] +=
            t.coeff(i * d + j, k) * std::complex<double>{0.0, kTwoPi * wv[j]};
      }
    }
  }
  return SpectralField::from_coeffs(g, d, std::move(out));
}

SpectralField integrating_factor(const SpectralField& f, double eps, double dt,
                                 int power) {
  if (eps == 0.0 || dt == 0.0) return f;
  const TorusGrid& g = f.grid();
  std::vector<std::complex<double>> out(f.coeffs().size());
  for (int c = 0; c < f.components(); ++c) {
    auto part = apply_symbol(
        g, f.coeffs().data() + c * g.spectral_points(),
        [&](const std::array<int, 3>& k) -> std::complex<double> {
          double k2 = 0.0;
          for (int i = 0; i < g.dim(); ++i) k2 += double(k[i]) * k[i];
          return std::exp(-eps * std::pow(kTwoPi * kTwoPi * k2, power) * dt);
        });
    std::copy(part.begin(), part.end(), out.begin() + c * g.spectral_points());
  }
  return SpectralField::from_coeffs(g, f.components(), std::move(out));
}

namespace {
SpectralField pointwise_binary(const SpectralField& a, const SpectralField& b,
                               int ca, int cb, int out_comps,
                               const std::function<void(const double*, const double*,
                                                        double*, std::int64_t)>& fn) {
  if (a.grid() != b.grid()) throw ConfigError("mismatched grids in product");
  if (a.components() != ca || b.components() != cb)
    throw ConfigError("mismatched component counts in product");
  std::vector<double> out(out_comps * a.grid().points());
  fn(a.values().data(), b.values().data(), out.data(), a.grid().points());
  return dealias(SpectralField::from_values(a.grid(), out_comps, std::move(out)));
}
}  // namespace

SpectralField multiply(const SpectralField& a, const SpectralField& b) {
  if (a.components() != b.components())
    throw ConfigError("multiply needs equal component counts");
  const int nc = a.components();
  if (a.grid() != b.grid()) throw ConfigError("mismatched grids in product");
  std::vector<double> out(nc * a.grid().points());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return dealias(SpectralField::from_values(a.grid(), nc, std::move(out)));
}

SpectralField scale_vector(const SpectralField& s, const SpectralField& v) {
  const int d = v.components();
  return pointwise_binary(
      s, v, 1, d, d,
      [&](const double* sv, const double* vv, double* out, std::int64_t n) {
        for (int c = 0; c < d; ++c)
          for (std::int64_t j = 0; j < n; ++j) out[c * n + j] = sv[j] * vv[c * n + j];
      });
}

SpectralField outer_product(const SpectralField& u, const SpectralField& v) {
  const int d = u.components();
  return pointwise_binary(
      u, v, d, d, d * d,
      [&](const double* uv, const double* vv, double* out, std::int64_t n) {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (std::int64_t p = 0; p < n; ++p)
              out[(i * d + j) * n + p] = uv[i * n + p] * vv[j * n + p];
      });
}

SpectralField dot_field(const SpectralField& u, const SpectralField& v) {
  const int d = u.components();
  return pointwise_binary(
      u, v, d, d, 1,
      [&](const double* uv, const double* vv, double* out, std::int64_t n) {
        for (std::int64_t p = 0; p < n; ++p) {
          double s = 0.0;
          for (int i = 0; i < d; ++i) s += uv[i * n + p] * vv[i * n + p];
          out[p] = s;
        }
      });
}

SpectralField pointwise_map(const SpectralField& f,
                            const std::function<double(double)>& fn,
                            bool dealias_result) {
  std::vector<double> out(f.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(f.values()[i]);
  SpectralField r = SpectralField::from_values(f.grid(), f.components(), std::move(out));
  return dealias_result ? dealias(r) : r;
}

SpectralField add(const SpectralField& a, const SpectralField& b) {
  if (a.grid() != b.grid() || a.components() != b.components())
    throw ConfigError("add: mismatched fields");
  std::vector<std::complex<double>> out(a.coeffs().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.coeffs()[i] + b.coeffs()[i];
  return SpectralField::from_coeffs(a.grid(), a.components(), std::move(out));
}

SpectralField subtract(const SpectralField& a, const SpectralField& b) {
  return add(a, scaled(b, -1.0));
}

SpectralField scaled(const SpectralField& f, double factor) {
  std::vector<std::complex<double>> out(f.coeffs().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.coeffs()[i] * factor;
  return SpectralField::from_coeffs(f.grid(), f.components(), std::move(out));
}

SpectralField component(const SpectralField& f, int c) {
  std::vector<std::complex<double>> out(
      f.coeffs().begin() + c * f.grid().spectral_points(),
      f.coeffs().begin() + (c + 1) * f.grid().spectral_points());
  return SpectralField::from_coeffs(f.grid(), 1, std::move(out));
}

double field_mean(const SpectralField& f, int c) { return f.coeff(c, 0).real(); }

double l2_norm(const SpectralField& f) { return std::sqrt(inner_product(f, f)); }

double hm_norm(const SpectralField& f) { return l2_norm(f); }

double linf_norm(const SpectralField& f) {
  double m = 0.0;
  const std::int64_t n = f.grid().points();
  for (std::int64_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (int c = 0; c < f.components(); ++c) {
      const double v = f.value(c, j);
      s += v * v;
    }
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

double min_value(const SpectralField& f, int c) {
  double m = f.value(c, 0);
  for (std::int64_t j = 1; j < f.grid().points(); ++j) m = std::min(m, f.value(c, j));
  return m;
}

double max_value(const SpectralField& f, int c) {
  double m = f.value(c, 0);
  for (std::int64_t j = 1; j < f.grid().points(); ++j) m = std::max(m, f.value(c, j));
  return m;
}

SpectralField resample(const SpectralField& f, int new_n) {
  const TorusGrid& g = f.grid();
  TorusGrid g2(g.dim(), new_n);
  std::vector<std::complex<double>> out(f.components() * g2.spectral_points(),
                                        {0.0, 0.0});
  const int keep = std::min(g.n(), new_n) / 2;  // copy strictly-interior modes
  for (int c = 0; c < f.components(); ++c) {
    for (std::int64_t k2 = 0; k2 < g2.spectral_points(); ++k2) {
      auto wv = wave_vector(g2, k2);
      bool in_range = true;
      for (int i = 0; i < g.dim(); ++i)
        if (std::abs(wv[i]) >= keep) in_range = false;
      if (!in_range) continue;
      // locate the same signed mode in the source layout
      std::int64_t src = 0;
      for (int i = 0; i < g.dim() - 1; ++i) {
        int idx = wv[i] >= 0 ? wv[i] : wv[i] + g.n();
        src = src * g.n() + idx;
      }
      src = src * (g.n() / 2 + 1) + wv[g.dim() - 1];
      out[c * g2.spectral_points() + k2] = f.coeffs()[c * g.spectral_points() + src];
    }
  }
  return SpectralField::from_coeffs(g2, f.components(), std::move(out));
}

}  // namespace scns
