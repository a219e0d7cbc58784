#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scns {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_ = 0.0;
};

// Uniform periodic grid on the unit torus [0,1)^d, collocation points x_j = j/N.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::int64_t points() const { return points_; }
  std::int64_t spectral_points() const { return spec_points_; }
  // Largest mode index kept by the 2/3 rule.
  int dealias_limit() const { return n_ / 3; }

  std::array<double, 3> coords(std::int64_t flat) const;
  bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }

 private:
  int dim_ = 0;
  int n_ = 0;
  std::int64_t points_ = 0;
  std::int64_t spec_points_ = 0;
};

// A real field on the torus held in both representations at once: collocation
// values and trigonometric coefficients (real-to-complex layout, Hermitian
// symmetry structural along the last axis).  Coefficient convention:
//   f(x) = sum_k c_k e^{i 2 pi k.x},  c_{-k} = conj(c_k).
// Fields are immutable after construction; operations return new fields.
class SpectralField {
 public:
  SpectralField() = default;

  static SpectralField from_values(const TorusGrid& grid, int components,
                                   std::vector<double> values);
  static SpectralField from_coeffs(const TorusGrid& grid, int components,
                                   std::vector<std::complex<double>> coeffs);
  static SpectralField zero(const TorusGrid& grid, int components);
  static SpectralField constant(const TorusGrid& grid, double value);

  const TorusGrid& grid() const { return grid_; }
  int components() const { return comps_; }

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }

  double value(int c, std::int64_t j) const { return values_[c * grid_.points() + j]; }
  std::complex<double> coeff(int c, std::int64_t k) const {
    return coeffs_[c * grid_.spectral_points() + k];
  }

  bool finite() const;

 private:
  TorusGrid grid_;
  int comps_ = 0;
  std::vector<double> values_;
  std::vector<std::complex<double>> coeffs_;
};

// Signed wave vector of a flat spectral index.
std::array<int, 3> wave_vector(const TorusGrid& grid, std::int64_t spec_flat);

// Galerkin projection onto H_m: zero every coefficient with max_i |k_i| > m.
// Requires m <= N/3 so H_m products stay representable after dealiasing.
SpectralField project(const SpectralField& f, int m);

// 2/3-rule truncation: zero coefficients with max_i |k_i| > N/3.
SpectralField dealias(const SpectralField& f);

// L2 inner product over the unit torus (grid mean, spectrally exact for
// band-limited integrands), summed over components.
double inner_product(const SpectralField& f, const SpectralField& g);

// ---- spectral differentiation --------------------------------------------
// Gradient of a scalar (returns d components); for a d-component field
// returns the full Jacobian J_{ij} = d u_i / d x_j laid out row-major.
SpectralField gradient(const SpectralField& f);
SpectralField divergence(const SpectralField& v);     // d components -> scalar
SpectralField laplacian(const SpectralField& f, int power = 1);
SpectralField deformation(const SpectralField& u);    // (grad u + grad u^T)/2, d*d comps
SpectralField tensor_divergence(const SpectralField& t);  // d*d comps -> d comps
// Multiply every mode by exp(-eps |2 pi k|^(2p) dt); the exact heat (p=1) or
// hyperdiffusion semigroup on the torus.
SpectralField integrating_factor(const SpectralField& f, double eps, double dt,
                                 int power = 1);

// ---- pointwise (pseudo-spectral) algebra; every product is dealiased ------
SpectralField multiply(const SpectralField& a, const SpectralField& b);
SpectralField scale_vector(const SpectralField& s, const SpectralField& v);
SpectralField outer_product(const SpectralField& u, const SpectralField& v);
SpectralField dot_field(const SpectralField& u, const SpectralField& v);
SpectralField pointwise_map(const SpectralField& f,
                            const std::function<double(double)>& fn,
                            bool dealias_result = true);

SpectralField add(const SpectralField& a, const SpectralField& b);
SpectralField subtract(const SpectralField& a, const SpectralField& b);
SpectralField scaled(const SpectralField& f, double factor);
SpectralField component(const SpectralField& f, int c);

// ---- reductions ------------------------------------------------------------
double field_mean(const SpectralField& f, int c = 0);  // k=0 coefficient, exact
double l2_norm(const SpectralField& f);
// Coefficient l2 norm of an H_m element; equals the L2 norm by Parseval.
double hm_norm(const SpectralField& f);
double linf_norm(const SpectralField& f);
double min_value(const SpectralField& f, int c = 0);
double max_value(const SpectralField& f, int c = 0);

// Resample to a finer/coarser grid by zero padding / truncation in
// coefficient space (used for refined-grid quadrature oracles).
SpectralField resample(const SpectralField& f, int new_n);

}  // namespace scns
