#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scns/spectral.hpp"
#include "test_util.hpp"

using namespace scns;
using namespace scns::testutil;

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}
}  // namespace

TEST_CASE("transform: single cosine mode has two conjugate coefficients") {
  TorusGrid g(1, 8);
  SpectralField f = trig_mode(g, 1, false);
  // r2c layout stores k = 0..4; cos(2 pi x) -> c_1 = 1/2 (and c_{-1} implicit)
  CHECK(std::abs(f.coeff(0, 1) - std::complex<double>(0.5, 0.0)) < 1e-14);
  for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
    if (k == 1) continue;
    CHECK(std::abs(f.coeff(0, k)) < 1e-14);
  }
}

TEST_CASE("transform: constant field lives at k=0") {
  TorusGrid g(1, 8);
  SpectralField f = SpectralField::constant(g, 3.0);
  CHECK(f.coeff(0, 0).real() == doctest::Approx(3.0));
  CHECK(min_value(f) == doctest::Approx(3.0));
}

TEST_CASE("transform: round trip reproduces random fields to 1e-12") {
  for (int d = 1; d <= 3; ++d) {
    TorusGrid g(d, d == 3 ? 8 : 16);
    SpectralField f = random_smooth(g, d, 42 + d);
    SpectralField back =
        SpectralField::from_coeffs(g, d, std::vector<std::complex<double>>(f.coeffs()));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      num += std::abs(back.values()[i] - f.values()[i]);
      den += std::abs(f.values()[i]);
    }
    CHECK(num / den < 1e-12);
  }
}

TEST_CASE("transform: Parseval equality") {
  TorusGrid g(2, 16);
  SpectralField f = random_smooth(g, 1, 7);
  double grid_mean_sq = inner_product(f, f);
  // Sum over the full k lattice: last-axis interior modes count twice.
  double coeff_sum = 0.0;
  for (std::int64_t k = 0; k < g.spectral_points(); ++k) {
    auto wv = wave_vector(g, k);
    double w = (wv[g.dim() - 1] == 0 || wv[g.dim() - 1] == g.n() / 2) ? 1.0 : 2.0;
    coeff_sum += w * std::norm(f.coeff(0, k));
  }
  CHECK(rel_err(coeff_sum, grid_mean_sq) < 1e-12);
}

TEST_CASE("project: mode outside cutoff is removed, inside unchanged") {
  TorusGrid g(1, 16);
  SpectralField hi = trig_mode(g, 3, true);
  SpectralField lo = trig_mode(g, 1, true);
  CHECK(l2_norm(project(hi, 2)) < 1e-14);
  CHECK(l2_norm(subtract(project(lo, 1), lo)) < 1e-14);
}

TEST_CASE("project: idempotent and self-adjoint, commutes with derivative") {
  TorusGrid g(1, 32);
  SpectralField f = random_smooth(g, 1, 11, 9);
  SpectralField h = random_smooth(g, 1, 13, 9);
  const int m = 5;
  CHECK(l2_norm(subtract(project(project(f, m), m), project(f, m))) < 1e-13);
  CHECK(std::abs(inner_product(project(f, m), h) - inner_product(f, project(h, m))) <
        1e-12);
  SpectralField a = gradient(project(f, m));
  SpectralField b = project(gradient(f), m);
  CHECK(l2_norm(subtract(a, b)) < 1e-11);
}

TEST_CASE("project: cutoff above N/3 is a configuration error") {
  TorusGrid g(1, 16);
  SpectralField f = trig_mode(g, 1, false);
  CHECK_THROWS_AS(project(f, 6), ConfigError);
}

TEST_CASE("differentiate: laplacian eigenfunction and constants") {
  TorusGrid g(1, 32);
  SpectralField c = SpectralField::constant(g, 5.0);
  CHECK(l2_norm(laplacian(c)) < 1e-14);

  SpectralField s = trig_mode(g, 1, true);
  SpectralField ls = laplacian(s);
  SpectralField want = scaled(s, -kTwoPi * kTwoPi);
  CHECK(l2_norm(subtract(ls, want)) / l2_norm(want) < 1e-13);
}

TEST_CASE("differentiate: ninth laplacian power matches symbol oracle") {
  // Build sin(2 pi x) from exact coefficients so high modes hold exact zeros;
  // Delta^9 amplifies mode k by k^18 and would blow up grid-roundoff junk.
  TorusGrid g(1, 32);
  std::vector<std::complex<double>> c(g.spectral_points(), {0.0, 0.0});
  c[1] = {0.0, -0.5};
  SpectralField s = SpectralField::from_coeffs(g, 1, std::move(c));
  SpectralField l9 = laplacian(s, 9);
  double sym = std::pow(-kTwoPi * kTwoPi, 9);
  SpectralField want = scaled(s, sym);
  CHECK(l2_norm(subtract(l9, want)) / l2_norm(want) < 1e-12);
}

TEST_CASE("differentiate: mean of laplacian and divergence vanish exactly") {
  TorusGrid g(2, 16);
  SpectralField f = random_smooth(g, 1, 3);
  SpectralField v = random_smooth(g, 2, 4);
  CHECK(std::abs(field_mean(laplacian(f))) < 1e-15);
  CHECK(std::abs(field_mean(divergence(v))) < 1e-15);
}

TEST_CASE("differentiate: deformation tensor is the symmetric gradient") {
  TorusGrid g(2, 16);
  SpectralField u = random_smooth(g, 2, 5);
  SpectralField du = deformation(u);
  SpectralField jac = gradient(u);
  const int d = 2;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      SpectralField dij = component(du, i * d + j);
      SpectralField sym = scaled(add(component(jac, i * d + j), component(jac, j * d + i)), 0.5);
      CHECK(l2_norm(subtract(dij, sym)) < 1e-11);
    }
}

TEST_CASE("dealias: truncated field unchanged, zero stays zero") {
  TorusGrid g(1, 16);
  SpectralField lo = trig_mode(g, 2, false);
  CHECK(l2_norm(subtract(dealias(lo), lo)) < 1e-14);
  SpectralField z = SpectralField::zero(g, 1);
  CHECK(l2_norm(dealias(z)) == 0.0);
}

TEST_CASE("dealias: aliased ghost of a squared mode is removed") {
  // sin(2 pi m x)^2 = 1/2 - cos(4 pi m x)/2 with m inside the dealias band;
  // 2m = 10 > N/2 wraps onto |N - 2m| = 6, outside the band, and must vanish.
  TorusGrid g(1, 16);
  const int m = 5;
  SpectralField s = trig_mode(g, m, true);
  SpectralField raw = SpectralField::from_values(
      g, 1, [&] {
        std::vector<double> v(g.points());
        for (std::int64_t j = 0; j < g.points(); ++j) v[j] = s.value(0, j) * s.value(0, j);
        return v;
      }());
  CHECK(std::abs(raw.coeff(0, 6)) > 0.2);  // ghost present before truncation
  SpectralField prod = multiply(s, s);     // dealiased internally
  // Exact product restricted to the dealiased band: only the mean survives.
  CHECK(prod.coeff(0, 0).real() == doctest::Approx(0.5));
  for (std::int64_t k = 1; k < g.spectral_points(); ++k)
    CHECK(std::abs(prod.coeff(0, k)) < 1e-14);
}

TEST_CASE("inner products: orthogonality and closed forms") {
  TorusGrid g(1, 32);
  SpectralField s = trig_mode(g, 1, true);
  SpectralField c = trig_mode(g, 1, false);
  SpectralField one = SpectralField::constant(g, 1.0);
  CHECK(std::abs(inner_product(s, c)) < 1e-15);
  CHECK(inner_product(one, one) == doctest::Approx(1.0));
  CHECK(inner_product(s, s) == doctest::Approx(0.5));
}

TEST_CASE("inner product: grid mismatch is a configuration error") {
  TorusGrid a(1, 16), b(1, 32);
  CHECK_THROWS_AS(
      inner_product(SpectralField::constant(a, 1.0), SpectralField::constant(b, 1.0)),
      ConfigError);
}

TEST_CASE("integrating factor: exact heat decay per mode") {
  TorusGrid g(1, 32);
  SpectralField s = trig_mode(g, 3, true);
  double eps = 0.01, dt = 0.125;
  SpectralField decayed = integrating_factor(s, eps, dt);
  double want = std::exp(-eps * kTwoPi * kTwoPi * 9 * dt);
  CHECK(rel_err(decayed.coeff(0, 3).imag(), s.coeff(0, 3).imag() * want) < 1e-13);
}

TEST_CASE("resample: refines then restricts to the same field") {
  TorusGrid g(1, 16);
  SpectralField f = random_smooth(g, 1, 21, 4);
  SpectralField up = resample(f, 32);
  SpectralField back = resample(up, 16);
  CHECK(l2_norm(subtract(back, f)) < 1e-12);
  CHECK(rel_err(inner_product(up, up), inner_product(f, f)) < 1e-12);
}
