#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scns/montecarlo.hpp"
#include "test_util.hpp"

using namespace scns;
using namespace scns::testutil;

namespace {
RegularizationParams mc_params() {
  RegularizationParams p;
  p.a = 1.0;
  p.gamma = 1.5;
  p.m = 8;
  p.dt = 2e-4;
  p.h = 2e-4;
  p.r2 = 0.5;
  p.R = 1e9;
  return p;
}

FluidState mc_state(const TorusGrid& g, const RegularizationParams& p) {
  SpectralField rho_raw = add(SpectralField::constant(g, 1.0), trig_mode(g, 1, true, 0.2));
  return prepare_initial(rho_raw, trig_mode(g, 1, false, 0.1), p);
}
}  // namespace

TEST_CASE("ensemble: single path report equals that path's sup statistics") {
  TorusGrid g(1, 32);
  auto p = mc_params();
  auto noise = NoiseModel::make(2, 0.2, 1.0, NoiseFamily::constant, 11, 1);
  FluidState s0 = mc_state(g, p);
  EnsembleConfig cfg;
  cfg.n_paths = 1;
  cfg.horizon = 0.02;
  cfg.r_orders = {3.0};
  cfg.run.track_balances = false;
  EnsembleResult r = run_ensemble(s0, p, noise, cfg);
  REQUIRE(r.report.n_failed == 0);
  double sup_e = 0.0;
  for (const auto& row : r.paths[0].rows) sup_e = std::max(sup_e, row.e_total);
  CHECK(r.report.sup_moments.at("energy").at(3.0).value ==
        doctest::Approx(std::pow(sup_e, 3.0)));
}

TEST_CASE("ensemble: results independent of worker count, same seed bit-identical") {
  TorusGrid g(1, 32);
  auto p = mc_params();
  auto noise = NoiseModel::make(3, 0.2, 1.0, NoiseFamily::constant, 21, 1);
  FluidState s0 = mc_state(g, p);
  EnsembleConfig cfg;
  cfg.n_paths = 6;
  cfg.horizon = 0.02;
  cfg.run.track_balances = false;
  cfg.workers = 1;
  EnsembleResult a = run_ensemble(s0, p, noise, cfg);
  cfg.workers = 4;
  EnsembleResult b = run_ensemble(s0, p, noise, cfg);
  for (int i = 0; i < cfg.n_paths; ++i) {
    REQUIRE(a.paths[i].rows.size() == b.paths[i].rows.size());
    for (std::size_t j = 0; j < a.paths[i].rows.size(); ++j)
      CHECK(a.paths[i].rows[j].e_total == b.paths[i].rows[j].e_total);
  }
  CHECK(a.report.sup_moments.at("energy").at(3.0).value ==
        b.report.sup_moments.at("energy").at(3.0).value);
}

TEST_CASE("frozen linear noise: kinetic energy matches the closed form within 3 SE") {
  TorusGrid g(1, 32);
  auto noise = NoiseModel::make(3, 0.4, 1.0, NoiseFamily::constant, 33, 1);
  auto rep = frozen_linear_noise_test(g, 8, 0.3, noise, 0.25, 16, 10000);
  CHECK(rep.within_3se);
  CHECK(rep.closed_form > 0.5 * 0.3 * 0.3);  // the noise genuinely contributes
}

TEST_CASE("bootstrap: CI contains the closed-form mean on a linear problem") {
  // N(1, 0.25) samples; 99%-style check at the 95% interval with slack
  std::vector<double> samples(4000);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] = 1.0 + 0.5 * gauss_draw(7, 0, i, 0);
  auto e = bootstrap_mean(samples, 13);
  CHECK(e.ci_lo < 1.0);
  CHECK(e.ci_hi > 1.0);
  CHECK(e.ci_hi - e.ci_lo < 0.1);
}

TEST_CASE("bdg: Brownian bracket at m=1 and scale invariance") {
  auto r1 = bdg_ratio(1, 20000, 64, 1.0, 1.0, 17);
  CHECK(r1.bracket_checked);
  CHECK(r1.pass);
  CHECK(r1.ratio > 1.0);
  CHECK(r1.ratio <= 4.0);
  auto r2 = bdg_ratio(1, 20000, 64, 1.0, 2.0, 17);
  CHECK(r2.ratio == doctest::Approx(r1.ratio).epsilon(1e-12));  // ratio is scale free

  auto rd = bdg_ratio(1, 100, 8, 1.0, 0.0, 3);
  CHECK(rd.degenerate);
}

TEST_CASE("holder: Brownian paths give ~1/2, linear drift gives ~1") {
  auto bm = brownian_paths(4000, 256, 1.0, 5);
  auto hb = holder_exponent(bm, 1.0 / 256, 2.0, 0, 6);
  REQUIRE(hb.ok);
  CHECK(std::abs(hb.exponent - 0.5) < 0.03);

  auto lin = linear_drift_paths(4, 256, 1.0, 0.7);
  auto hl = holder_exponent(lin, 1.0 / 256, 2.0, 0, 6);
  REQUIRE(hl.ok);
  CHECK(hl.exponent == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("holder: damped momentum integral sits strictly inside (0.35, 0.5)") {
  auto paths = momentum_integral_paths(4000, 1024, 4.0, 2.0, 9);
  auto h = holder_exponent(paths, 4.0 / 1024, 2.0, 2, 9);
  REQUIRE(h.ok);
  CHECK(h.exponent > 0.35);
  CHECK(h.exponent < 0.5);
}

TEST_CASE("ito product rule: the three printed cases") {
  auto det = ito_product_check(ItoCheckKind::deterministic_product, 1, 512, 1.0, 1);
  CHECK(std::abs(det.mean_residual) < 1e-2);  // O(dt)
  auto det2 = ito_product_check(ItoCheckKind::deterministic_product, 1, 1024, 1.0, 1);
  CHECK(std::abs(det.mean_residual) / std::abs(det2.mean_residual) ==
        doctest::Approx(2.0).epsilon(0.1));

  auto w2 = ito_product_check(ItoCheckKind::w_squared, 20000, 64, 1.0, 2);
  CHECK(w2.within_3se);

  auto ind = ito_product_check(ItoCheckKind::independent_pair, 20000, 64, 1.0, 3);
  CHECK(ind.within_3se);
}

TEST_CASE("euler-maruyama orders: additive ~1, multiplicative ~1/2, deterministic ~1") {
  auto add = em_order_estimate(EmTestProblem::additive_linear, 2000, 8, 4, 1.0, 11);
  CHECK(add.order > 0.8);  // EM coincides with Milstein for additive noise

  auto mult =
      em_order_estimate(EmTestProblem::multiplicative_momentum, 400, 8, 4, 0.5, 12);
  CHECK(std::abs(mult.order - 0.5) < 0.1);

  auto det = em_order_estimate(EmTestProblem::zero_noise, 1, 8, 4, 1.0, 13);
  CHECK(std::abs(det.order - 1.0) < 0.1);
}

TEST_CASE("theorem-shape bound: empirical C finite and stable under doubling") {
  TorusGrid g(1, 32);
  auto p = mc_params();
  p.r0 = 0.1;
  p.r1 = 0.1;
  auto noise = NoiseModel::make(3, 0.25, 1.0, NoiseFamily::constant, 41, 1);
  FluidState s0 = mc_state(g, p);
  EnsembleConfig cfg;
  cfg.n_paths = 64;
  cfg.horizon = 0.05;
  cfg.r_orders = {3.0};
  cfg.run.track_balances = false;
  cfg.workers = 4;
  EnsembleResult small = run_ensemble(s0, p, noise, cfg);
  cfg.n_paths = 128;
  EnsembleResult big = run_ensemble(s0, p, noise, cfg);
  const double c1 = small.report.c_hat_energy.at(3.0);
  const double c2 = big.report.c_hat_energy.at(3.0);
  CHECK(std::isfinite(c1));
  CHECK(std::isfinite(c2));
  CHECK(std::abs(c1 - c2) / c2 < 0.2);
}
