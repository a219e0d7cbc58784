#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "scns/limits.hpp"
#include "test_util.hpp"

using namespace scns;
using namespace scns::testutil;

namespace {
RegularizationParams sweep_params() {
  RegularizationParams p;
  p.a = 1.0;
  p.gamma = 1.5;
  p.m = 8;
  p.dt = 2e-4;
  p.h = 2e-4;
  p.r1 = 0.4;
  p.r2 = 0.4;
  p.R = 1e9;
  return p;
}
}  // namespace

TEST_CASE("schedule: faithful stage-3 values live in log space") {
  auto base = sweep_params();
  LimitScheduleConfig cfg;
  cfg.stage3_n = {2, 3, 4};
  cfg.alpha = 77.0;
  cfg.beta = 3.0;
  LimitSchedule s = build_schedule(base, cfg);
  std::vector<const LimitTuple*> stage3;
  for (const auto& t : s.tuples)
    if (t.stage == 3) stage3.push_back(&t);
  REQUIRE(stage3.size() == 3);
  CHECK(stage3[0]->log10_delta == doctest::Approx(-77.0 * std::log10(2.0)));
  CHECK(stage3[1]->log10_delta == doctest::Approx(-77.0 * std::log10(3.0)));
  CHECK(stage3[2]->log10_delta == doctest::Approx(-77.0 * std::log10(4.0)));
  // n^-77 underflows for n >= 2? 2^-77 ~ 6.6e-24 is representable; 3^-77 ~ 1e-37 too;
  // the r0 coupling exponent is what collapses to zero
  const double r0_exp = 1.0 + (7.0 / 4.0) * ((13.0 / 10.0) * 77.0 + 1.5 * 3.0) + 1.5;
  CHECK(stage3[0]->log10_r0 == doctest::Approx(-r0_exp * std::log10(2.0)));
  CHECK(stage3[2]->params.r0 > 0.0);  // n = 4 is still representable
  CHECK_FALSE(stage3[2]->underflowed);

  // large n drives the coupled r0 below the double-precision floor; the
  // schedule keeps the log-space value and flags the zero honestly
  LimitScheduleConfig big = cfg;
  big.stage3_n = {2, 100};
  LimitSchedule s2 = build_schedule(base, big);
  const LimitTuple* last = nullptr;
  for (const auto& t : s2.tuples)
    if (t.stage == 3) last = &t;
  REQUIRE(last != nullptr);
  CHECK(last->params.r0 == 0.0);
  CHECK(last->underflowed);
  CHECK(std::isfinite(last->log10_r0));
}

TEST_CASE("schedule: alpha exactly 76 is rejected, illustrative mode is not") {
  auto base = sweep_params();
  LimitScheduleConfig cfg;
  cfg.alpha = 76.0;
  CHECK_THROWS_AS(build_schedule(base, cfg), ConfigError);
  cfg.illustrative = true;
  CHECK_NOTHROW(build_schedule(base, cfg));
  cfg.illustrative = false;
  cfg.alpha = 77.0;
  cfg.beta = 2400.0 / 947.0;
  CHECK_THROWS_AS(build_schedule(base, cfg), ConfigError);
}

TEST_CASE("schedule: stage-2 couples K to kappa^(-3/4); stages arrive in order") {
  auto base = sweep_params();
  LimitScheduleConfig cfg;
  LimitSchedule s = build_schedule(base, cfg);
  int last_stage = 0;
  for (const auto& t : s.tuples) {
    CHECK(t.stage >= last_stage);
    last_stage = t.stage;
    if (t.stage == 2) CHECK(t.K_mv == doctest::Approx(std::pow(t.params.kappa, -0.75)));
  }
  // single-tuple schedule
  LimitScheduleConfig one;
  one.stage1_count = 1;
  one.stage2_count = 0;
  one.stage3_n = {};
  one.stage4_count = 0;
  LimitSchedule s1 = build_schedule(base, one);
  CHECK(s1.tuples.size() == 1);
}

TEST_CASE("sweep: identical consecutive tuples give zero successive differences") {
  TorusGrid g(1, 32);
  auto base = sweep_params();
  SpectralField rho_raw = add(SpectralField::constant(g, 1.0), trig_mode(g, 1, true, 0.2));
  FluidState s0 = prepare_initial(rho_raw, trig_mode(g, 1, false, 0.1), base);
  auto noise = NoiseModel::make(2, 0.2, 1.0, NoiseFamily::constant, 17, 1);

  LimitSchedule sched;
  for (int i = 0; i < 2; ++i) {
    LimitTuple t;
    t.stage = 4;
    t.index = i;
    t.params = base;  // identical parameters
    sched.tuples.push_back(t);
  }
  SweepConfig cfg;
  cfg.ensemble.n_paths = 3;
  cfg.ensemble.horizon = 0.01;
  cfg.ensemble.run.track_balances = false;
  ConvergenceReport rep = sweep(s0, noise, sched, cfg);
  REQUIRE(rep.tuples.size() == 2);
  CHECK(rep.tuples[1].final_state_distance == 0.0);
  CHECK(std::abs(rep.tuples[1].mean_energy - rep.tuples[0].mean_energy) == 0.0);
}

TEST_CASE("sweep: stage-4 halving contracts state differences by >= 1.5") {
  TorusGrid g(1, 32);
  auto base = sweep_params();
  SpectralField rho_raw = add(SpectralField::constant(g, 1.0), trig_mode(g, 1, true, 0.2));
  FluidState s0 = prepare_initial(rho_raw, trig_mode(g, 1, false, 0.1), base);
  auto noise = NoiseModel::make(2, 0.2, 1.0, NoiseFamily::constant, 19, 1);

  LimitScheduleConfig cfg;
  cfg.stage1_count = 0;
  cfg.stage2_count = 0;
  cfg.stage3_n = {};
  cfg.stage4_count = 4;
  cfg.r10 = 0.4;
  cfg.r20 = 0.4;
  LimitSchedule sched = build_schedule(base, cfg);
  SweepConfig scfg;
  scfg.ensemble.n_paths = 4;
  scfg.ensemble.horizon = 0.05;
  scfg.ensemble.run.track_balances = false;
  scfg.ensemble.workers = 4;
  ConvergenceReport rep = sweep(s0, noise, sched, scfg);
  const auto& row = rep.cauchy[3];  // stage 4
  REQUIRE(row.state_diffs.size() == 3);
  for (std::size_t i = 0; i + 1 < row.state_diffs.size(); ++i)
    CHECK(row.state_diffs[i] / row.state_diffs[i + 1] >= 1.5);
}

TEST_CASE("sweep: stage-1 eps halving converges at first order in eps") {
  TorusGrid g(1, 32);
  auto base = sweep_params();
  base.r1 = 0.0;
  base.r2 = 0.1;
  SpectralField rho_raw = add(SpectralField::constant(g, 1.0), trig_mode(g, 1, true, 0.2));
  FluidState s0 = prepare_initial(rho_raw, trig_mode(g, 1, false, 0.1), base);
  auto none = NoiseModel::make(0, 0.0, 1.0, NoiseFamily::constant, 1, 1);

  LimitScheduleConfig cfg;
  cfg.stage1_count = 4;
  cfg.eps0 = 8e-5;
  cfg.stage2_count = 0;
  cfg.stage3_n = {};
  cfg.stage4_count = 0;
  LimitSchedule sched = build_schedule(base, cfg);
  SweepConfig scfg;
  scfg.ensemble.n_paths = 1;
  scfg.ensemble.horizon = 0.05;
  scfg.ensemble.run.track_balances = false;
  ConvergenceReport rep = sweep(s0, none, sched, scfg);
  const auto& row = rep.cauchy[0];
  REQUIRE(row.state_diffs.size() == 3);
  // Richardson ratio about 2 per halving of eps
  CHECK(row.state_diffs[0] / row.state_diffs[1] == doctest::Approx(2.0).epsilon(0.3));
  CHECK(row.state_diffs[1] / row.state_diffs[2] == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("sweep: resume from saved tuple files reproduces the report") {
  TorusGrid g(1, 32);
  auto base = sweep_params();
  SpectralField rho_raw = add(SpectralField::constant(g, 1.0), trig_mode(g, 1, true, 0.2));
  FluidState s0 = prepare_initial(rho_raw, trig_mode(g, 1, false, 0.1), base);
  auto noise = NoiseModel::make(2, 0.2, 1.0, NoiseFamily::constant, 23, 1);

  LimitScheduleConfig cfg;
  cfg.stage1_count = 0;
  cfg.stage2_count = 0;
  cfg.stage3_n = {};
  cfg.stage4_count = 2;
  LimitSchedule sched = build_schedule(base, cfg);
  SweepConfig scfg;
  scfg.ensemble.n_paths = 2;
  scfg.ensemble.horizon = 0.01;
  scfg.ensemble.run.track_balances = false;
  scfg.out_dir = "/tmp/scns_sweep_test";
  std::filesystem::remove_all(scfg.out_dir);
  ConvergenceReport full = sweep(s0, noise, sched, scfg);
  // simulate an interrupted rerun: resume from the saved tuples
  scfg.resume = true;
  ConvergenceReport resumed = sweep(s0, noise, sched, scfg);
  REQUIRE(full.tuples.size() == resumed.tuples.size());
  for (std::size_t i = 0; i < full.tuples.size(); ++i) {
    CHECK(full.tuples[i].mean_energy == resumed.tuples[i].mean_energy);
    CHECK(full.tuples[i].final_state_distance == resumed.tuples[i].final_state_distance);
  }
  std::filesystem::remove_all(scfg.out_dir);
}
