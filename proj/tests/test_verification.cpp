#include <doctest.h>

#include <cmath>

#include "slipfsi/errors.hpp"
#include "slipfsi/verification.hpp"

using namespace slipfsi;

namespace {

SimConfig small_swirl(BodyMode mode) {
  SimConfig c;
  c.n_r = 12;
  c.n_theta = 24;
  c.body_mode = mode;
  c.initial = InitialKind::swirl;
  c.amplitude = 1.0;
  c.t_end = 0.2;
  return c;
}

}  // namespace

TEST_CASE("log-log slope of a power law") {
  CHECK(loglog_slope({1.0, 0.5, 0.25}, {3.0, 0.75, 0.1875}) == doctest::Approx(2.0));
  CHECK(loglog_slope({1e-2, 5e-3}, {2e-2, 1e-2}) == doctest::Approx(1.0));
  CHECK_THROWS(loglog_slope({1.0}, {1.0}));
}

TEST_CASE("energy rates are nonnegative and vanish at rest") {
  SimConfig rest = small_swirl(BodyMode::free);
  rest.initial = InitialKind::rest;
  const FluidSolver s0(rest);
  const EnergyRates r0 = energy_rates(s0.initialize(), s0);
  CHECK(r0.E == 0.0);
  CHECK(r0.visc == 0.0);
  CHECK(r0.slip == 0.0);

  const FluidSolver s1(small_swirl(BodyMode::pinned));
  const EnergyRates r1 = energy_rates(s1.initialize(), s1);
  CHECK(r1.E > 0.0);
  CHECK(r1.visc > 0.0);
  CHECK(r1.slip > 0.0);  // the swirl slips past the pinned body
  CHECK(r1.E_extended == doctest::Approx(r1.E));  // body at rest adds nothing
}

TEST_CASE("energy ledger closes on a coarse pinned swirl") {
  const EnergyStudy st = energy_study(small_swirl(BodyMode::pinned));
  REQUIRE(st.history.size() > 2);
  CHECK(st.history.front().defect == 0.0);
  CHECK(st.E0 > 0.0);
  CHECK(st.max_abs_defect < 1e-2 * st.E0);
  for (std::size_t k = 1; k < st.history.size(); ++k) {
    CHECK(st.history[k].E_total < st.history[k - 1].E_total);
    CHECK(st.history[k].D_visc >= st.history[k - 1].D_visc);
  }
}

TEST_CASE("Reynolds transport is exact in the limit for simple flows") {
  const ScalarSpec one = [](double, const Vec2&) { return 1.0; };
  const VelocitySpec spin = [](double, const Vec2& x) -> Vec2 { return Vec2(-x.y(), x.x()); };
  ReynoldsOptions o;
  o.n_radial = 8;
  o.n_steps = 16;
  const ReynoldsResult r = reynolds_check(one, spin, o);
  CHECK(r.max_defect < 1e-8);
  CHECK(r.max_volume_defect < 1e-8);
  // Uniform expansion: d/dt vol = 2 vol, checked through f = 1.
  const VelocitySpec grow = [](double, const Vec2& x) -> Vec2 { return 0.5 * x; };
  const ReynoldsResult g = reynolds_check(one, grow, o);
  CHECK(g.max_defect < 1e-3);
  CHECK(g.max_volume_defect > 0.1);
  o.n_steps = 1;
  CHECK_THROWS_AS(reynolds_check(one, spin, o), InvalidInput);
}

TEST_CASE("weak-strong comparison of identical runs is exact") {
  SimConfig c = small_swirl(BodyMode::free);
  c.q0 = Vec2(0.2, 0.1);
  c.t_end = 0.1;
  WeakStrongOptions o;
  o.sample_every = 2;
  const StrongRun strong = strong_run(c, o);
  const GapReport zero = compare_runs(c, 0.0, strong, o);
  REQUIRE(!zero.times.empty());
  for (double g : zero.gap_L2) CHECK(g < 1e-13);
  for (double r : zero.residual_norm) CHECK(r < 1e-12);
  const GapReport hit = compare_runs(c, 1e-2, strong, o);
  CHECK(hit.gap_L2.front() > 1e-3);
  CHECK(hit.inequality_holds);
  CHECK(hit.times == zero.times);
}
