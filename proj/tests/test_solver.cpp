#include <doctest.h>

#include <cmath>

#include "slipfsi/errors.hpp"
#include "slipfsi/solver.hpp"
#include "slipfsi/verification.hpp"

using namespace slipfsi;

namespace {

GridField random_field(const AnnulusGrid& g, std::uint64_t seed, bool zero_walls) {
  GridField U = seeded_perturbation(g, seed);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 y = g.node(i, j);
      U.set_vec(i, j, U.vec(i, j) + Vec2(std::sin(2 * y.x()) + y.y(), std::cos(y.x() * y.y())));
      if (zero_walls && (i == 0 || i == g.n_r())) U.set_vec(i, j, Vec2::Zero());
    }
  U.fill_ghosts_extrapolate();
  return U;
}

double inner(const AnnulusGrid& g, const GridField& a, const GridField& b) {
  double s = 0.0;
  for (int i = 1; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) s += g.weight(i, j) * a.vec(i, j).dot(b.vec(i, j));
  return s;
}

SimConfig small(BodyMode mode) {
  SimConfig c;
  c.n_r = 12;
  c.n_theta = 24;
  c.body_mode = mode;
  c.t_end = 0.1;
  return c;
}

}  // namespace

TEST_CASE("slip boundary condition is satisfied after application") {
  const AnnulusGrid g(12, 24, 0.5, 2.0);
  const BoundaryValues bv{Vec2(0.3, -0.2), 0.7};
  for (SlipKind kind : {SlipKind::navier, SlipKind::no_slip}) {
    GridField U = random_field(g, 3, false);
    apply_slip_bc(U, g, bv, 0.05, 2.0, kind);
    const SlipResiduals r = slip_residuals(U, g, bv, 0.05, 2.0, kind);
    CHECK(r.normal < 1e-13);
    CHECK(r.tangential < 1e-12);
    for (int j = 0; j < g.n_theta(); ++j) CHECK(U.vec(g.n_r(), j).norm() == 0.0);
  }
  // Slip law residual is nonzero before application.
  const GridField V = random_field(g, 3, false);
  CHECK(slip_residuals(V, g, bv, 0.05, 2.0, SlipKind::navier).tangential > 1e-3);
}

TEST_CASE("projection is divergence free, idempotent and energy orthogonal") {
  const AnnulusGrid g(12, 24, 0.5, 2.0);
  const TransformAtlas flat = flat_atlas(g);
  const Projector proj(g, false, 1e-12, 500);
  GridField U = random_field(g, 5, true), V = random_field(g, 9, true);
  const GridField U0 = U;
  Vec2 A = Vec2::Zero();
  const ProjectionResult r = proj.project(U, A, flat, 1.0);
  proj.project(V, A, flat, 1.0);
  CHECK(r.residual < 1e-10);
  CHECK(max_divergence(U, g) < 1e-10);
  CHECK(max_divergence(U0, g) > 1e-2);
  GridField removed = U0;
  for (std::size_t k = 0; k < removed.raw().size(); ++k) removed.raw()[k] -= U.raw()[k];
  CHECK(std::abs(inner(g, removed, V)) < 1e-9 * std::sqrt(inner(g, removed, removed) * inner(g, V, V)));
  CHECK(inner(g, U, U) < inner(g, U0, U0));
  GridField again = U;
  proj.project(again, A, flat, 1.0);
  double change = 0.0;
  for (std::size_t k = 0; k < again.raw().size(); ++k) change = std::max(change, std::abs(again.raw()[k] - U.raw()[k]));
  CHECK(change < 1e-10);
}

TEST_CASE("free-body projection exchanges momentum with the body") {
  const AnnulusGrid g(12, 24, 0.5, 2.0);
  const TransformAtlas flat = flat_atlas(g);
  const Projector proj(g, true, 1e-12, 500);
  GridField U(g, 2);
  U.fill_ghosts_extrapolate();
  Vec2 A(1.0, 0.0);
  proj.project(U, A, flat, 1.0);
  // A body moving alone must push fluid; its velocity drops below 1.
  CHECK(A.x() < 1.0);
  CHECK(A.x() > 0.0);
  CHECK(std::abs(A.y()) < 1e-10);
  CHECK(max_divergence(U, g) < 1e-9);
}

TEST_CASE("schedule covers the interval exactly") {
  const Schedule s = make_schedule(0.0, 1.0, 0.3);
  CHECK(s.steps == 4);
  CHECK(s.dt == doctest::Approx(0.25));
  CHECK(make_schedule(1.0, 1.0, 0.1).steps == 0);
}

TEST_CASE("seeded perturbation is deterministic and normalized") {
  const AnnulusGrid g(12, 24, 0.5, 2.0);
  const GridField a = seeded_perturbation(g, 42), b = seeded_perturbation(g, 42), c = seeded_perturbation(g, 43);
  CHECK(a.raw() == b.raw());
  CHECK(a.raw() != c.raw());
  double m = 0.0;
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) m = std::max(m, a.vec(i, j).norm());
  CHECK(m == doctest::Approx(1.0));
  for (int j = 0; j < g.n_theta(); ++j) {
    CHECK(a.vec(0, j).norm() < 1e-12);
    CHECK(a.vec(g.n_r(), j).norm() < 1e-12);
  }
}

TEST_CASE("fluid at rest around a resting body stays at rest") {
  const FluidSolver solver(small(BodyMode::free));
  SimState s = solver.initialize();
  for (int n = 0; n < 3; ++n) s = solver.step(s, 0.01);
  double m = 0.0;
  for (double v : s.flow.U.raw()) m = std::max(m, std::abs(v));
  CHECK(m < 1e-14);
  CHECK(s.rigid.a.norm() < 1e-14);
  CHECK(s.flow.t == doctest::Approx(0.03));
}

TEST_CASE("time step above the stability limit is rejected with a suggestion") {
  SimConfig c = small(BodyMode::pinned);
  c.initial = InitialKind::swirl;
  c.amplitude = 1.0;
  const FluidSolver solver(c);
  const SimState s = solver.initialize();
  const double lim = solver.stable_dt(s);
  try {
    solver.step(s, 2.0 * lim);
    FAIL("expected CflViolation");
  } catch (const CflViolation& e) {
    CHECK(e.suggested_dt() == doctest::Approx(c.cfl * lim));
  }
  CHECK_THROWS_AS(solver.step(s, 0.0), InvalidInput);
}

TEST_CASE("pinned swirl decays monotonically and spins a free body") {
  SimConfig c = small(BodyMode::pinned);
  c.initial = InitialKind::swirl;
  c.amplitude = 1.0;
  const FluidSolver pinned(c);
  SimState s = pinned.initialize();
  const double dt = pinned.auto_dt(s);
  double E = energy_rates(s, pinned).E;
  for (int n = 0; n < 10; ++n) {
    StepInfo info;
    s = pinned.step(s, dt, &info);
    CHECK(info.divergence < 1e-8);
    CHECK(info.normal_residual < 1e-12);
    const double En = energy_rates(s, pinned).E;
    CHECK(En < E);
    E = En;
  }
  CHECK(s.rigid.omega(0) == 0.0);

  c.body_mode = BodyMode::free;
  const FluidSolver free(c);
  SimState f = free.initialize();
  for (int n = 0; n < 10; ++n) f = free.step(f, dt);
  CHECK(f.rigid.omega(0) > 0.0);       // counter-clockwise swirl drags the body along
  CHECK(f.rigid.a.norm() < 1e-10);     // axisymmetric: no net force
}
