#include <cmath>
#include <memory>

#include "doctest.h"
#include "slipfsi/errors.hpp"
#include "slipfsi/transform.hpp"

using namespace slipfsi;

namespace {

constexpr double kEps = 0.03;

// Volume-preserving test map: composition of two shears.
Vec2 test_map(const Vec2& y, double e) {
  const double x0 = y.x() + e * std::sin(y.y());
  return Vec2(x0, y.y() + 0.7 * e * std::sin(x0));
}

TransformAtlas analytic_atlas(const AnnulusGrid& g, double e, double t = 0.0) {
  TransformAtlas atlas;
  atlas.t = t;
  atlas.coords = std::make_shared<ReferenceCoordinates>(g);
  atlas.X = GridField(g, 2, t);
  for (int i = -1; i <= g.n_r() + 1; ++i)
    for (int j = 0; j < g.n_theta(); ++j) atlas.X.set_vec(i, j, test_map(g.node(i, j), e));
  finalize_geometry(atlas);
  return atlas;
}

Vec2 u_phys(const Vec2& x) { return Vec2(std::sin(x.y()), std::cos(x.x()) * 0.5 + x.x() * x.y()); }
Vec2 lap_u(const Vec2& x) { return Vec2(-std::sin(x.y()), -0.5 * std::cos(x.x())); }
Vec2 conv_u(const Vec2& x) {
  const Vec2 u = u_phys(x);
  Mat2 G;  // G(a,b) = du_a/dx_b
  G << 0.0, std::cos(x.y()), -0.5 * std::sin(x.x()) + x.y(), x.x();
  return G * u;
}

GridField pullback(const TransformAtlas& atlas, Vec2 (*f)(const Vec2&)) {
  const AnnulusGrid& g = atlas.grid();
  GridField U(g, 2, atlas.t);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      U.set_vec(i, j, atlas.inverse_jacobian(i, j) * f(atlas.X.vec(i, j)));
  U.fill_ghosts_extrapolate();
  return U;
}

double interior_error(const TransformAtlas& atlas, const GridField& got, const GridField& want) {
  double e = 0.0;
  const AnnulusGrid& g = atlas.grid();
  for (int i = 2; i <= g.n_r() - 2; ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      for (int c = 0; c < 2; ++c) e = std::max(e, std::abs(got(c, i, j) - want(c, i, j)));
  return e;
}

}  // namespace

TEST_CASE("flat atlas has identity metric and no Christoffel symbols") {
  AnnulusGrid g(16, 32, 0.5, 2.0);
  TransformAtlas a = flat_atlas(g);
  for (int i = 0; i <= g.n_r(); i += 4)
    for (int j = 0; j < g.n_theta(); j += 7) {
      CHECK((a.metric_up(i, j) - Mat2::Identity()).norm() < 1e-12);
      for (int k = 0; k < 6; ++k) CHECK(std::abs(a.christoffel(k, i, j)) < 1e-9);
    }
  GridField U = pullback(a, u_phys);
  GridField L = op_L(U, a);
  GridField D = discrete_operator(U, OperatorKind::laplacian, g);
  CHECK(interior_error(a, L, D) < 1e-8);
}

TEST_CASE("rigid atlas inverts exactly") {
  AnnulusGrid g(16, 32, 0.5, 2.0);
  TransformAtlas a = rigid_atlas(g, Vec2(0.2, -0.1), rotation2(0.4), Vec2(1.0, 0.0), 0.3);
  const Vec2 y(0.9, 0.4);
  const Vec2 x = a.map(y);
  CHECK((x - (Vec2(0.2, -0.1) + rotation2(0.4) * y)).norm() < 1e-12);
  CHECK((invert_map(a, x) - y).norm() < 1e-12);
  CHECK(a.has_time_derivatives);
  // Ydot of a rigid motion: -Q^T (a + omega x (X - q)).
  const Vec2 x0 = a.X.vec(3, 5);
  const Vec2 expect = -rotation2(0.4).transpose() * (Vec2(1.0, 0.0) + 0.3 * Vec2(-(x0 - Vec2(0.2, -0.1)).y(), (x0 - Vec2(0.2, -0.1)).x()));
  CHECK((a.Ydot.vec(3, 5) - expect).norm() < 1e-10);
}

TEST_CASE("Christoffel symbols match the metric formula") {
  AnnulusGrid g(32, 64, 0.5, 2.0);
  TransformAtlas a = analytic_atlas(g, kEps);
  // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
  GridField glo = a.g_lo;
  glo.fill_ghosts_extrapolate();
  double e = 0.0;
  for (int i = 2; i <= g.n_r() - 2; i += 3)
    for (int j = 0; j < g.n_theta(); j += 5) {
      Vec2 dg[3];
      for (int s = 0; s < 3; ++s) dg[s] = gradient_at(g, glo, s, i, j);
      auto d = [&](int m, int a_, int b_) { return dg[a_ + b_](m); };
      for (int k = 0; k < 2; ++k)
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) {
            double v = 0.0;
            for (int l = 0; l < 2; ++l) v += 0.5 * a.gup(k, l, i, j) * (d(p, q, l) + d(q, p, l) - d(l, p, q));
            e = std::max(e, std::abs(v - a.gamma(k, p, q, i, j)));
          }
    }
  CHECK(e < 1e-3);
}

TEST_CASE("transformed Laplacian, convection and gradient commute with the pullback") {
  auto errors = [](int n) {
    AnnulusGrid g(n, 2 * n, 0.5, 2.0);
    TransformAtlas a = analytic_atlas(g, kEps);
    GridField U = pullback(a, u_phys);
    const double eL = interior_error(a, op_L(U, a), pullback(a, lap_u));
    const double eC = interior_error(a, op_conv(U, a), pullback(a, conv_u));
    GridField P(g, 1);
    for (int i = 0; i <= g.n_r(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        const Vec2 x = a.X.vec(i, j);
        P(0, i, j) = x.x() * x.x() - x.y();
      }
    P.fill_ghosts_extrapolate();
    GridField gp(g, 2);
    for (int i = 0; i <= g.n_r(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        const Vec2 x = a.X.vec(i, j);
        gp.set_vec(i, j, a.inverse_jacobian(i, j) * Vec2(2 * x.x(), -1.0));
      }
    const double eG = interior_error(a, op_G(P, a), gp);
    return std::array<double, 3>{eL, eC, eG};
  };
  const auto e1 = errors(16), e2 = errors(32);
  for (int k = 0; k < 3; ++k) {
    CHECK(e2[k] < 2e-2);
    CHECK(std::log2(e1[k] / e2[k]) > 1.5);
  }
}

TEST_CASE("op_M annihilates the pullback of a steady field") {
  AnnulusGrid g(32, 64, 0.5, 2.0);
  const double dt = 1e-4;
  // X(t, y) = test_map(y, eps * t), around t = 1.
  TransformAtlas a = analytic_atlas(g, kEps);
  GridField Xdot(g, 2);
  for (int i = -1; i <= g.n_r() + 1; ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 y = g.node(i, j);
      Xdot.set_vec(i, j, (test_map(y, kEps * (1 + dt)) - test_map(y, kEps * (1 - dt))) / (2 * dt));
    }
  set_map_velocity(a, Xdot);
  TransformAtlas ap = analytic_atlas(g, kEps * (1 + dt)), am = analytic_atlas(g, kEps * (1 - dt));
  GridField Up = pullback(ap, u_phys), Um = pullback(am, u_phys), U = pullback(a, u_phys);
  GridField M = op_M(U, a);
  double e = 0.0, scale = 0.0;
  for (int i = 2; i <= g.n_r() - 2; ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      for (int c = 0; c < 2; ++c) {
        const double dUdt = (Up(c, i, j) - Um(c, i, j)) / (2 * dt);
        e = std::max(e, std::abs(dUdt + M(c, i, j)));
        scale = std::max(scale, std::abs(dUdt));
      }
  CHECK(scale > 1e-3);
  CHECK(e < 1e-2 * scale);
}

TEST_CASE("op_M requires time derivatives; operators check ghosts") {
  AnnulusGrid g(16, 32, 0.5, 2.0);
  TransformAtlas a = analytic_atlas(g, kEps);
  GridField U(g, 2);
  CHECK_THROWS_AS(op_L(U, a), ContractViolation);
  U.fill_ghosts_extrapolate();
  CHECK_THROWS_AS(op_M(U, a), InvalidInput);
  GridField W(AnnulusGrid(8, 32, 0.5, 2.0), 2);
  W.fill_ghosts_extrapolate();
  CHECK_THROWS_AS(op_L(W, a), ShapeMismatch);
}

TEST_CASE("extension field is rigid near the body, zero near the wall, divergence free") {
  RigidState s = RigidState::planar(0.3, -0.2, 0.4, -0.1, 0.7);
  ExtensionField f = build_extension(s, Geometry{}, 0.15);
  const Vec2 q(0.3, -0.2);
  const Vec2 x_near = q + Vec2(0.52, 0.0);
  const Vec2 rigid = Vec2(0.4, -0.1) + 0.7 * Vec2(0.0, 0.52);
  CHECK((f(0.0, x_near) - rigid).norm() < 1e-14);
  CHECK(f(0.0, Vec2(0.0, 1.98)).norm() < 1e-14);
  const double h = 1e-5;
  for (Vec2 x : {Vec2(1.0, 0.2), Vec2(-0.3, 0.6), Vec2(0.3, -1.1)}) {
    const double div = (f(0, x + Vec2(h, 0)).x() - f(0, x - Vec2(h, 0)).x() +
                        f(0, x + Vec2(0, h)).y() - f(0, x - Vec2(0, h)).y()) / (2 * h);
    CHECK(std::abs(div) < 1e-6);
  }
  RigidState close = RigidState::planar(1.4, 0.0);
  CHECK_THROWS_AS(build_extension(close, Geometry{}, 0.15), ProximityError);
}

TEST_CASE("flow map advance keeps the rigid zone rigid") {
  AnnulusGrid g(16, 48, 0.5, 2.0);
  TransformAtlas a = flat_atlas(g);
  RigidState s = RigidState::planar(0.0, 0.0, 0.2, 0.1, 0.5);
  ExtensionField f = build_extension(s, Geometry{}, 0.15);
  TransformAtlas b = a;
  double dt = 0.01;
  for (int n = 0; n < 20; ++n) {
    ExtensionField fn(n == 0 ? s : step_rigid(s, s.a, s.omega, n * dt), Geometry{}, 0.15);
    b = advance_flow_map(b, fn, dt);
  }
  // inner boundary is the displaced, rotated disk
  for (int j = 0; j < g.n_theta(); j += 6) {
    const Vec2 x = b.X.vec(0, j);
    CHECK((x - Vec2(0.04, 0.02)).norm() == doctest::Approx(0.5).epsilon(1e-6));
    const Vec2 expect = Vec2(0.04, 0.02) + rotation2(0.1) * g.node(0, j);
    CHECK((x - expect).norm() < 1e-6);
  }
  CHECK(b.t == doctest::Approx(0.2));
  const Vec2 y(1.0, 0.3);
  CHECK((invert_map(b, b.map(y)) - y).norm() < 1e-10);
}

TEST_CASE("relative rigid maps and traction transform") {
  RigidState s1 = RigidState::planar(0.1, 0.0, 0.0, 0.0, 0.2);
  RigidState s2 = RigidState::planar(-0.2, 0.3, 1.0, 0.5, -0.4);
  s2.Q = rotation2(0.6);
  const Vec2 x1(0.7, -0.2);
  const Vec2 x2 = compose_relative_map(s1, s2, x1);
  CHECK((compose_relative_map_inverse(s1, s2, x2) - x1).norm() < 1e-14);
  // transformed rigid velocity = Q^T (rigid velocity of body 2 at x2)
  const Mat2 Q = rotation2(0.6);
  const Vec2 u2 = Vec2(1.0, 0.5) + (-0.4) * Vec2(-(x2 - Vec2(-0.2, 0.3)).y(), (x2 - Vec2(-0.2, 0.3)).x());
  CHECK((transformed_rigid_velocity(s1, s2, x1) - Q.transpose() * u2).norm() < 1e-14);
  TractionNormal tn = transform_traction_normal(Vec2(1, 0), Vec2(0, 2), Q);
  CHECK(tn.n1.norm() == doctest::Approx(1.0));
  CHECK(tn.n1.dot(tn.traction1) == doctest::Approx(Vec2(1, 0).dot(Vec2(0, 2))));
}
