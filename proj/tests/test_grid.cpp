#include <cmath>

#include "doctest.h"
#include "slipfsi/errors.hpp"
#include "slipfsi/grid.hpp"

using namespace slipfsi;

namespace {

GridField sample(const AnnulusGrid& g, int ncomp, auto fn) {
  GridField f(g, ncomp);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 x = g.node(i, j);
      for (int c = 0; c < ncomp; ++c) f(c, i, j) = fn(c, x);
    }
  f.fill_ghosts_extrapolate();
  return f;
}

}  // namespace

TEST_CASE("grid construction validates input") {
  CHECK_THROWS_AS(AnnulusGrid(4, 64, 0.5, 2.0), ConfigError);
  CHECK_THROWS_AS(AnnulusGrid(16, 64, 2.0, 0.5), ConfigError);
  AnnulusGrid g(16, 32, 0.5, 2.0);
  CHECK(g.dr() == doctest::Approx(1.5 / 16));
  CHECK(g.wrap(-1) == 31);
  CHECK(g.wrap(32) == 0);
}

TEST_CASE("trapezoid weights integrate the annulus area exactly") {
  AnnulusGrid g(16, 32, 0.5, 2.0);
  double area = 0.0;
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) area += g.weight(i, j);
  CHECK(area == doctest::Approx(M_PI * (4.0 - 0.25)).epsilon(1e-12));
}

TEST_CASE("stencils are exact on affine fields") {
  AnnulusGrid g(16, 32, 0.5, 2.0);
  GridField f = sample(g, 1, [](int, const Vec2& x) { return 3.0 * x.x() - 2.0 * x.y() + 1.0; });
  for (int i : {0, 5, 16})
    for (int j : {0, 7, 31}) {
      const Vec2 gr = gradient_at(g, f, 0, i, j);
      CHECK(gr.x() == doctest::Approx(3.0).epsilon(1e-10));
      CHECK(gr.y() == doctest::Approx(-2.0).epsilon(1e-10));
      CHECK(std::abs(laplacian_at(g, f, 0, i, j)) < 1e-8);
    }
}

TEST_CASE("laplacian converges at second order") {
  auto err = [](int n) {
    AnnulusGrid g(n, 2 * n, 0.5, 2.0);
    GridField f = sample(g, 1, [](int, const Vec2& x) { return std::sin(x.x()) * std::cos(0.7 * x.y()); });
    double e = 0.0;
    for (int i = 1; i < g.n_r(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        const Vec2 x = g.node(i, j);
        const double exact = -(1.0 + 0.49) * std::sin(x.x()) * std::cos(0.7 * x.y());
        e = std::max(e, std::abs(laplacian_at(g, f, 0, i, j) - exact));
      }
    return e;
  };
  const double e1 = err(16), e2 = err(32);
  CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("hessian trace equals laplacian") {
  AnnulusGrid g(16, 32, 0.5, 2.0);
  GridField f = sample(g, 1, [](int, const Vec2& x) { return std::exp(0.3 * x.x()) * x.y() * x.y(); });
  for (int i = 0; i <= g.n_r(); i += 3)
    for (int j = 0; j < g.n_theta(); j += 5)
      CHECK(hessian_at(g, f, 0, i, j).trace() == doctest::Approx(laplacian_at(g, f, 0, i, j)).epsilon(1e-12));
}

TEST_CASE("discrete_operator contracts") {
  AnnulusGrid g(16, 32, 0.5, 2.0), h(8, 32, 0.5, 2.0);
  GridField f(g, 1);
  CHECK_THROWS_AS(discrete_operator(f, OperatorKind::gradient, g), ContractViolation);
  f.fill_ghosts_extrapolate();
  CHECK_THROWS_AS(discrete_operator(f, OperatorKind::gradient, h), ShapeMismatch);
  GridField u = sample(g, 2, [](int c, const Vec2& x) { return c == 0 ? x.x() : -x.y(); });
  GridField d = discrete_operator(u, OperatorKind::divergence, g);
  CHECK(std::abs(d(0, 3, 4)) < 1e-10);
  GridField gu = discrete_operator(u, OperatorKind::gradient, g);
  CHECK(gu.ncomp() == 4);
  CHECK(gu(0, 3, 4) == doctest::Approx(1.0));
  CHECK(gu(3, 3, 4) == doctest::Approx(-1.0));
}

TEST_CASE("boundary quadrature and interpolation") {
  AnnulusGrid g(16, 64, 0.5, 2.0);
  double len = 0.0;
  for (const auto& p : boundary_quadrature(g, BoundarySide::inner)) {
    len += p.weight;
    CHECK(p.normal.dot(p.x) < 0.0);
  }
  CHECK(len == doctest::Approx(M_PI).epsilon(1e-12));
  GridField f = sample(g, 1, [](int, const Vec2& x) { return x.x() + 2.0 * x.y(); });
  const double v = interpolate(g, f, 0, Vec2(0.8, 0.3));
  CHECK(v == doctest::Approx(1.4).epsilon(1e-2));
  CHECK_THROWS_AS(interpolate(g, f, 0, Vec2(3.0, 0.0)), ExtrapolationError);
}
