#include "slipfsi/grid.hpp"

#include <cmath>
#include <numbers>

#include "slipfsi/errors.hpp"

namespace slipfsi {

AnnulusGrid::AnnulusGrid(int n_r, int n_theta, double r_inner, double r_outer)
    : n_r_(n_r), n_theta_(n_theta), r_inner_(r_inner), r_outer_(r_outer) {
  if (n_r < 8 || n_theta < 8) throw ConfigError("grid needs n_r >= 8 and n_theta >= 8");
  if (!(r_inner > 0.0) || !(r_inner < r_outer))
    throw ConfigError("annulus needs 0 < r_inner < r_outer");
  dr_ = (r_outer - r_inner) / n_r;
  dtheta_ = 2.0 * std::numbers::pi / n_theta;
  first_den_ = 2.0 * std::sin(dtheta_);
  second_den_ = 2.0 * (1.0 - std::cos(dtheta_));
  cos_.resize(n_theta);
  sin_.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    cos_[j] = std::cos(j * dtheta_);
    sin_[j] = std::sin(j * dtheta_);
  }
}

double AnnulusGrid::weight(int i, int j) const {
  (void)j;
  const double w = r(i) * dr_ * dtheta_;
  return (i == 0 || i == n_r_) ? 0.5 * w : w;
}

double AnnulusGrid::effective_spacing() const {
  const double arc = r_inner_ * dtheta_;
  return 1.0 / std::sqrt(1.0 / (dr_ * dr_) + 1.0 / (arc * arc));
}

bool AnnulusGrid::same_shape(const AnnulusGrid& o) const {
  return n_r_ == o.n_r_ && n_theta_ == o.n_theta_ && r_inner_ == o.r_inner_ &&
         r_outer_ == o.r_outer_;
}

GridField::GridField(const AnnulusGrid& grid, int ncomp, double t)
    : ncomp_(ncomp), n_r_(grid.n_r()), n_theta_(grid.n_theta()), t_(t) {
  data_.assign(static_cast<std::size_t>(ncomp) * (n_r_ + 3) * n_theta_, 0.0);
}

void GridField::fill_ghosts_extrapolate() {
  for (int c = 0; c < ncomp_; ++c) {
    for (int j = 0; j < n_theta_; ++j) {
      auto& self = *this;
      self(c, -1, j) = 4.0 * self(c, 0, j) - 6.0 * self(c, 1, j) + 4.0 * self(c, 2, j) -
                       self(c, 3, j);
      const int n = n_r_;
      self(c, n + 1, j) = 4.0 * self(c, n, j) - 6.0 * self(c, n - 1, j) +
                          4.0 * self(c, n - 2, j) - self(c, n - 3, j);
    }
  }
  ghosts_filled_ = true;
}

bool GridField::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void GridField::set_zero() {
  std::fill(data_.begin(), data_.end(), 0.0);
  ghosts_filled_ = true;
}

namespace {

struct PolarDerivs {
  double fr, ft, frr, ftt, frt;
};

inline PolarDerivs polar_derivs(const AnnulusGrid& g, const GridField& f, int c, int i, int j) {
  const double fc = f(c, i, j);
  const double fe = f(c, i + 1, j), fw = f(c, i - 1, j);
  const double fn = f(c, i, j + 1), fs = f(c, i, j - 1);
  const double dr = g.dr();
  PolarDerivs d;
  d.fr = (fe - fw) / (2.0 * dr);
  d.ft = (fn - fs) / g.theta_first_denominator();
  d.frr = (fe - 2.0 * fc + fw) / (dr * dr);
  d.ftt = (fn - 2.0 * fc + fs) / g.theta_second_denominator();
  d.frt = (f(c, i + 1, j + 1) - f(c, i + 1, j - 1) - f(c, i - 1, j + 1) + f(c, i - 1, j - 1)) /
          (2.0 * dr * g.theta_first_denominator());
  return d;
}

}  // namespace

Vec2 gradient_at(const AnnulusGrid& g, const GridField& f, int c, int i, int j) {
  const double r = g.r(i), cs = g.cos_theta(j), sn = g.sin_theta(j);
  const double fr = (f(c, i + 1, j) - f(c, i - 1, j)) / (2.0 * g.dr());
  const double ft = (f(c, i, j + 1) - f(c, i, j - 1)) / g.theta_first_denominator();
  return Vec2(cs * fr - sn * ft / r, sn * fr + cs * ft / r);
}

Hess2 hessian_at(const AnnulusGrid& g, const GridField& f, int c, int i, int j) {
  const PolarDerivs d = polar_derivs(g, f, c, i, j);
  const double r = g.r(i), cs = g.cos_theta(j), sn = g.sin_theta(j);
  const double A = d.fr / r + d.ftt / (r * r);
  const double B = d.frt / r - d.ft / (r * r);
  Hess2 h;
  h.xx = cs * cs * d.frr + sn * sn * A - 2.0 * sn * cs * B;
  h.yy = sn * sn * d.frr + cs * cs * A + 2.0 * sn * cs * B;
  h.xy = sn * cs * (d.frr - A) + (cs * cs - sn * sn) * B;
  return h;
}

double laplacian_at(const AnnulusGrid& g, const GridField& f, int c, int i, int j) {
  const double r = g.r(i), dr = g.dr();
  const double fc = f(c, i, j);
  const double fe = f(c, i + 1, j), fw = f(c, i - 1, j);
  const double frr = (fe - 2.0 * fc + fw) / (dr * dr);
  const double fr = (fe - fw) / (2.0 * dr);
  const double ftt = (f(c, i, j + 1) - 2.0 * fc + f(c, i, j - 1)) / g.theta_second_denominator();
  return frr + fr / r + ftt / (r * r);
}

double divergence_at(const AnnulusGrid& g, const GridField& u, int i, int j) {
  return gradient_at(g, u, 0, i, j).x() + gradient_at(g, u, 1, i, j).y();
}

GridField discrete_operator(const GridField& field, OperatorKind kind, const AnnulusGrid& grid) {
  if (!field.matches(grid)) throw ShapeMismatch("field does not match grid");
  if (!field.ghosts_filled()) throw ContractViolation("ghost layers must be filled first");
  const int nc = field.ncomp();
  GridField out;
  switch (kind) {
    case OperatorKind::gradient:
      out = GridField(grid, 2 * nc, field.t());
      break;
    case OperatorKind::divergence:
      if (nc != 2) throw ShapeMismatch("divergence needs a 2-component field");
      out = GridField(grid, 1, field.t());
      break;
    case OperatorKind::laplacian:
      out = GridField(grid, nc, field.t());
      break;
  }
  for (int i = 0; i <= grid.n_r(); ++i) {
    for (int j = 0; j < grid.n_theta(); ++j) {
      switch (kind) {
        case OperatorKind::gradient:
          for (int c = 0; c < nc; ++c) {
            const Vec2 gr = gradient_at(grid, field, c, i, j);
            out(2 * c, i, j) = gr.x();
            out(2 * c + 1, i, j) = gr.y();
          }
          break;
        case OperatorKind::divergence:
          out(0, i, j) = divergence_at(grid, field, i, j);
          break;
        case OperatorKind::laplacian:
          for (int c = 0; c < nc; ++c) out(c, i, j) = laplacian_at(grid, field, c, i, j);
          break;
      }
    }
  }
  return out;
}

std::vector<BoundaryPoint> boundary_quadrature(const AnnulusGrid& grid, BoundarySide side) {
  const int i = side == BoundarySide::inner ? 0 : grid.n_r();
  const double sign = side == BoundarySide::inner ? -1.0 : 1.0;
  std::vector<BoundaryPoint> pts;
  pts.reserve(grid.n_theta());
  for (int j = 0; j < grid.n_theta(); ++j)
    pts.push_back({grid.node(i, j), sign * grid.radial_unit(j), grid.arc_weight(i), j});
  return pts;
}

double interpolate_unchecked(const AnnulusGrid& grid, const GridField& f, int c, const Vec2& x) {
  const double r = x.norm();
  double th = std::atan2(x.y(), x.x());
  if (th < 0.0) th += 2.0 * std::numbers::pi;
  const double s = (r - grid.r_inner()) / grid.dr();
  int i0 = static_cast<int>(std::floor(s));
  if (i0 < 0) i0 = 0;
  if (i0 > grid.n_r() - 1) i0 = grid.n_r() - 1;
  const double fr = s - i0;
  const double u = th / grid.dtheta();
  int j0 = static_cast<int>(std::floor(u));
  const double ft = u - j0;
  j0 = grid.wrap(j0);
  const double f00 = f(c, i0, j0), f10 = f(c, i0 + 1, j0);
  const double f01 = f(c, i0, j0 + 1), f11 = f(c, i0 + 1, j0 + 1);
  return (1 - fr) * (1 - ft) * f00 + fr * (1 - ft) * f10 + (1 - fr) * ft * f01 + fr * ft * f11;
}

double interpolate(const AnnulusGrid& grid, const GridField& f, int c, const Vec2& x) {
  const double r = x.norm();
  const double tol = 0.5 * grid.dr();
  if (r < grid.r_inner() - tol || r > grid.r_outer() + tol)
    throw ExtrapolationError("point lies outside the annulus");
  return interpolate_unchecked(grid, f, c, x);
}

Vec2 interpolate_vec(const AnnulusGrid& grid, const GridField& f, const Vec2& x) {
  return Vec2(interpolate(grid, f, 0, x), interpolate(grid, f, 1, x));
}

double integrate(const AnnulusGrid& grid, const GridField& f, int c) {
  double s = 0.0;
  for (int i = 0; i <= grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) s += grid.weight(i, j) * f(c, i, j);
  return s;
}

}  // namespace slipfsi
