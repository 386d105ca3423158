#include "slipfsi/transform.hpp"

#include <algorithm>
#include <cmath>

#include "slipfsi/errors.hpp"
#include "slipfsi/parallel.hpp"

namespace slipfsi {

namespace {

Vec2 to_vec2(const VecX& v) { return Vec2(v(0), v(1)); }
Mat2 to_mat2(const MatX& m) { return m.topLeftCorner<2, 2>(); }
Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

void require_ghosts(const GridField& f, const char* what) {
  if (!f.ghosts_filled()) throw ContractViolation(std::string(what) + ": ghost layers not filled");
}

void require_shape(const GridField& f, const TransformAtlas& atlas, int ncomp, const char* what) {
  if (!f.matches(atlas.grid()) || f.ncomp() != ncomp)
    throw ShapeMismatch(std::string(what) + ": field shape does not match the atlas");
  require_ghosts(f, what);
}

template <typename Fn>
void for_each_node(const AnnulusGrid& g, Fn&& fn) {
  parallel_for(0, g.n_r() + 1, [&](int i) {
    for (int j = 0; j < g.n_theta(); ++j) fn(i, j);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Coordinates

MappedCoordinates::MappedCoordinates(std::shared_ptr<const TransformAtlas> base)
    : base_(std::move(base)) {}

const AnnulusGrid& MappedCoordinates::grid() const { return base_->grid(); }

Vec2 MappedCoordinates::grad(const GridField& f, int c, int i, int j) const {
  const Vec2 gy = base_->coords->grad(f, c, i, j);
  return base_->inverse_jacobian(i, j).transpose() * gy;
}

Hess2 MappedCoordinates::hess(const GridField& f, int c, int i, int j) const {
  const Vec2 gy = base_->coords->grad(f, c, i, j);
  const Hess2 hy = base_->coords->hess(f, c, i, j);
  Mat2 H;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      double v = hy(a, b);
      for (int m = 0; m < 2; ++m) v -= base_->gamma(m, a, b, i, j) * gy(m);
      H(a, b) = v;
    }
  }
  const Mat2 Y = base_->inverse_jacobian(i, j);
  const Mat2 Hx = Y.transpose() * H * Y;
  Hess2 out;
  out.xx = Hx(0, 0);
  out.xy = 0.5 * (Hx(0, 1) + Hx(1, 0));
  out.yy = Hx(1, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Atlas

Mat2 TransformAtlas::jacobian(int i, int j) const {
  Mat2 J;
  J << X_jac(0, i, j), X_jac(1, i, j), X_jac(2, i, j), X_jac(3, i, j);
  return J;
}

Mat2 TransformAtlas::inverse_jacobian(int i, int j) const {
  Mat2 Y;
  Y << Y_jac(0, i, j), Y_jac(1, i, j), Y_jac(2, i, j), Y_jac(3, i, j);
  return Y;
}

Mat2 TransformAtlas::metric_up(int i, int j) const {
  Mat2 g;
  g << g_up(0, i, j), g_up(1, i, j), g_up(1, i, j), g_up(2, i, j);
  return g;
}

Mat2 TransformAtlas::metric_lo(int i, int j) const {
  Mat2 g;
  g << g_lo(0, i, j), g_lo(1, i, j), g_lo(1, i, j), g_lo(2, i, j);
  return g;
}

Vec2 TransformAtlas::map(const Vec2& y) const {
  const AnnulusGrid& g = grid();
  const Vec2 d(interpolate_unchecked(g, X_residual, 0, y), interpolate_unchecked(g, X_residual, 1, y));
  return body_q + body_Q * y + d;
}

Mat2 TransformAtlas::jacobian_at(const Vec2& y) const {
  const AnnulusGrid& g = grid();
  Mat2 J;
  J << interpolate_unchecked(g, X_jac, 0, y), interpolate_unchecked(g, X_jac, 1, y),
      interpolate_unchecked(g, X_jac, 2, y), interpolate_unchecked(g, X_jac, 3, y);
  return J;
}

void finalize_geometry(TransformAtlas& atlas) {
  const Coordinates& C = *atlas.coords;
  const AnnulusGrid& g = C.grid();
  if (!atlas.X.matches(g) || atlas.X.ncomp() != 2) throw ShapeMismatch("atlas map samples");
  atlas.X.fill_ghosts_extrapolate();
  atlas.X_jac = GridField(g, 4, atlas.t);
  atlas.Y_jac = GridField(g, 4, atlas.t);
  atlas.X_hess = GridField(g, 6, atlas.t);
  atlas.g_lo = GridField(g, 3, atlas.t);
  atlas.g_up = GridField(g, 3, atlas.t);
  atlas.christoffel = GridField(g, 6, atlas.t);
  atlas.X_residual = GridField(g, 2, atlas.t);

  for_each_node(g, [&](int i, int j) {
    Mat2 J;
    for (int k = 0; k < 2; ++k) {
      const Vec2 gk = C.grad(atlas.X, k, i, j);
      J(k, 0) = gk.x();
      J(k, 1) = gk.y();
      const Hess2 hk = C.hess(atlas.X, k, i, j);
      atlas.X_hess(3 * k + 0, i, j) = hk.xx;
      atlas.X_hess(3 * k + 1, i, j) = hk.xy;
      atlas.X_hess(3 * k + 2, i, j) = hk.yy;
    }
    const Mat2 Y = J.inverse();
    const Mat2 glo = J.transpose() * J;
    const Mat2 gup = Y * Y.transpose();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        atlas.X_jac(2 * a + b, i, j) = J(a, b);
        atlas.Y_jac(2 * a + b, i, j) = Y(a, b);
      }
    atlas.g_lo(0, i, j) = glo(0, 0);
    atlas.g_lo(1, i, j) = 0.5 * (glo(0, 1) + glo(1, 0));
    atlas.g_lo(2, i, j) = glo(1, 1);
    atlas.g_up(0, i, j) = gup(0, 0);
    atlas.g_up(1, i, j) = 0.5 * (gup(0, 1) + gup(1, 0));
    atlas.g_up(2, i, j) = gup(1, 1);
    for (int k = 0; k < 2; ++k)
      for (int s = 0; s < 3; ++s)
        atlas.christoffel(3 * k + s, i, j) =
            Y(k, 0) * atlas.X_hess(s, i, j) + Y(k, 1) * atlas.X_hess(3 + s, i, j);
    const Vec2 y = g.node(i, j);
    const Vec2 rigid = atlas.body_q + atlas.body_Q * y;
    atlas.X_residual(0, i, j) = atlas.X(0, i, j) - rigid.x();
    atlas.X_residual(1, i, j) = atlas.X(1, i, j) - rigid.y();
  });
  atlas.g_up.fill_ghosts_extrapolate();
  atlas.christoffel.fill_ghosts_extrapolate();
  atlas.X_jac.fill_ghosts_extrapolate();
  atlas.X_residual.fill_ghosts_extrapolate();

  atlas.g_gamma = GridField(g, 8, atlas.t);
  for_each_node(g, [&](int i, int j) {
    for (int l = 0; l < 2; ++l)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double v = 0.0;
          for (int k = 0; k < 2; ++k) v += atlas.gup(l, k, i, j) * atlas.gamma(a, b, k, i, j);
          atlas.g_gamma(4 * l + 2 * a + b, i, j) = v;
        }
  });
  atlas.g_gamma.fill_ghosts_extrapolate();

  atlas.div_gup = GridField(g, 2, atlas.t);
  atlas.zeroth = GridField(g, 4, atlas.t);
  for_each_node(g, [&](int i, int j) {
    for (int k = 0; k < 2; ++k) {
      double v = 0.0;
      for (int jj = 0; jj < 2; ++jj) v += C.grad(atlas.g_up, jj + k, i, j)(jj);
      atlas.div_gup(k, i, j) = v;
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = 0.0;
        for (int k = 0; k < 2; ++k) v += C.grad(atlas.g_gamma, 4 * k + 2 * a + b, i, j)(k);
        for (int k = 0; k < 2; ++k)
          for (int m = 0; m < 2; ++m)
            v += atlas.gamma(a, k, m, i, j) * atlas.g_gamma(4 * k + 2 * m + b, i, j);
        atlas.zeroth(2 * a + b, i, j) = v;
      }
  });
  atlas.div_gup.mark_ghosts_filled();
  atlas.zeroth.mark_ghosts_filled();
  atlas.has_time_derivatives = false;
}

void set_map_velocity(TransformAtlas& atlas, const GridField& Xdot) {
  const Coordinates& C = *atlas.coords;
  const AnnulusGrid& g = C.grid();
  if (!Xdot.matches(g) || Xdot.ncomp() != 2) throw ShapeMismatch("map velocity samples");
  atlas.Xdot = Xdot;
  atlas.Xdot.set_time(atlas.t);
  atlas.Xdot.fill_ghosts_extrapolate();
  atlas.Xdot_jac = GridField(g, 4, atlas.t);
  atlas.Ydot = GridField(g, 2, atlas.t);
  for_each_node(g, [&](int i, int j) {
    for (int k = 0; k < 2; ++k) {
      const Vec2 gk = C.grad(atlas.Xdot, k, i, j);
      atlas.Xdot_jac(2 * k + 0, i, j) = gk.x();
      atlas.Xdot_jac(2 * k + 1, i, j) = gk.y();
    }
    const Vec2 yd = -atlas.inverse_jacobian(i, j) * atlas.Xdot.vec(i, j);
    atlas.Ydot.set_vec(i, j, yd);
  });
  atlas.Xdot_jac.mark_ghosts_filled();
  atlas.Ydot.mark_ghosts_filled();
  atlas.has_time_derivatives = true;
}

TransformAtlas flat_atlas(const AnnulusGrid& grid) {
  return rigid_atlas(grid, Vec2::Zero(), Mat2::Identity());
}

TransformAtlas rigid_atlas(const AnnulusGrid& grid, const Vec2& q, const Mat2& Q, const Vec2& a,
                           double omega, double t) {
  TransformAtlas atlas;
  atlas.t = t;
  atlas.coords = std::make_shared<ReferenceCoordinates>(grid);
  atlas.body_q = q;
  atlas.body_Q = Q;
  atlas.X = GridField(grid, 2, t);
  GridField Xdot(grid, 2, t);
  for (int i = -1; i <= grid.n_r() + 1; ++i)
    for (int j = 0; j < grid.n_theta(); ++j) {
      const Vec2 x = q + Q * grid.node(i, j);
      atlas.X.set_vec(i, j, x);
      Xdot.set_vec(i, j, a + omega * perp(x - q));
    }
  finalize_geometry(atlas);
  set_map_velocity(atlas, Xdot);
  return atlas;
}

// ---------------------------------------------------------------------------
// Extension field and flow map

ExtensionField::ExtensionField(const RigidState& state, Geometry geometry, double delta0,
                               bool track_rotation)
    : state_(state), geometry_(geometry), delta0_(delta0), track_rotation_(track_rotation) {
  if (state.dim() != 2) throw UnsupportedDimension("extension field is planar");
}

Vec2 ExtensionField::center(double t) const {
  return to_vec2(state_.q) + (t - state_.t) * to_vec2(state_.a);
}

double ExtensionField::clearance(double t) const {
  return geometry_.r_outer - center(t).norm() - geometry_.r_inner;
}

namespace {

// Quintic smoothstep and its derivative on [0, 1].
double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smoothstep_prime(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

}  // namespace

double ExtensionField::cutoff(double t, const Vec2& x) const {
  const double d = (x - center(t)).norm() - geometry_.r_inner;
  const double d0 = 0.25 * delta0_;
  const double d1 = clearance(t) - 0.25 * delta0_;
  const double s = std::clamp((d - d0) / (d1 - d0), 0.0, 1.0);
  return 1.0 - smoothstep(s);
}

Vec2 ExtensionField::operator()(double t, const Vec2& x) const {
  const Vec2 c = center(t);
  const Vec2 dv = x - c;
  const double rho = dv.norm();
  const double d = rho - geometry_.r_inner;
  const double d0 = 0.25 * delta0_;
  const double d1 = clearance(t) - 0.25 * delta0_;
  const double width = d1 - d0;
  const double s = (d - d0) / width;
  const Vec2 a = to_vec2(state_.a);
  const double w = track_rotation_ ? state_.omega(0) : 0.0;
  const Vec2 u_rigid = a + w * perp(dv);
  if (s <= 0.0) return u_rigid;
  if (s >= 1.0) return Vec2::Zero();
  const double chi = 1.0 - smoothstep(s);
  const double chi_prime = -smoothstep_prime(s) / width;
  const double psi = a.x() * dv.y() - a.y() * dv.x() - 0.5 * w * rho * rho;
  const Vec2 grad_chi = chi_prime * dv / rho;
  return chi * u_rigid + psi * Vec2(grad_chi.y(), -grad_chi.x());
}

ExtensionField build_extension(const RigidState& state, Geometry geometry, double delta0,
                               bool track_rotation) {
  ExtensionField f(state, geometry, delta0, track_rotation);
  if (!(f.clearance(state.t) > delta0))
    throw ProximityError("body-wall distance " + std::to_string(f.clearance(state.t)) +
                         " is below delta0 = " + std::to_string(delta0));
  return f;
}

namespace {

void check_inside(const TransformAtlas& atlas, double r_outer) {
  const AnnulusGrid& g = atlas.grid();
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 x = atlas.X.vec(i, j);
      if (!std::isfinite(x.x()) || !std::isfinite(x.y()) || x.norm() > r_outer * (1.0 + 1e-9))
        throw MapBlowup("flow map node left the container");
    }
}

GridField sample_field(const AnnulusGrid& g, const GridField& X, const ExtensionField& field,
                       double t) {
  GridField out(g, 2, t);
  parallel_for(0, g.n_r() + 1, [&](int i) {
    for (int j = 0; j < g.n_theta(); ++j) out.set_vec(i, j, field(t, X.vec(i, j)));
  });
  return out;
}

}  // namespace

void assign_map_velocity(TransformAtlas& atlas, const ExtensionField& field) {
  set_map_velocity(atlas, sample_field(atlas.grid(), atlas.X, field, atlas.t));
}

TransformAtlas predict_flow_map(const TransformAtlas& atlas, const ExtensionField& field,
                                double dt) {
  if (!(dt > 0.0)) throw InvalidInput("flow map step needs dt > 0");
  const AnnulusGrid& g = atlas.grid();
  const GridField k1 = sample_field(g, atlas.X, field, atlas.t);
  TransformAtlas next;
  next.t = atlas.t + dt;
  next.id = atlas.id + 1;
  next.coords = atlas.coords;
  next.X = GridField(g, 2, next.t);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      next.X.set_vec(i, j, atlas.X.vec(i, j) + dt * k1.vec(i, j));
  const RigidState& s = field.body_state();
  next.body_q = to_vec2(s.q) + dt * to_vec2(s.a);
  next.body_Q = field.track_rotation() ? Mat2(rotation2(dt * s.omega(0)) * atlas.body_Q) : atlas.body_Q;
  check_inside(next, atlas.grid().r_outer());
  finalize_geometry(next);
  return next;
}

TransformAtlas advance_flow_map(const TransformAtlas& atlas, const ExtensionField& now,
                                const ExtensionField& next_field, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("flow map step needs dt > 0");
  const AnnulusGrid& g = atlas.grid();
  const double t1 = atlas.t + dt;
  const GridField k1 = sample_field(g, atlas.X, now, atlas.t);
  GridField X1(g, 2, t1);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) X1.set_vec(i, j, atlas.X.vec(i, j) + dt * k1.vec(i, j));
  const GridField k2 = sample_field(g, X1, next_field, t1);
  TransformAtlas out;
  out.t = t1;
  out.id = atlas.id + 1;
  out.coords = atlas.coords;
  out.X = GridField(g, 2, t1);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      out.X.set_vec(i, j, atlas.X.vec(i, j) + 0.5 * dt * (k1.vec(i, j) + k2.vec(i, j)));
  // Rigid-zone pose: rotation accumulates the average rate of the two fields.
  const double w_avg = 0.5 * (now.body_state().omega(0) + next_field.body_state().omega(0));
  out.body_Q = now.track_rotation() ? Mat2(rotation2(dt * w_avg) * atlas.body_Q) : atlas.body_Q;
  const RigidState& s0 = now.body_state();
  out.body_q = to_vec2(s0.q) + (atlas.t - s0.t) * to_vec2(s0.a) +
               0.5 * dt * (to_vec2(s0.a) + to_vec2(next_field.body_state().a));
  check_inside(out, g.r_outer());
  finalize_geometry(out);
  assign_map_velocity(out, next_field);
  return out;
}

TransformAtlas advance_flow_map(const TransformAtlas& atlas, const ExtensionField& field,
                                double dt) {
  const RigidState& s = field.body_state();
  const RigidState moved = step_rigid(s, s.a, s.omega, dt);
  const ExtensionField next(moved, field.geometry(), field.delta0(), field.track_rotation());
  return advance_flow_map(atlas, field, next, dt);
}

Vec2 invert_map(const TransformAtlas& atlas, const Vec2& x, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("inversion tolerance must be positive");
  Vec2 y = atlas.body_Q.transpose() * (x - atlas.body_q);
  for (int it = 0; it < 50; ++it) {
    const Vec2 r = atlas.map(y) - x;
    if (r.norm() <= tol) return y;
    const Mat2 J = atlas.jacobian_at(y);
    y -= J.inverse() * r;
    if (!std::isfinite(y.x()) || !std::isfinite(y.y())) break;
  }
  if ((atlas.map(y) - x).norm() <= tol) return y;
  throw InversionFailure("Newton inversion of the flow map did not converge");
}

// ---------------------------------------------------------------------------
// Transformed operators

GridField op_L(const GridField& u, const TransformAtlas& atlas) {
  require_shape(u, atlas, 2, "op_L");
  const Coordinates& C = *atlas.coords;
  const AnnulusGrid& g = C.grid();
  GridField out(g, 2, u.t());
  for_each_node(g, [&](int i, int j) {
    const Vec2 grad[2] = {C.grad(u, 0, i, j), C.grad(u, 1, i, j)};
    for (int a = 0; a < 2; ++a) {
      const Hess2 H = C.hess(u, a, i, j);
      double v = atlas.gup(0, 0, i, j) * H.xx + 2.0 * atlas.gup(0, 1, i, j) * H.xy +
                 atlas.gup(1, 1, i, j) * H.yy;
      v += atlas.div_gup(0, i, j) * grad[a](0) + atlas.div_gup(1, i, j) * grad[a](1);
      for (int b = 0; b < 2; ++b) {
        for (int l = 0; l < 2; ++l) v += 2.0 * atlas.g_gamma(4 * l + 2 * a + b, i, j) * grad[b](l);
        v += atlas.zeroth(2 * a + b, i, j) * u(b, i, j);
      }
      out(a, i, j) = v;
    }
  });
  return out;
}

ConvectionSplit op_conv_split(const GridField& u, const TransformAtlas& atlas) {
  require_shape(u, atlas, 2, "op_conv");
  const Coordinates& C = *atlas.coords;
  const AnnulusGrid& g = C.grid();
  ConvectionSplit s{GridField(g, 2, u.t()), GridField(g, 2, u.t())};
  for_each_node(g, [&](int i, int j) {
    const Vec2 uv = u.vec(i, j);
    for (int a = 0; a < 2; ++a) {
      s.standard(a, i, j) = uv.dot(C.grad(u, a, i, j));
      double e = 0.0;
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k) e += atlas.gamma(a, b, k, i, j) * uv(b) * uv(k);
      s.extra(a, i, j) = e;
    }
  });
  return s;
}

GridField op_conv(const GridField& u, const TransformAtlas& atlas) {
  ConvectionSplit s = op_conv_split(u, atlas);
  for (std::size_t n = 0; n < s.standard.raw().size(); ++n) s.standard.raw()[n] += s.extra.raw()[n];
  return s.standard;
}

GridField op_M(const GridField& u, const TransformAtlas& atlas) {
  require_shape(u, atlas, 2, "op_M");
  if (!atlas.has_time_derivatives) throw InvalidInput("op_M: atlas has no time-derivative samples");
  const Coordinates& C = *atlas.coords;
  const AnnulusGrid& g = C.grid();
  GridField out(g, 2, u.t());
  for_each_node(g, [&](int i, int j) {
    const Vec2 yd = atlas.Ydot.vec(i, j);
    const Mat2 Y = atlas.inverse_jacobian(i, j);
    for (int a = 0; a < 2; ++a) {
      double v = yd.dot(C.grad(u, a, i, j));
      for (int b = 0; b < 2; ++b) {
        double coef = 0.0;
        for (int k = 0; k < 2; ++k)
          coef += atlas.gamma(a, b, k, i, j) * yd(k) + Y(a, k) * atlas.Xdot_jac(2 * k + b, i, j);
        v += coef * u(b, i, j);
      }
      out(a, i, j) = v;
    }
  });
  return out;
}

GridField op_G(const GridField& p, const TransformAtlas& atlas) {
  require_shape(p, atlas, 1, "op_G");
  const Coordinates& C = *atlas.coords;
  const AnnulusGrid& g = C.grid();
  GridField out(g, 2, p.t());
  for_each_node(g, [&](int i, int j) {
    const Vec2 gp = C.grad(p, 0, i, j);
    out.set_vec(i, j, atlas.metric_up(i, j) * gp);
  });
  return out;
}

GridField coord_laplacian(const GridField& u, const TransformAtlas& atlas) {
  if (!u.matches(atlas.grid())) throw ShapeMismatch("coord_laplacian");
  require_ghosts(u, "coord_laplacian");
  const Coordinates& C = *atlas.coords;
  GridField out(C.grid(), u.ncomp(), u.t());
  for_each_node(C.grid(), [&](int i, int j) {
    for (int c = 0; c < u.ncomp(); ++c) out(c, i, j) = C.hess(u, c, i, j).trace();
  });
  return out;
}

GridField coord_gradient(const GridField& p, const TransformAtlas& atlas) {
  if (!p.matches(atlas.grid()) || p.ncomp() != 1) throw ShapeMismatch("coord_gradient");
  require_ghosts(p, "coord_gradient");
  const Coordinates& C = *atlas.coords;
  GridField out(C.grid(), 2, p.t());
  for_each_node(C.grid(), [&](int i, int j) { out.set_vec(i, j, C.grad(p, 0, i, j)); });
  return out;
}

// ---------------------------------------------------------------------------
// Relative maps between two runs

Vec2 compose_relative_map(const RigidState& s1, const RigidState& s2, const Vec2& x1) {
  const Mat2 Q = to_mat2(s2.Q) * to_mat2(s1.Q).transpose();
  return to_vec2(s2.q) + Q * (x1 - to_vec2(s1.q));
}

Vec2 compose_relative_map_inverse(const RigidState& s1, const RigidState& s2, const Vec2& x2) {
  const Mat2 Q = to_mat2(s1.Q) * to_mat2(s2.Q).transpose();
  return to_vec2(s1.q) + Q * (x2 - to_vec2(s2.q));
}

Vec2 compose_relative_map(const TransformAtlas& atlas1, const TransformAtlas& atlas2,
                          const Vec2& x1, double tol) {
  return atlas2.map(invert_map(atlas1, x1, tol));
}

TransformAtlas relative_atlas(std::shared_ptr<const TransformAtlas> atlas1,
                              const TransformAtlas& atlas2) {
  if (!atlas1->has_time_derivatives || !atlas2.has_time_derivatives)
    throw InvalidInput("relative_atlas needs map velocities on both atlases");
  const AnnulusGrid& g = atlas1->grid();
  TransformAtlas rel;
  rel.t = atlas1->t;
  rel.id = atlas1->id;
  rel.coords = std::make_shared<MappedCoordinates>(atlas1);
  rel.X = atlas2.X;
  rel.body_Q = atlas2.body_Q * atlas1->body_Q.transpose();
  rel.body_q = atlas2.body_q - rel.body_Q * atlas1->body_q;
  finalize_geometry(rel);
  GridField Xdot(g, 2, rel.t);
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Mat2 J = atlas2.jacobian(i, j) * atlas1->inverse_jacobian(i, j);
      Xdot.set_vec(i, j, atlas2.Xdot.vec(i, j) - J * atlas1->Xdot.vec(i, j));
    }
  set_map_velocity(rel, Xdot);
  return rel;
}

TransformedStrong transform_strong_solution(const GridField& U2_ref, const GridField& P2_ref,
                                            const RigidState& state1, const RigidState& state2,
                                            const TransformAtlas& atlas1,
                                            const TransformAtlas& atlas2) {
  const AnnulusGrid& g = atlas1.grid();
  if (!U2_ref.matches(g) || !P2_ref.matches(g) || !atlas2.X.matches(g))
    throw ShapeMismatch("transform_strong_solution: grids differ");
  TransformedStrong out;
  out.U = GridField(g, 2, U2_ref.t());
  out.P = P2_ref;
  for (int i = -1; i <= g.n_r() + 1; ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const int ic = std::clamp(i, 0, g.n_r());
      out.U.set_vec(i, j, atlas1.jacobian(ic, j) * U2_ref.vec(i, j));
    }
  out.U.fill_ghosts_extrapolate();
  out.Q = to_mat2(state2.Q) * to_mat2(state1.Q).transpose();
  out.A2 = out.Q.transpose() * to_vec2(state2.a);
  out.Omega2 = state2.omega(0);
  return out;
}

Vec2 transform_velocity_at(const GridField& u2_phys, const TransformAtlas& atlas1,
                           const TransformAtlas& atlas2, const Vec2& x1, double tol) {
  const Vec2 y = invert_map(atlas1, x1, tol);
  const AnnulusGrid& g = atlas1.grid();
  const Vec2 u2 = interpolate_vec(g, u2_phys, y);
  const Mat2 J = atlas1.jacobian_at(y) * atlas2.jacobian_at(y).inverse();
  return J * u2;
}

Vec2 transformed_rigid_velocity(const RigidState& s1, const RigidState& s2, const Vec2& x1) {
  const Mat2 Q = to_mat2(s2.Q) * to_mat2(s1.Q).transpose();
  const Vec2 A2 = Q.transpose() * to_vec2(s2.a);
  return A2 + s2.omega(0) * perp(x1 - to_vec2(s1.q));
}

TractionNormal transform_traction_normal(const Vec2& n2, const Vec2& traction2, const Mat2& Q) {
  return {Q.transpose() * n2, Q.transpose() * traction2};
}

}  // namespace slipfsi
