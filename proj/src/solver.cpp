#include "slipfsi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "slipfsi/errors.hpp"

namespace slipfsi {

namespace {

Vec2 to_vec2(const VecX& v) { return Vec2(v(0), v(1)); }
VecX to_vecx(const Vec2& v) { return VecX(v); }
VecX scalar_vec(double w) {
  VecX v(1);
  v << w;
  return v;
}

// Radial and tangential components of node (i, j).
double radial(const AnnulusGrid& g, const GridField& U, int i, int j) {
  return U.vec(i, j).dot(g.radial_unit(j));
}
double tangential(const AnnulusGrid& g, const GridField& U, int i, int j) {
  return U.vec(i, j).dot(g.angular_unit(j));
}

}  // namespace

// ---------------------------------------------------------------------------
// Boundary conditions

void apply_slip_bc(GridField& U, const AnnulusGrid& g, const BoundaryValues& body, double mu,
                   double beta, SlipKind kind) {
  const double R = g.r_inner(), dr = g.dr();
  for (int j = 0; j < g.n_theta(); ++j) {
    U.set_vec(g.n_r(), j, Vec2::Zero());
    const Vec2 er = g.radial_unit(j), et = g.angular_unit(j);
    const double usr = body.A.dot(er);
    const double ust = body.A.dot(et) + body.omega * R;
    double ut;
    if (kind == SlipKind::no_slip) {
      ut = ust;
    } else {
      const double u1 = tangential(g, U, 1, j), u2 = tangential(g, U, 2, j);
      const double dtheta_ur = body.A.dot(et);
      ut = (beta * ust + mu * (4.0 * u1 - u2) / (2.0 * dr) + mu / R * dtheta_ur) /
           (beta + 1.5 * mu / dr + mu / R);
    }
    U.set_vec(0, j, usr * er + ut * et);
  }
  U.fill_ghosts_extrapolate();
}

SlipResiduals slip_residuals(const GridField& U, const AnnulusGrid& g, const BoundaryValues& body,
                             double mu, double beta, SlipKind kind) {
  const double R = g.r_inner(), dr = g.dr();
  SlipResiduals res;
  for (int j = 0; j < g.n_theta(); ++j) {
    const Vec2 er = g.radial_unit(j), et = g.angular_unit(j);
    const double ust = body.A.dot(et) + body.omega * R;
    res.normal = std::max(res.normal, std::abs(radial(g, U, 0, j) - body.A.dot(er)));
    const double u0 = tangential(g, U, 0, j), u1 = tangential(g, U, 1, j), u2 = tangential(g, U, 2, j);
    if (kind == SlipKind::no_slip) {
      res.tangential = std::max(res.tangential, std::abs(u0 - ust));
      continue;
    }
    const double two_d_rt = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * dr) - u0 / R + body.A.dot(et) / R;
    res.tangential = std::max(res.tangential, std::abs(-mu * two_d_rt - beta * (ust - u0)));
  }
  return res;
}

double max_divergence(const GridField& U, const AnnulusGrid& g) {
  double m = 0.0;
  for (int i = 1; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) m = std::max(m, std::abs(divergence_at(g, U, i, j)));
  return m;
}

// ---------------------------------------------------------------------------
// Projection

Projector::Projector(const AnnulusGrid& grid, bool body_free, double tol, int max_iter)
    : grid_(grid), body_free_(body_free), tol_(tol), max_iter_(max_iter) {
  const int nr = grid.n_r(), nt = grid.n_theta();
  n_rows_ = (nr - 1) * nt;
  n_unknowns_ = 2 * n_rows_ + (body_free ? 2 : 0);
  const int body = 2 * n_rows_;
  auto uidx = [nt](int i, int j, int c) { return 2 * ((i - 1) * nt + ((j % nt) + nt) % nt) + c; };
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n_rows_) * 12);
  row_weight_.resize(n_rows_);
  const double dr = grid.dr(), den = grid.theta_first_denominator();
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const int row = (i - 1) * nt + j;
      const double W = grid.weight(i, j), r = grid.r(i);
      const double cs = grid.cos_theta(j), sn = grid.sin_theta(j);
      row_weight_(row) = W;
      if (i + 1 < nr) {
        trip.emplace_back(row, uidx(i + 1, j, 0), W * cs / (2 * dr));
        trip.emplace_back(row, uidx(i + 1, j, 1), W * sn / (2 * dr));
      }
      if (i - 1 >= 1) {
        trip.emplace_back(row, uidx(i - 1, j, 0), -W * cs / (2 * dr));
        trip.emplace_back(row, uidx(i - 1, j, 1), -W * sn / (2 * dr));
      } else if (body_free) {
        trip.emplace_back(row, body + 0, -W * cs / (2 * dr));
        trip.emplace_back(row, body + 1, -W * sn / (2 * dr));
      }
      trip.emplace_back(row, uidx(i, j + 1, 0), -W * sn / (r * den));
      trip.emplace_back(row, uidx(i, j - 1, 0), W * sn / (r * den));
      trip.emplace_back(row, uidx(i, j + 1, 1), W * cs / (r * den));
      trip.emplace_back(row, uidx(i, j - 1, 1), -W * cs / (r * den));
    }
  C_.resize(n_rows_, n_unknowns_);
  C_.setFromTriplets(trip.begin(), trip.end());
  C_.makeCompressed();

  // Flat preconditioner: metric = identity.
  Eigen::VectorXd minv(n_unknowns_);
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      minv(uidx(i, j, 0)) = 1.0 / grid.weight(i, j);
      minv(uidx(i, j, 1)) = 1.0 / grid.weight(i, j);
    }
  if (body_free) minv.tail(2).setOnes();
  SpMat S = C_ * minv.asDiagonal() * C_.transpose();
  precond_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(S);
  if (precond_->info() != Eigen::Success) throw SolverError("projection preconditioner failed", 0.0);
}

Projector::SpMat Projector::build_schur(const TransformAtlas& atlas, SpMat* minv_ct) const {
  const int nr = grid_.n_r(), nt = grid_.n_theta();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n_unknowns_) * 2);
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const int k = 2 * ((i - 1) * nt + j);
      const double W = grid_.weight(i, j);
      const Mat2 gi = atlas.metric_up(i, j) / W;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) trip.emplace_back(k + a, k + b, gi(a, b));
    }
  if (body_free_) {
    trip.emplace_back(n_unknowns_ - 2, n_unknowns_ - 2, 1.0);
    trip.emplace_back(n_unknowns_ - 1, n_unknowns_ - 1, 1.0);
  }
  SpMat Minv(n_unknowns_, n_unknowns_);
  Minv.setFromTriplets(trip.begin(), trip.end());
  SpMat MCt = Minv * C_.transpose();
  SpMat S = C_ * MCt;
  if (minv_ct) *minv_ct = std::move(MCt);
  return S;
}

Eigen::VectorXd Projector::pcg(const SpMat& S, const Eigen::VectorXd& b, int& iterations,
                               double& res, double tol) const {
  auto scaled_norm = [&](const Eigen::VectorXd& r) { return r.cwiseQuotient(row_weight_).cwiseAbs().maxCoeff(); };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  res = scaled_norm(r);
  iterations = 0;
  if (res <= tol) return x;
  Eigen::VectorXd z = precond_->solve(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (iterations = 1; iterations <= max_iter_; ++iterations) {
    const Eigen::VectorXd Sp = S * p;
    const double alpha = rz / p.dot(Sp);
    x += alpha * p;
    r -= alpha * Sp;
    res = scaled_norm(r);
    if (!std::isfinite(res)) break;
    if (res <= tol) return x;
    z = precond_->solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError("projection did not converge in " + std::to_string(max_iter_) +
                        " iterations (scaled residual " + std::to_string(res) + ")",
                    res);
}

GridField Projector::pressure_field(const Eigen::VectorXd& lambda, double scale, double t) const {
  const int nr = grid_.n_r(), nt = grid_.n_theta();
  GridField P(grid_, 1, t);
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) P(0, i, j) = lambda((i - 1) * nt + j) * scale;
  for (int j = 0; j < nt; ++j) {
    P(0, 0, j) = 2.0 * P(0, 1, j) - P(0, 2, j);
    P(0, nr, j) = 2.0 * P(0, nr - 1, j) - P(0, nr - 2, j);
  }
  double mean = 0.0, area = 0.0;
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j < nt; ++j) {
      mean += grid_.weight(i, j) * P(0, i, j);
      area += grid_.weight(i, j);
    }
  mean /= area;
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j < nt; ++j) P(0, i, j) -= mean;
  P.fill_ghosts_extrapolate();
  return P;
}

namespace {

void set_normal_parts(GridField& U, const AnnulusGrid& g, const Vec2& A) {
  for (int j = 0; j < g.n_theta(); ++j) {
    const Vec2 er = g.radial_unit(j);
    const Vec2 u = U.vec(0, j);
    U.set_vec(0, j, u + (A.dot(er) - u.dot(er)) * er);
    U.set_vec(g.n_r(), j, Vec2::Zero());
  }
}

}  // namespace

ProjectionResult Projector::project(GridField& U, Vec2& A, const TransformAtlas& atlas,
                                    double dt_eff) const {
  if (!U.matches(grid_) || U.ncomp() != 2) throw ShapeMismatch("projection: velocity shape");
  const int nr = grid_.n_r(), nt = grid_.n_theta();
  set_normal_parts(U, grid_, A);
  Eigen::VectorXd b(n_rows_);
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) b((i - 1) * nt + j) = -grid_.weight(i, j) * divergence_at(grid_, U, i, j);
  ProjectionResult out;
  SpMat MCt;
  const SpMat S = build_schur(atlas, &MCt);
  double res = 0.0;
  const Eigen::VectorXd lambda = pcg(S, b, out.iterations, res, 0.1 * tol_);
  if (out.iterations > 0) {
    const Eigen::VectorXd dV = MCt * lambda;
    for (int i = 1; i < nr; ++i)
      for (int j = 0; j < nt; ++j) {
        const int k = 2 * ((i - 1) * nt + j);
        U(0, i, j) += dV(k);
        U(1, i, j) += dV(k + 1);
      }
    if (body_free_) A += dV.tail<2>();
    set_normal_parts(U, grid_, A);
  }
  out.P = pressure_field(lambda, 1.0 / dt_eff, U.t());
  out.residual = max_divergence(U, grid_);
  return out;
}

GridField Projector::solve_pressure(const GridField& rhs, const TransformAtlas& atlas) const {
  if (!rhs.matches(grid_) || rhs.ncomp() != 1) throw ShapeMismatch("pressure_solve: rhs shape");
  const int nr = grid_.n_r(), nt = grid_.n_theta();
  Eigen::VectorXd b(n_rows_);
  double mean = 0.0, area = 0.0;
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      mean += grid_.weight(i, j) * rhs(0, i, j);
      area += grid_.weight(i, j);
    }
  mean /= area;
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < nt; ++j) b((i - 1) * nt + j) = -grid_.weight(i, j) * (rhs(0, i, j) - mean);
  const SpMat S = build_schur(atlas, nullptr);
  int it = 0;
  double res = 0.0;
  const Eigen::VectorXd p = pcg(S, b, it, res, tol_);
  return pressure_field(p, 1.0, rhs.t());
}

GridField pressure_solve(const GridField& rhs, const TransformAtlas& atlas, double tol) {
  Projector proj(atlas.grid(), false, tol, 2000);
  return proj.solve_pressure(rhs, atlas);
}

Schedule make_schedule(double t, double t_end, double dt_max) {
  Schedule s;
  const double span = t_end - t;
  if (!(span > 1e-14 * std::max(1.0, std::abs(t_end)))) return s;
  if (!(dt_max > 0.0)) throw InvalidInput("maximum time step must be positive");
  s.steps = static_cast<int>(std::ceil(span / dt_max - 1e-9));
  s.dt = span / s.steps;
  return s;
}

// ---------------------------------------------------------------------------
// Initial data

GridField initial_velocity(const SimConfig& c, const AnnulusGrid& g) {
  GridField U(g, 2, 0.0);
  U.set_zero();
  const double L = g.r_outer() - g.r_inner();
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 y = g.node(i, j);
      switch (c.initial) {
        case InitialKind::rest:
          break;
        case InitialKind::rigid_rotation:
          U.set_vec(i, j, c.amplitude * Vec2(-y.y(), y.x()));
          break;
        case InitialKind::swirl: {
          const double s = std::sin(std::numbers::pi * (g.r(i) - g.r_inner()) / L);
          U.set_vec(i, j, c.amplitude * s * g.angular_unit(j));
          break;
        }
      }
    }
  U.fill_ghosts_extrapolate();
  return U;
}

GridField seeded_perturbation(const AnnulusGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double L = g.r_outer() - g.r_inner();
  const double rho = 0.2 * L;
  constexpr int kBumps = 3;
  Vec2 centers[kBumps];
  double amps[kBumps];
  for (int k = 0; k < kBumps; ++k) {
    const double rc = g.r_inner() + 0.3 * L + uniform() * 0.4 * L;
    const double th = 2.0 * std::numbers::pi * uniform();
    centers[k] = rc * Vec2(std::cos(th), std::sin(th));
    amps[k] = 2.0 * uniform() - 1.0;
  }
  // psi = sum_k c_k (1 - s^2)^4, s = |y - y_k| / rho; U = (d2 psi, -d1 psi)
  GridField U(g, 2, 0.0);
  U.set_zero();
  double vmax = 0.0;
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 y = g.node(i, j);
      Vec2 grad = Vec2::Zero();
      for (int k = 0; k < kBumps; ++k) {
        const Vec2 d = y - centers[k];
        const double s2 = d.squaredNorm() / (rho * rho);
        if (s2 >= 1.0) continue;
        const double w = 1.0 - s2;
        grad += amps[k] * (-8.0) * w * w * w * d / (rho * rho);
      }
      const Vec2 u(grad.y(), -grad.x());
      U.set_vec(i, j, u);
      vmax = std::max(vmax, u.norm());
    }
  if (vmax > 0.0)
    for (double& v : U.raw()) v /= vmax;
  U.fill_ghosts_extrapolate();
  return U;
}

TransformAtlas initial_atlas(const SimConfig& c, const AnnulusGrid& g) {
  TransformAtlas atlas = flat_atlas(g);
  if (c.q0.norm() == 0.0) return atlas;
  // Translate the body from the origin to q0 over unit pseudo-time.
  constexpr int kSub = 32;
  const Geometry geom{c.r_inner, c.r_outer};
  RigidState s = RigidState::planar(0.0, 0.0, c.q0.x(), c.q0.y(), 0.0);
  const double h = 1.0 / kSub;
  for (int n = 0; n < kSub; ++n) {
    const ExtensionField now = build_extension(s, geom, c.effective_delta0(), false);
    RigidState next = step_rigid(s, s.a, s.omega, h);
    const ExtensionField later(next, geom, c.effective_delta0(), false);
    atlas = advance_flow_map(atlas, now, later, h);
    s = next;
  }
  // Restart the clock with the exact rigid pose.
  atlas.t = 0.0;
  atlas.id = 0;
  atlas.body_q = c.q0;
  atlas.body_Q = Mat2::Identity();
  atlas.X.set_time(0.0);
  finalize_geometry(atlas);
  return atlas;
}

// ---------------------------------------------------------------------------
// Solver

FluidSolver::FluidSolver(SimConfig config)
    : config_(std::move(config)), grid_(config_.make_grid()) {
  validate(config_);
  inertia_ = body_inertia(config_.r_inner, 1.0, 2).planar();
  projector_ = std::make_shared<Projector>(grid_, config_.body_mode == BodyMode::free,
                                           config_.proj_tol, config_.max_iter);
}

ExtensionField FluidSolver::extension(const RigidState& r) const {
  return build_extension(r, geometry(), config_.effective_delta0(), config_.track_rotation);
}

BoundaryValues FluidSolver::boundary_values(const RigidState& r, const TransformAtlas& atlas) const {
  return {atlas.body_Q.transpose() * to_vec2(r.a), r.omega(0)};
}

SimState FluidSolver::initialize(const GridField* extra) const {
  const SimConfig& c = config_;
  SimState s;
  const bool moving = c.body_mode != BodyMode::pinned;
  s.rigid = RigidState::planar(c.q0.x(), c.q0.y(), moving ? c.a0.x() : 0.0,
                               moving ? c.a0.y() : 0.0, moving ? c.omega0 : 0.0);
  auto atlas = std::make_shared<TransformAtlas>(initial_atlas(c, grid_));
  GridField U = initial_velocity(c, grid_);
  if (c.perturbation != 0.0) {
    const GridField p = seeded_perturbation(grid_, c.seed);
    for (std::size_t k = 0; k < U.raw().size(); ++k) U.raw()[k] += c.perturbation * p.raw()[k];
  }
  if (extra) {
    if (!extra->matches(grid_) || extra->ncomp() != 2) throw ShapeMismatch("initial velocity shape");
    for (std::size_t k = 0; k < U.raw().size(); ++k) U.raw()[k] += extra->raw()[k];
  }
  Vec2 a = to_vec2(s.rigid.a);
  finish_stage(U, a, s.rigid.omega(0), *atlas, 1.0);
  s.rigid.a = to_vecx(a);
  assign_map_velocity(*atlas, extension(s.rigid));
  s.flow.U = std::move(U);
  s.flow.P = GridField(grid_, 1, 0.0);
  s.flow.P.set_zero();
  s.flow.t = 0.0;
  s.flow.atlas_ref = atlas->id;
  s.atlas = atlas;
  return s;
}

double FluidSolver::stable_dt(const SimState& s) const {
  const TransformAtlas& atlas = *s.atlas;
  const double h = grid_.effective_spacing();
  double geig = 0.0, vmax = 0.0;
  for (int i = 0; i <= grid_.n_r(); ++i)
    for (int j = 0; j < grid_.n_theta(); ++j) {
      const Eigen::SelfAdjointEigenSolver<Mat2> es(atlas.metric_up(i, j), Eigen::EigenvaluesOnly);
      geig = std::max(geig, es.eigenvalues().maxCoeff());
      double v = s.flow.U.vec(i, j).norm();
      if (atlas.has_time_derivatives) v += atlas.Ydot.vec(i, j).norm();
      vmax = std::max(vmax, v);
    }
  double lim = 0.4 * h * h / (config_.mu * geig);
  if (vmax > 0.0) lim = std::min(lim, 0.5 * h / vmax);
  return lim;
}

double FluidSolver::auto_dt(const SimState& s) const { return config_.cfl * stable_dt(s); }

GridField FluidSolver::momentum_rhs(const GridField& U, const TransformAtlas& atlas, double t) const {
  const GridField conv = op_conv(U, atlas);
  const GridField M = op_M(U, atlas);
  const GridField L = op_L(U, atlas);
  GridField F(grid_, 2, t);
  auto& f = F.raw();
  const auto &c = conv.raw(), &m = M.raw(), &l = L.raw();
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = -c[k] - m[k] + config_.mu * l[k];
  if (forcing_)
    for (int i = 0; i <= grid_.n_r(); ++i)
      for (int j = 0; j < grid_.n_theta(); ++j)
        F.set_vec(i, j, F.vec(i, j) + forcing_(t, grid_.node(i, j)));
  return F;
}

std::vector<Vec2> traction(const GridField& U, const GridField* P, const AnnulusGrid& g,
                           const BoundaryValues& bv, double mu, const Mat2& Q_map) {
  std::vector<Vec2> out(g.n_theta());
  const double R = g.r_inner(), dr = g.dr();
  for (int j = 0; j < g.n_theta(); ++j) {
    const Vec2 er = g.radial_unit(j), et = g.angular_unit(j);
    double ur[3], ut[3];
    for (int k = 0; k < 3; ++k) {
      ur[k] = U.vec(k, j).dot(er);
      ut[k] = U.vec(k, j).dot(et);
    }
    const double d_rr = (-3.0 * ur[0] + 4.0 * ur[1] - ur[2]) / (2.0 * dr);
    const double two_d_rt = (-3.0 * ut[0] + 4.0 * ut[1] - ut[2]) / (2.0 * dr) - ut[0] / R + bv.A.dot(et) / R;
    // T n with n = -e_r (pointing into the body).
    Vec2 tn = -mu * (2.0 * d_rr * er + two_d_rt * et);
    if (P) tn += (*P)(0, 0, j) * er;
    out[j] = Q_map * tn;
  }
  return out;
}

void FluidSolver::viscous_load(const GridField& U, const BoundaryValues& bv,
                               const TransformAtlas& atlas, Vec2& force, double& torque) const {
  const std::vector<Vec2> tn = traction(U, nullptr, grid_, bv, config_.mu, atlas.body_Q);
  force.setZero();
  torque = 0.0;
  const double w = grid_.arc_weight(0), R = grid_.r_inner();
  for (int j = 0; j < grid_.n_theta(); ++j) {
    const Vec2 arm = atlas.body_Q * (R * grid_.radial_unit(j));
    force -= w * tn[j];
    torque -= w * (arm.x() * tn[j].y() - arm.y() * tn[j].x());
  }
}

FluidSolver::Stage FluidSolver::advance_stage(const GridField& U, const Vec2& a, double omega,
                                              const TransformAtlas& atlas, double t, double dt) const {
  const GridField F = momentum_rhs(U, atlas, t);
  Stage st{U, a, omega};
  for (int i = 1; i < grid_.n_r(); ++i)
    for (int j = 0; j < grid_.n_theta(); ++j) st.U.set_vec(i, j, U.vec(i, j) + dt * F.vec(i, j));
  st.U.set_time(t + dt);
  if (config_.body_mode == BodyMode::free) {
    Vec2 force;
    double torque;
    const BoundaryValues bv{atlas.body_Q.transpose() * a, omega};
    viscous_load(U, bv, atlas, force, torque);
    st.a = a + dt * force;
    st.omega = omega + dt * torque / inertia_;
  }
  return st;
}

ProjectionResult FluidSolver::finish_stage(GridField& U, Vec2& a, double omega,
                                           const TransformAtlas& atlas, double dt_eff) const {
  BoundaryValues bv{atlas.body_Q.transpose() * a, omega};
  const ProjectionResult pr = projector_->project(U, bv.A, atlas, dt_eff);
  a = atlas.body_Q * bv.A;
  apply_slip_bc(U, grid_, bv, config_.mu, config_.beta, config_.slip);
  return pr;
}

SimState FluidSolver::step(const SimState& s, double dt, StepInfo* info) const {
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  const double lim = stable_dt(s);
  if (dt > lim * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the stability limit " << lim;
    throw CflViolation(msg.str(), config_.cfl * lim);
  }
  const TransformAtlas& atlas0 = *s.atlas;
  if (!atlas0.has_time_derivatives) throw InvalidInput("atlas lacks map velocity");
  const double t = s.flow.t;
  const ExtensionField f0 = extension(s.rigid);
  const Vec2 a0 = to_vec2(s.rigid.a);
  const double w0 = s.rigid.omega(0);

  // Stage 1: Euler predictor on the predicted domain.
  Stage st1 = advance_stage(s.flow.U, a0, w0, atlas0, t, dt);
  auto atlas1 = std::make_shared<TransformAtlas>(predict_flow_map(atlas0, f0, dt));
  finish_stage(st1.U, st1.a, st1.omega, *atlas1, dt);
  RigidState r1 = step_rigid(s.rigid, to_vecx(a0), scalar_vec(w0), dt);
  r1.a = to_vecx(st1.a);
  r1.omega = scalar_vec(st1.omega);
  const ExtensionField f1 = extension(r1);
  assign_map_velocity(*atlas1, f1);

  // Stage 2 and average.
  Stage st2 = advance_stage(st1.U, st1.a, st1.omega, *atlas1, t + dt, dt);
  GridField U = s.flow.U;
  for (int i = 1; i < grid_.n_r(); ++i)
    for (int j = 0; j < grid_.n_theta(); ++j) U.set_vec(i, j, 0.5 * (s.flow.U.vec(i, j) + st2.U.vec(i, j)));
  U.set_time(t + dt);
  Vec2 a = 0.5 * (a0 + st2.a);
  const double w = 0.5 * (w0 + st2.omega);

  auto atlas2 = std::make_shared<TransformAtlas>(advance_flow_map(atlas0, f0, f1, dt));
  RigidState r2 = step_rigid(s.rigid, to_vecx(0.5 * (a0 + st1.a)), scalar_vec(0.5 * (w0 + st1.omega)), dt);
  const ProjectionResult pr = finish_stage(U, a, w, *atlas2, 0.5 * dt);
  r2.a = to_vecx(a);
  r2.omega = scalar_vec(w);
  assign_map_velocity(*atlas2, extension(r2));

  SimState out;
  out.rigid = r2;
  out.atlas = atlas2;
  out.flow.U = std::move(U);
  out.flow.P = pr.P;
  out.flow.t = t + dt;
  out.flow.atlas_ref = atlas2->id;
  if (info) {
    info->dt = dt;
    info->divergence = pr.residual;
    info->iterations = pr.iterations;
    info->normal_residual =
        slip_residuals(out.flow.U, grid_, boundary_values(out.rigid, *atlas2), config_.mu,
                       config_.beta, config_.slip).normal;
  }
  return out;
}

}  // namespace slipfsi
