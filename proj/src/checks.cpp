#include "slipfsi/checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "slipfsi/coupling.hpp"
#include "slipfsi/errors.hpp"
#include "slipfsi/io.hpp"

namespace slipfsi {

namespace fs = std::filesystem;

void CheckReport::at_most(const std::string& name, double value, double limit) {
  items.push_back({name, value, limit, true, std::isfinite(value) && value <= limit});
}

void CheckReport::at_least(const std::string& name, double value, double limit) {
  items.push_back({name, value, limit, false, std::isfinite(value) && value >= limit});
}

bool CheckReport::passed() const {
  for (const CheckItem& it : items)
    if (!it.pass) return false;
  return !items.empty();
}

void print_report(std::ostream& os, const CheckReport& r) {
  os << "== " << r.title << " (" << std::fixed << std::setprecision(1) << r.seconds << " s)\n";
  os << std::defaultfloat;
  for (const CheckItem& it : r.items) {
    os << "  [" << (it.pass ? "ok" : "FAIL") << "] " << it.name << " = " << std::setprecision(4)
       << it.value << (it.upper ? " <= " : " >= ") << it.limit << '\n';
  }
  os << std::setprecision(6);
}

std::string failure_summary_json(const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const CheckReport& r : reports) {
    nlohmann::ordered_json fails = nlohmann::ordered_json::array();
    for (const CheckItem& it : r.items)
      if (!it.pass)
        fails.push_back({{"name", it.name}, {"value", it.value}, {"limit", it.limit},
                         {"bound", it.upper ? "upper" : "lower"}});
    out.push_back({{"title", r.title}, {"passed", r.passed()}, {"failures", fails}});
  }
  return out.dump();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Divergence-free test field with closed-form Laplacian and convection.
Vec2 u_exact(const Vec2& x) { return Vec2(std::sin(x.x()) * std::cos(x.y()), -std::cos(x.x()) * std::sin(x.y())); }
Vec2 lap_exact(const Vec2& x) { return -2.0 * u_exact(x); }
Vec2 conv_exact(const Vec2& x) { return 0.5 * Vec2(std::sin(2 * x.x()), std::sin(2 * x.y())); }
double p_exact(const Vec2& x) { return x.x() * x.x() - x.y(); }
Vec2 gradp_exact(const Vec2& x) { return Vec2(2 * x.x(), -1.0); }

GridField pull_vector(const TransformAtlas& a, Vec2 (*f)(const Vec2&), bool ghosts) {
  const AnnulusGrid& g = a.grid();
  GridField U(g, 2, a.t);
  const int lo = ghosts ? -1 : 0, hi = ghosts ? g.n_r() + 1 : g.n_r();
  for (int i = lo; i <= hi; ++i)
    for (int j = 0; j < g.n_theta(); ++j) U.set_vec(i, j, a.inverse_jacobian(i, j) * f(a.X.vec(i, j)));
  if (ghosts) U.mark_ghosts_filled();
  else U.fill_ghosts_extrapolate();
  return U;
}

GridField pull_scalar(const TransformAtlas& a, double (*f)(const Vec2&)) {
  const AnnulusGrid& g = a.grid();
  GridField P(g, 1, a.t);
  for (int i = -1; i <= g.n_r() + 1; ++i)
    for (int j = 0; j < g.n_theta(); ++j) P(0, i, j) = f(a.X.vec(i, j));
  P.mark_ghosts_filled();
  return P;
}

double max_diff(const GridField& a, const GridField& b, int i0, int i1) {
  double e = 0.0;
  for (int c = 0; c < a.ncomp(); ++c)
    for (int i = i0; i <= i1; ++i)
      for (int j = 0; j < a.n_theta(); ++j) e = std::max(e, std::abs(a(c, i, j) - b(c, i, j)));
  return e;
}

double max_abs(const GridField& a, int i0, int i1) {
  double e = 0.0;
  for (int c = 0; c < a.ncomp(); ++c)
    for (int i = i0; i <= i1; ++i)
      for (int j = 0; j < a.n_theta(); ++j) e = std::max(e, std::abs(a(c, i, j)));
  return e;
}

double l2_diff(const AnnulusGrid& g, const GridField& a, const GridField& b) {
  double s = 0.0;
  for (int i = 1; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) s += g.weight(i, j) * (a.vec(i, j) - b.vec(i, j)).squaredNorm();
  return std::sqrt(s);
}

struct RigidPose {
  Vec2 q;
  double angle;
};

const RigidPose kPoses[] = {{Vec2(0.0, 0.0), 0.0}, {Vec2(0.3, -0.2), 0.7}, {Vec2(-0.45, 0.1), -2.1}};

}  // namespace

CheckReport transform_identities(const AnnulusGrid& g) {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "transform identities";
  double det_err = 0.0, inv_err = 0.0, gamma_err = 0.0;
  for (const RigidPose& p : kPoses) {
    const TransformAtlas a = rigid_atlas(g, p.q, rotation2(p.angle), Vec2(0.4, -0.3), 0.8);
    for (int i = 0; i <= g.n_r(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        det_err = std::max(det_err, std::abs(a.jacobian(i, j).determinant() - 1.0));
        inv_err = std::max(inv_err, (a.metric_up(i, j) * a.metric_lo(i, j) - Mat2::Identity()).cwiseAbs().maxCoeff());
        const Mat2 Y = a.inverse_jacobian(i, j);
        for (int k = 0; k < 2; ++k)
          for (int m = 0; m < 2; ++m)
            for (int n = m; n < 2; ++n) {
              double v = 0.0;
              for (int l = 0; l < 2; ++l) v += Y(k, l) * a.X_hess(3 * l + m + n, i, j);
              gamma_err = std::max(gamma_err, std::abs(v - a.gamma(k, m, n, i, j)));
            }
      }
  }
  r.at_most("rigid |det J - 1|", det_err, 1e-12);
  r.at_most("rigid |g^ij g_jk - delta|", inv_err, 1e-8);
  r.at_most("rigid |Gamma - Y X_hess|", gamma_err, 1e-8);

  const TransformAtlas flat = flat_atlas(g);
  const int hi = g.n_r();
  const GridField U = pull_vector(flat, u_exact, false);
  const GridField P = pull_scalar(flat, p_exact);
  const GridField lap = discrete_operator(U, OperatorKind::laplacian, g);
  const GridField grad = discrete_operator(U, OperatorKind::gradient, g);
  GridField conv(g, 2);
  for (int i = 0; i <= hi; ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 u = U.vec(i, j);
      Mat2 D;
      for (int a_ = 0; a_ < 2; ++a_)
        for (int b = 0; b < 2; ++b) D(a_, b) = grad(2 * a_ + b, i, j);
      conv.set_vec(i, j, D * u);
    }
  const GridField gp = discrete_operator(P, OperatorKind::gradient, g);
  // Machine precision relative to the stencil magnitude: 256 eps |f| / h^k.
  const double h = g.effective_spacing(), eps = 256.0 * std::numeric_limits<double>::epsilon();
  const double su = max_abs(U, 0, hi), sp = max_abs(P, 0, hi);
  r.at_most("flat op_L - Laplacian", max_diff(op_L(U, flat), lap, 0, hi), eps * su / (h * h));
  r.at_most("flat op_C - u.grad u", max_diff(op_conv(U, flat), conv, 0, hi), eps * su * su / h);
  r.at_most("flat op_M", max_abs(op_M(U, flat), 0, hi), eps * su / h);
  r.at_most("flat op_G - gradient", max_diff(op_G(P, flat), gp, 0, hi), eps * sp / h);
  r.seconds = seconds_since(t0);
  return r;
}

CheckReport pullback_study(const std::vector<int>& sizes) {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "pullback oracle";
  std::vector<double> hs, eL, eC, eG;
  for (int n : sizes) {
    const AnnulusGrid g(n, 2 * n, 0.5, 2.0);
    double l = 0.0, c = 0.0, p = 0.0;
    for (const RigidPose& pose : kPoses) {
      const TransformAtlas a = rigid_atlas(g, pose.q, rotation2(pose.angle));
      const GridField U = pull_vector(a, u_exact, true);
      const GridField P = pull_scalar(a, p_exact);
      l = std::max(l, l2_diff(g, op_L(U, a), pull_vector(a, lap_exact, true)));
      c = std::max(c, l2_diff(g, op_conv(U, a), pull_vector(a, conv_exact, true)));
      p = std::max(p, l2_diff(g, op_G(P, a), pull_vector(a, gradp_exact, true)));
    }
    hs.push_back(1.0 / n);
    eL.push_back(l);
    eC.push_back(c);
    eG.push_back(p);
    r.at_most("L2 error op_L n=" + std::to_string(n), l, 1.0);
  }
  r.at_least("slope op_L", loglog_slope(hs, eL), 1.8);
  r.at_least("slope op_C", loglog_slope(hs, eC), 1.8);
  r.at_least("slope op_G", loglog_slope(hs, eG), 1.8);
  r.seconds = seconds_since(t0);
  return r;
}


CheckReport kinematics_study() {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "rigid kinematics";
  {
    RigidState s2 = RigidState::planar(0.1, 0.2, 0.3, -0.1, 1.7);
    RigidState s3 = RigidState::at_rest(VecX::Zero(3));
    s3.a = VecX::Zero(3);
    s3.omega = Eigen::Vector3d(0.3, -1.2, 0.7);
    double drift = 0.0;
    for (int n = 0; n < 10000; ++n) {
      s2 = step_rigid(s2, s2.a, s2.omega, 1e-2);
      s3 = step_rigid(s3, s3.a, s3.omega, 1e-2);
      drift = std::max(drift, (s2.Q * s2.Q.transpose() - MatX::Identity(2, 2)).norm());
      drift = std::max(drift, (s3.Q * s3.Q.transpose() - MatX::Identity(3, 3)).norm());
    }
    r.at_most("|QQ^T - I| over 1e4 steps", drift, 1e-10);
  }
  // Time-dependent velocities, trapezoid-averaged per step, against closed forms.
  auto rate = [](double t) { return 1.0 + 0.5 * std::sin(t); };
  auto angle = [](double t) { return t + 0.5 * (1.0 - std::cos(t)); };
  auto vel = [](double t) { return Eigen::Vector2d(std::cos(t), std::sin(2 * t)); };
  auto pos = [](double t) { return Eigen::Vector2d(std::sin(t), 0.5 * (1.0 - std::cos(2 * t))); };
  const Eigen::Vector3d axis = Eigen::Vector3d(1.0, 2.0, -2.0).normalized();
  std::vector<double> dts, e2, e3;
  for (int n : {10, 20, 40, 80}) {
    const double dt = 1.0 / n;
    RigidState s2 = RigidState::planar(0.0, 0.0);
    RigidState s3 = RigidState::at_rest(VecX::Zero(3));
    for (int k = 0; k < n; ++k) {
      const double ta = k * dt, tb = ta + dt;
      const VecX a = 0.5 * (vel(ta) + vel(tb));
      VecX w(1);
      w(0) = 0.5 * (rate(ta) + rate(tb));
      s2 = step_rigid(s2, a, w, dt);
      const VecX a3 = VecX::Zero(3);
      const VecX w3 = axis * w(0);
      s3 = step_rigid(s3, a3, w3, dt);
    }
    const MatX Q2 = rotation2(angle(1.0));
    const MatX Q3 = rotation3(axis * angle(1.0));
    dts.push_back(dt);
    e2.push_back((s2.q - VecX(pos(1.0))).norm() + (s2.Q - Q2).norm());
    e3.push_back((s3.Q - Q3).norm());
  }
  r.at_least("planar trajectory slope", loglog_slope(dts, e2), 1.8);
  r.at_least("spatial rotation slope", loglog_slope(dts, e3), 1.8);
  r.seconds = seconds_since(t0);
  return r;
}

CheckReport relative_velocity_study() {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "relative angular velocity";
  double e2 = 0.0;
  for (double th1 : {0.0, 0.4, -2.5})
    for (double th2 : {0.1, 1.9})
      for (double w1 : {-1.3, 0.0, 2.2})
        for (double w2 : {0.7, -0.2}) {
          VecX o1(1), o2(1);
          o1 << w1;
          o2 << w2;
          const VecX wt = relative_angular_velocity(rotation2(th1), hat(o1), rotation2(th2), hat(o2));
          e2 = std::max(e2, std::abs(wt(0) - (w2 - w1)));
        }
  r.at_most("2D |omega_tilde - (Omega2 - omega1)|", e2, 1e-14);

  // Q(t) = Q2(t) Q1(t)^T with Q_k(t) = exp(t hat(w_k)) Q_k(0).
  const Eigen::Vector3d w1(0.4, -1.1, 0.6), w2(-0.8, 0.3, 1.4);
  const Eigen::Matrix3d Q10 = rotation3(Eigen::Vector3d(0.2, 0.5, -0.3));
  const Eigen::Matrix3d Q20 = rotation3(Eigen::Vector3d(-1.0, 0.1, 0.7));
  auto Q = [&](double t) -> Eigen::Matrix3d {
    return (rotation3(t * w2) * Q20) * (rotation3(t * w1) * Q10).transpose();
  };
  double e3 = 0.0, e3b = 0.0;
  for (double t : {0.0, 0.3, 1.1}) {
    const double h = 1e-3;
    const Eigen::Matrix3d dQ = (-Q(t + 2 * h) + 8 * Q(t + h) - 8 * Q(t - h) + Q(t - 2 * h)) / (12 * h);
    const MatX W = Q(t).transpose() * dQ;
    const VecX fd = Eigen::Vector3d(W(2, 1) - W(1, 2), W(0, 2) - W(2, 0), W(1, 0) - W(0, 1)) / 2.0;
    const Eigen::Matrix3d Q1 = rotation3(t * w1) * Q10, Q2 = rotation3(t * w2) * Q20;
    const VecX wt = relative_angular_velocity(Q1, hat(VecX(w1)), Q2, hat(VecX(w2)));
    const Eigen::Matrix3d Qt = Q(t);
    const VecX Omega2 = Qt.transpose() * w2;
    e3 = std::max(e3, (wt - fd).norm());
    e3b = std::max(e3b, (wt - (Omega2 - VecX(w1))).norm());
  }
  r.at_most("3D |omega_tilde - vee(Q^T Q')|", e3, 1e-10);
  r.at_most("3D |omega_tilde - (Q^T w2 - w1)|", e3b, 1e-12);
  r.seconds = seconds_since(t0);
  return r;
}


std::vector<EnergyScenario> energy_scenarios(const SimConfig& base) {
  SimConfig pinned = base;
  pinned.body_mode = BodyMode::pinned;
  pinned.q0 = Vec2::Zero();
  pinned.initial = InitialKind::swirl;
  pinned.amplitude = 1.0;
  pinned.perturbation = 0.0;
  pinned.t_end = 0.5;
  SimConfig free = base;
  free.body_mode = BodyMode::free;
  free.q0 = Vec2(0.2, 0.1);
  free.initial = InitialKind::swirl;
  free.amplitude = 1.0;
  free.perturbation = 0.3;
  free.t_end = 0.5;
  return {{"pinned swirl", pinned}, {"free perturbation", free}};
}

CheckReport energy_refinement(const std::vector<EnergyScenario>& scenarios, const std::vector<int>& sizes) {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "energy inequality";
  for (const EnergyScenario& sc : scenarios) {
    std::vector<double> hs, defects;
    for (int n : sizes) {
      SimConfig c = sc.config;
      c.n_r = n;
      c.n_theta = 2 * n;
      const EnergyStudy st = energy_study(c);
      hs.push_back(1.0 / n);
      defects.push_back(st.max_abs_defect / st.E0);
      if (n == sizes.back()) {
        r.at_most(sc.name + " max Delta/E0 n=" + std::to_string(n), st.max_defect / st.E0, 1e-3);
        r.at_most(sc.name + " max |Delta|/E0 n=" + std::to_string(n), st.max_abs_defect / st.E0, 1e-3);
      }
    }
    if (sizes.size() >= 2) r.at_least(sc.name + " defect slope", loglog_slope(hs, defects), 1.0);
  }
  r.seconds = seconds_since(t0);
  return r;
}

CheckReport reynolds_study(const std::vector<int>& levels) {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "Reynolds transport";
  // Off-center disk carried by a rigid rotation about the origin, plus a
  // weak strain and dilation so the flux term is exercised.
  const ScalarSpec f = [](double t, const Vec2& x) {
    return std::exp(-x.squaredNorm()) * (1.0 + 0.5 * std::sin(2.0 * t + x.x() - x.y()));
  };
  const VelocitySpec v = [](double t, const Vec2& x) -> Vec2 {
    return Vec2(-x.y(), x.x()) * (1.0 + 0.3 * std::cos(t)) + 0.2 * Vec2(x.x(), -x.y()) + 0.1 * x;
  };
  std::vector<double> hs, defects;
  for (int n : levels) {
    ReynoldsOptions o;
    o.n_radial = n;
    o.n_steps = 2 * n;
    const ReynoldsResult res = reynolds_check(f, v, o);
    hs.push_back(1.0 / n);
    defects.push_back(res.max_defect);
    r.at_most("defect n=" + std::to_string(n), res.max_defect, 1.0);
  }
  r.at_least("defect slope", loglog_slope(hs, defects), 1.8);
  r.seconds = seconds_since(t0);
  return r;
}


namespace {

struct CouetteRun {
  double normal = 0.0;      // max normal residual over all steps
  double tangential = 0.0;  // max discrete slip-law residual over all steps
  double wall_error = 0.0;  // max |u_theta(R) - exact|
  double field_error = 0.0; // max |u - exact| over the grid
  GridField U;
};

// Steady Couette flow between a spinning inner disk (Navier slip or no-slip)
// and a fixed outer wall: u_theta = A r + B / r.
CouetteRun couette(int n, double beta, SlipKind kind) {
  SimConfig c;
  c.n_r = n;
  c.n_theta = 2 * n;
  c.mu = 1.0;
  c.beta = beta;
  c.slip = kind;
  c.body_mode = BodyMode::prescribed;
  c.omega0 = 1.0;
  c.track_rotation = false;
  c.t_end = 0.2;
  const double R = c.r_inner, Ro = c.r_outer, w = c.omega0, mu = c.mu;
  const double B = kind == SlipKind::no_slip
                       ? w * R / (1.0 / R - R / (Ro * Ro))
                       : beta * w * R / (beta * (1.0 / R - R / (Ro * Ro)) + 2.0 * mu / (R * R));
  const double A = -B / (Ro * Ro);
  auto exact = [&](double r) { return A * r + B / r; };

  FluidSolver solver(c);
  const AnnulusGrid& g = solver.grid();
  SimState s = solver.initialize();
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) s.flow.U.set_vec(i, j, exact(g.r(i)) * g.angular_unit(j));
  s.flow.U.fill_ghosts_extrapolate();
  const Schedule sch = make_schedule(0.0, c.t_end, solver.auto_dt(s));
  CouetteRun out;
  for (int k = 0; k < sch.steps; ++k) {
    StepInfo info;
    s = solver.step(s, sch.dt, &info);
    const SlipResiduals res = slip_residuals(s.flow.U, g, solver.boundary_values(s.rigid, *s.atlas), c.mu,
                                             c.beta, c.slip);
    out.normal = std::max(out.normal, info.normal_residual);
    out.tangential = std::max(out.tangential, res.tangential);
  }
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double e = (s.flow.U.vec(i, j) - exact(g.r(i)) * g.angular_unit(j)).norm();
      out.field_error = std::max(out.field_error, e);
      if (i == 0) out.wall_error = std::max(out.wall_error, e);
    }
  out.U = s.flow.U;
  return out;
}

}  // namespace

CheckReport slip_study(const std::vector<int>& sizes) {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "slip condition";
  std::vector<double> hs, wall, field;
  double normal = 0.0, tangential = 0.0;
  for (int n : sizes) {
    const CouetteRun run = couette(n, 1.0, SlipKind::navier);
    hs.push_back(1.0 / n);
    wall.push_back(run.wall_error);
    field.push_back(run.field_error);
    normal = std::max(normal, run.normal);
    tangential = std::max(tangential, run.tangential);
    r.at_most("Couette wall error n=" + std::to_string(n), run.wall_error, 0.05);
  }
  r.at_most("normal residual, every step", normal, 1e-10);
  r.at_most("discrete slip-law residual, every step", tangential, 1e-10);
  r.at_least("Couette wall error slope", loglog_slope(hs, wall), 0.9);
  r.at_least("Couette field error slope", loglog_slope(hs, field), 0.9);

  const int n = sizes.back();
  const double beta = 1e6;
  const CouetteRun stiff = couette(n, beta, SlipKind::navier);
  const CouetteRun sticky = couette(n, 1.0, SlipKind::no_slip);
  double diff = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < 2 * n; ++j) diff = std::max(diff, (stiff.U.vec(i, j) - sticky.U.vec(i, j)).norm());
  r.at_most("|u(beta=1e6) - u(no-slip)|", diff, 10.0 / beta);
  r.at_most("beta=1e6 error vs no-slip exact", stiff.field_error, sticky.field_error + 10.0 / beta);
  r.seconds = seconds_since(t0);
  return r;
}


WeakStrongStudy weak_strong_study(const SimConfig& config, const std::vector<double>& deltas,
                                  const WeakStrongOptions& opt) {
  const auto t0 = Clock::now();
  WeakStrongStudy out;
  out.gap.title = "weak-strong gap";
  out.residual.title = "weak-strong residual";
  const StrongRun strong = strong_run(config, opt);
  out.reports.push_back(compare_runs(config, 0.0, strong, opt));
  for (double d : deltas) out.reports.push_back(compare_runs(config, d, strong, opt));

  auto sup = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  };
  auto spread = [](const std::vector<double>& v) {
    double mean = 0.0, dev = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double x : v) dev = std::max(dev, std::abs(x - mean));
    return mean != 0.0 ? dev / std::abs(mean) : INFINITY;
  };
  const GapReport& zero = out.reports.front();
  std::vector<double> ds, gaps, Cs, ratios;
  bool holds = true;
  for (std::size_t k = 1; k < out.reports.size(); ++k) {
    const GapReport& g = out.reports[k];
    ds.push_back(g.delta);
    gaps.push_back(sup(g.gap_L2));
    Cs.push_back(g.fitted_C);
    ratios.push_back(g.residual_ratio);
    holds = holds && g.inequality_holds;
  }
  if (!ds.empty()) {
    out.gap.at_least("sup-gap slope (>= 0.8)", loglog_slope(ds, gaps), 0.8);
    out.gap.at_most("sup-gap slope (<= 1.2)", loglog_slope(ds, gaps), 1.2);
    out.gap.at_least("gap^2 <= gap^2(0) + C int, all t", holds ? 1.0 : 0.0, 1.0);
    out.gap.at_most("fitted_C relative spread", spread(Cs), 0.5);
  }
  out.gap.at_most("delta = 0 sup gap", sup(zero.gap_L2), 1e-12);
  out.gap.seconds = seconds_since(t0);

  if (!ratios.empty()) {
    out.residual.at_most("residual ratio (max over sweep)", sup(ratios), 1e3);
    out.residual.at_most("residual ratio relative spread", spread(ratios), 0.3);
  }
  if (opt.residual) out.residual.at_most("delta = 0 residual", sup(zero.residual_norm), 1e-12);
  out.residual.seconds = out.gap.seconds;
  return out;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CheckReport reproducibility_study(const SimConfig& config, const std::string& work_dir) {
  const auto t0 = Clock::now();
  CheckReport r;
  r.title = "reproducibility";
  const fs::path root(work_dir);
  fs::create_directories(root);
  const std::string a = (root / "run_a").string(), b = (root / "run_b").string();
  simulate(config, a);
  simulate(config, b);
  bool same = true;
  for (const char* f : {"trajectory.csv", "energy.csv"})
    same = same && read_bytes((fs::path(a) / f).string()) == read_bytes((fs::path(b) / f).string());
  r.at_least("repeated run CSVs identical", same ? 1.0 : 0.0, 1.0);

  // Split at the middle step; the restored half must continue bit-identically.
  const double dt = config.dt;
  const Schedule sch = make_schedule(0.0, config.t_end, dt);
  SimConfig first = config;
  first.t_end = (sch.steps / 2) * sch.dt;
  const std::string ckpt = (root / "split.ckpt").string();
  const std::string s1 = (root / "split_1").string(), s2 = (root / "split_2").string();
  simulate(first, s1, {"", ckpt});
  simulate(config, s2, {ckpt, ""});
  bool split = true;
  for (const char* f : {"trajectory.csv", "energy.csv"}) {
    const auto whole = read_lines((fs::path(a) / f).string());
    auto joined = read_lines((fs::path(s1) / f).string());
    const auto tail = read_lines((fs::path(s2) / f).string());
    joined.insert(joined.end(), tail.begin() + 1, tail.end());
    split = split && joined == whole;
  }
  r.at_least("checkpoint split run identical", split ? 1.0 : 0.0, 1.0);

  const Checkpoint cp = load_checkpoint(ckpt, config);
  const std::string again = (root / "again.ckpt").string();
  save_checkpoint(again, cp);
  r.at_least("save(restore(ckpt)) identical bytes", read_bytes(ckpt) == read_bytes(again) ? 1.0 : 0.0, 1.0);
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace slipfsi
