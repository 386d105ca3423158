#include "slipfsi/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slipfsi/errors.hpp"

namespace slipfsi {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 to_vec2(const VecX& v) { return Vec2(v(0), v(1)); }

double fluid_energy(const GridField& U, const TransformAtlas& atlas) {
  const AnnulusGrid& g = atlas.grid();
  double E = 0.0;
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 u = U.vec(i, j);
      E += 0.5 * g.weight(i, j) * u.dot(atlas.metric_lo(i, j) * u);
    }
  return E;
}

GridField physical_velocity(const GridField& U, const TransformAtlas& atlas) {
  const AnnulusGrid& g = atlas.grid();
  GridField u(g, 2, U.t());
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) u.set_vec(i, j, atlas.jacobian(i, j) * U.vec(i, j));
  u.fill_ghosts_extrapolate();
  return u;
}

}  // namespace

// ---------------------------------------------------------------------------
// Energy

EnergyRates energy_rates(const SimState& s, const FluidSolver& solver) {
  const SimConfig& c = solver.config();
  const AnnulusGrid& g = solver.grid();
  const TransformAtlas& atlas = *s.atlas;
  EnergyRates r;
  const double Ef = fluid_energy(s.flow.U, atlas);
  const double a2 = s.rigid.a.squaredNorm(), w = s.rigid.omega(0);
  const double R = c.r_inner;
  r.E = Ef + 0.5 * a2 + 0.5 * solver.inertia() * w * w;
  r.E_extended = Ef + 0.5 * kPi * R * R * a2 + 0.5 * (0.5 * kPi * R * R * R * R) * w * w;

  const GridField u = physical_velocity(s.flow.U, atlas);
  double visc = 0.0;
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Mat2 Y = atlas.inverse_jacobian(i, j);
      Mat2 G;
      for (int a = 0; a < 2; ++a) G.row(a) = (Y.transpose() * gradient_at(g, u, a, i, j)).transpose();
      const Mat2 D = 0.5 * (G + G.transpose());
      visc += g.weight(i, j) * D.squaredNorm();
    }
  r.visc = 2.0 * c.mu * visc;

  if (c.slip == SlipKind::navier) {
    const BoundaryValues bv = solver.boundary_values(s.rigid, atlas);
    double slip = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 et = g.angular_unit(j);
      const double d = s.flow.U.vec(0, j).dot(et) - (bv.A.dot(et) + bv.omega * R);
      slip += g.arc_weight(0) * d * d;
    }
    r.slip = c.beta * slip;
  }
  return r;
}

EnergyLedger energy_start(const SimState& s, const FluidSolver& solver) {
  const EnergyRates r = energy_rates(s, solver);
  EnergyLedger L;
  L.t = s.flow.t;
  L.E_total = r.E;
  L.E_extended = r.E_extended;
  L.E0 = r.E;
  L.last_visc_rate = r.visc;
  L.last_slip_rate = r.slip;
  return L;
}

EnergyLedger energy_update(const SimState& s, const FluidSolver& solver, const EnergyLedger& prev,
                           double dt) {
  const EnergyRates r = energy_rates(s, solver);
  EnergyLedger L = prev;
  L.t = s.flow.t;
  L.E_total = r.E;
  L.E_extended = r.E_extended;
  L.D_visc += 0.5 * dt * (prev.last_visc_rate + r.visc);
  L.D_slip += 0.5 * dt * (prev.last_slip_rate + r.slip);
  L.last_visc_rate = r.visc;
  L.last_slip_rate = r.slip;
  L.defect = L.E_total + L.D_visc + L.D_slip - L.E0;
  return L;
}

EnergyStudy energy_study(const SimConfig& config) {
  FluidSolver solver(config);
  SimState s = solver.initialize();
  const double dt_max = config.dt > 0.0 ? config.dt : solver.auto_dt(s);
  const Schedule sch = make_schedule(0.0, config.t_end, dt_max);
  EnergyStudy out;
  EnergyLedger L = energy_start(s, solver);
  out.E0 = L.E0;
  out.history.push_back(L);
  for (int n = 0; n < sch.steps; ++n) {
    s = solver.step(s, sch.dt);
    L = energy_update(s, solver, L, sch.dt);
    out.history.push_back(L);
    out.max_defect = std::max(out.max_defect, L.defect);
    out.max_abs_defect = std::max(out.max_abs_defect, std::abs(L.defect));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reynolds transport

ReynoldsResult reynolds_check(const ScalarSpec& f, const VelocitySpec& v, const ReynoldsOptions& opt) {
  if (opt.n_radial < 2 || opt.n_steps < 2 || !(opt.T > 0.0) || !(opt.radius > 0.0))
    throw InvalidInput("reynolds_check: invalid options");
  const int nr = opt.n_radial, nt = 4 * opt.n_radial;
  const double hr = opt.radius / nr, ht = 2.0 * kPi / nt;
  // Five material points per cell: center and the four half-cell offsets.
  struct Cell {
    double rho, w;
    std::array<Vec2, 5> x;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(nr) * nt);
  for (int k = 0; k < nr; ++k)
    for (int l = 0; l < nt; ++l) {
      const double rho = (k + 0.5) * hr, phi = (l + 0.5) * ht;
      auto at = [&](double r_, double p_) -> Vec2 { return opt.center + r_ * Vec2(std::cos(p_), std::sin(p_)); };
      cells.push_back({rho, rho * hr * ht,
                       {at(rho, phi), at(rho + 0.5 * hr, phi), at(rho - 0.5 * hr, phi),
                        at(rho, phi + 0.5 * ht), at(rho, phi - 0.5 * ht)}});
    }
  const double dt = opt.T / opt.n_steps;
  const double fd = 1e-5;
  auto integrals = [&](double t, double& I, double& Jr, double& vol) {
    I = Jr = vol = 0.0;
    for (const Cell& c : cells) {
      const Vec2 dr = (c.x[1] - c.x[2]) / hr;
      const Vec2 dp = (c.x[3] - c.x[4]) / ht;
      const double det = (dr.x() * dp.y() - dr.y() * dp.x()) / c.rho;
      const Vec2 x = c.x[0];
      const double ft = (f(t + fd, x) - f(t - fd, x)) / (2 * fd);
      const Vec2 gf((f(t, x + Vec2(fd, 0)) - f(t, x - Vec2(fd, 0))) / (2 * fd),
                    (f(t, x + Vec2(0, fd)) - f(t, x - Vec2(0, fd))) / (2 * fd));
      const double div = (v(t, x + Vec2(fd, 0)).x() - v(t, x - Vec2(fd, 0)).x() +
                          v(t, x + Vec2(0, fd)).y() - v(t, x - Vec2(0, fd)).y()) / (2 * fd);
      const double fx = f(t, x);
      I += c.w * det * fx;
      Jr += c.w * det * (ft + v(t, x).dot(gf) + fx * div);
      vol += c.w * det;
    }
  };
  std::vector<double> I(opt.n_steps + 1), Jr(opt.n_steps + 1), vol(opt.n_steps + 1);
  integrals(0.0, I[0], Jr[0], vol[0]);
  for (int n = 0; n < opt.n_steps; ++n) {
    const double t = n * dt;
    for (Cell& c : cells)
      for (Vec2& x : c.x) {
        const Vec2 k1 = v(t, x);
        const Vec2 k2 = v(t + 0.5 * dt, x + 0.5 * dt * k1);
        const Vec2 k3 = v(t + 0.5 * dt, x + 0.5 * dt * k2);
        const Vec2 k4 = v(t + dt, x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    integrals(t + dt, I[n + 1], Jr[n + 1], vol[n + 1]);
  }
  ReynoldsResult res;
  for (int n = 1; n < opt.n_steps; ++n) {
    const double lhs = (I[n + 1] - I[n - 1]) / (2 * dt);
    res.max_defect = std::max(res.max_defect, std::abs(lhs - Jr[n]));
  }
  for (int n = 0; n <= opt.n_steps; ++n)
    res.max_volume_defect = std::max(res.max_volume_defect, std::abs(vol[n] - vol[0]));
  return res;
}

// ---------------------------------------------------------------------------
// Weak-strong

ResidualSample residual_estimate_check(const SimState& weak, const SimState& strong,
                                       const FluidSolver& solver) {
  const AnnulusGrid& g = solver.grid();
  const double mu = solver.config().mu;
  const TransformAtlas rel = relative_atlas(weak.atlas, *strong.atlas);
  const TransformedStrong ts = transform_strong_solution(strong.flow.U, strong.flow.P, weak.rigid,
                                                         strong.rigid, *weak.atlas, *strong.atlas);
  GridField P = ts.P;
  P.fill_ghosts_extrapolate();
  const GridField L = op_L(ts.U, rel);
  const GridField D = coord_laplacian(ts.U, rel);
  const GridField M = op_M(ts.U, rel);
  const ConvectionSplit N = op_conv_split(ts.U, rel);
  const GridField G = op_G(P, rel);
  const GridField Gf = coord_gradient(P, rel);
  ResidualSample out;
  double sum = 0.0;
  for (int i = 1; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      Vec2 r;
      for (int c = 0; c < 2; ++c)
        r(c) = mu * (L(c, i, j) - D(c, i, j)) - M(c, i, j) - N.extra(c, i, j) - (G(c, i, j) - Gf(c, i, j));
      sum += g.weight(i, j) * r.squaredNorm();
    }
  out.residual = std::sqrt(sum);
  double dev0 = 0.0, dev1 = 0.0;
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      dev0 = std::max(dev0, (strong.atlas->X.vec(i, j) - weak.atlas->X.vec(i, j)).norm());
      const Mat2 J = strong.atlas->jacobian(i, j) * weak.atlas->inverse_jacobian(i, j) - Mat2::Identity();
      dev1 = std::max(dev1, J.cwiseAbs().maxCoeff());
    }
  out.map_deviation = dev0 + dev1;
  return out;
}

namespace {

double strong_dt(const FluidSolver& solver, const SimState& s, const WeakStrongOptions& opt) {
  if (opt.dt > 0.0) return opt.dt;
  if (solver.config().dt > 0.0) return solver.config().dt;
  return solver.auto_dt(s);
}

bool is_sample(int n, int steps, int every) { return n % every == 0 || n == steps; }

}  // namespace

StrongRun strong_run(const SimConfig& config, const WeakStrongOptions& opt) {
  if (opt.sample_every < 1) throw InvalidInput("sample_every must be >= 1");
  FluidSolver solver(config);
  SimState s = solver.initialize();
  StrongRun run;
  const Schedule sch = make_schedule(0.0, config.t_end, strong_dt(solver, s, opt));
  run.dt = sch.dt;
  run.samples.push_back(s);
  for (int n = 1; n <= sch.steps; ++n) {
    s = solver.step(s, sch.dt);
    if (is_sample(n, sch.steps, opt.sample_every)) run.samples.push_back(s);
  }
  return run;
}

GapReport compare_runs(const SimConfig& config, double delta, const StrongRun& strong,
                       const WeakStrongOptions& opt) {
  FluidSolver solver(config);
  const AnnulusGrid& g = solver.grid();
  GridField extra = seeded_perturbation(g, config.seed + 1);
  for (double& v : extra.raw()) v *= delta;
  SimState s = solver.initialize(&extra);
  const Schedule sch = make_schedule(0.0, config.t_end, strong.dt > 0.0 ? strong.dt : config.t_end);
  const double R = config.r_inner;
  const double area = kPi * R * R, polar = 0.5 * kPi * R * R * R * R;

  GapReport rep;
  rep.delta = delta;
  double int_a = 0.0, int_w = 0.0, cum = 0.0;
  std::size_t m = 0;
  auto sample = [&](const SimState& s1) {
    if (m >= strong.samples.size()) throw InvalidInput("strong run has too few samples");
    const SimState& s2 = strong.samples[m++];
    const TransformedStrong ts =
        transform_strong_solution(s2.flow.U, s2.flow.P, s1.rigid, s2.rigid, *s1.atlas, *s2.atlas);
    double gf = 0.0, l4 = 0.0;
    for (int i = 0; i <= g.n_r(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        const Vec2 d = s1.flow.U.vec(i, j) - s2.flow.U.vec(i, j);
        gf += g.weight(i, j) * d.dot(s1.atlas->metric_lo(i, j) * d);
        l4 += g.weight(i, j) * std::pow(ts.U.vec(i, j).squaredNorm(), 2);
      }
    const double da = (to_vec2(s1.rigid.a) - ts.A2).norm();
    const double dw = std::abs(s1.rigid.omega(0) - ts.Omega2);
    const double gap2 = gf + area * da * da + polar * dw * dw;
    const double n4 = std::pow(l4, 0.25);
    const double w2 = 1.0 + n4 * n4 + std::pow(n4, 8);
    const double w4 = 1.0 + std::pow(n4, 4) + std::pow(n4, 8);
    const double t = s1.flow.t;
    if (!rep.times.empty()) {
      const double h = t - rep.times.back();
      cum += 0.5 * h * (rep.integrand.back() + gap2 * w2);
      const double da0 = rep.gap_a.back(), dw0 = rep.gap_omega.back();
      int_a += 0.5 * h * (da0 * da0 + da * da);
      int_w += 0.5 * h * (dw0 * dw0 + dw * dw);
    }
    rep.times.push_back(t);
    rep.gap_L2.push_back(std::sqrt(gap2));
    rep.gap_a.push_back(da);
    rep.gap_omega.push_back(dw);
    rep.integrand.push_back(gap2 * w2);
    rep.integrand4.push_back(gap2 * w4);
    rep.cumulative.push_back(cum);
    rep.bound.push_back(std::sqrt(int_a) + std::sqrt(int_w));
    if (opt.residual) {
      const ResidualSample r = residual_estimate_check(s1, s2, solver);
      double acc = 0.0;
      if (!rep.residual_norm.empty()) {
        const double h = t - rep.times[rep.times.size() - 2];
        const double prev = rep.residual_time.back();
        acc = prev * prev + 0.5 * h * (rep.residual_norm.back() * rep.residual_norm.back() + r.residual * r.residual);
      }
      rep.residual_norm.push_back(r.residual);
      rep.residual_time.push_back(std::sqrt(acc));
      rep.map_deviation.push_back(r.map_deviation);
    }
  };
  sample(s);
  for (int n = 1; n <= sch.steps; ++n) {
    s = solver.step(s, sch.dt);
    if (is_sample(n, sch.steps, opt.sample_every)) sample(s);
  }

  const double g0 = rep.gap_L2.front() * rep.gap_L2.front();
  bool have = false;
  for (std::size_t k = 1; k < rep.times.size(); ++k) {
    if (!(rep.cumulative[k] > 0.0)) continue;
    const double c = (rep.gap_L2[k] * rep.gap_L2[k] - g0) / rep.cumulative[k];
    rep.fitted_C = have ? std::max(rep.fitted_C, c) : c;
    have = true;
  }
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    const double lhs = rep.gap_L2[k] * rep.gap_L2[k];
    const double rhs = g0 + rep.fitted_C * rep.cumulative[k];
    if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) rep.inequality_holds = false;
  }
  for (std::size_t k = 0; k < rep.residual_norm.size(); ++k) {
    if (!(rep.bound[k] > 0.0)) continue;
    rep.residual_ratio = std::max(rep.residual_ratio, rep.residual_time[k] / rep.bound[k]);
    rep.map_ratio = std::max(rep.map_ratio, rep.map_deviation[k] / rep.bound[k]);
  }
  return rep;
}

GapReport weak_strong_experiment(const SimConfig& config, double delta, const WeakStrongOptions& opt) {
  const StrongRun strong = strong_run(config, opt);
  return compare_runs(config, delta, strong, opt);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("loglog_slope needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace slipfsi
