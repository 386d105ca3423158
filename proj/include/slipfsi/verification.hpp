#pragma once

// Numerical checks of the energy inequality, the Reynolds transport identity,
// the transformed-residual estimate and the weak-strong gap mechanism.

#include <functional>
#include <vector>

#include "slipfsi/solver.hpp"

namespace slipfsi {

// ---------------------------------------------------------------------------
// Energy

struct EnergyRates {
  double E = 0.0;           // fluid + body (mass 1) kinetic energy
  double E_extended = 0.0;  // fluid + density-1 rigid extension over the body
  double visc = 0.0;        // 2 mu int |D u|^2
  double slip = 0.0;        // beta oint |u - u_s|^2
};

EnergyRates energy_rates(const SimState& s, const FluidSolver& solver);

struct EnergyLedger {
  double t = 0.0;
  double E_total = 0.0;
  double E_extended = 0.0;
  double D_visc = 0.0;
  double D_slip = 0.0;
  double E0 = 0.0;
  double defect = 0.0;  // E + D_visc + D_slip - E0
  double last_visc_rate = 0.0;
  double last_slip_rate = 0.0;
};

EnergyLedger energy_start(const SimState& s, const FluidSolver& solver);
/// Trapezoidal accumulation of the dissipation rates over the step ending at s.
EnergyLedger energy_update(const SimState& s, const FluidSolver& solver, const EnergyLedger& prev,
                           double dt);

struct EnergyStudy {
  double E0 = 0.0;
  double max_defect = 0.0;      // max_t Delta(t)
  double max_abs_defect = 0.0;  // max_t |Delta(t)|
  std::vector<EnergyLedger> history;
};

/// Runs the configuration to t_end and records the ledger every step.
EnergyStudy energy_study(const SimConfig& config);

// ---------------------------------------------------------------------------
// Reynolds transport

using ScalarSpec = std::function<double(double t, const Vec2& x)>;
using VelocitySpec = std::function<Vec2(double t, const Vec2& x)>;

struct ReynoldsOptions {
  Vec2 center = Vec2(0.5, 0.2);
  double radius = 0.3;
  double T = 1.0;
  int n_radial = 16;  // quadrature cells; angular cells = 4 n_radial
  int n_steps = 32;   // time steps over [0, T]
};

struct ReynoldsResult {
  double max_defect = 0.0;
  double max_volume_defect = 0.0;  // |vol(t) - vol(0)|
};

/// Advects the disk by v, differentiates int_{V(t)} f in time by central
/// differences and compares with int_{V(t)} (d_t f + v . grad f).
ReynoldsResult reynolds_check(const ScalarSpec& f, const VelocitySpec& v, const ReynoldsOptions& opt);

// ---------------------------------------------------------------------------
// Weak-strong

struct GapReport {
  double delta = 0.0;
  std::vector<double> times;
  std::vector<double> gap_L2;
  std::vector<double> gap_a;
  std::vector<double> gap_omega;
  std::vector<double> integrand;    // |gap|^2 (1 + |U2|_4^2 + |U2|_4^8)
  std::vector<double> integrand4;   // |gap|^2 (1 + |U2|_4^4 + |U2|_4^8)
  std::vector<double> cumulative;   // int_0^t integrand
  double fitted_C = 0.0;            // min C with gap^2(t) <= gap^2(0) + C int_0^t integrand
  std::vector<double> residual_norm;  // transformed-residual L2 norm at t
  std::vector<double> residual_time;  // its L2(0,t) norm
  std::vector<double> bound;          // |a1 - A2|_L2(0,t) + |w1 - W2|_L2(0,t)
  std::vector<double> map_deviation;  // |X~2 - id|_{W^{1,inf}}
  double residual_ratio = 0.0;        // max_t residual_time / bound
  double map_ratio = 0.0;             // max_t map_deviation / bound
  bool inequality_holds = true;
};

struct WeakStrongOptions {
  int sample_every = 4;
  bool residual = true;
  double dt = 0.0;  // 0: cfl times the stability limit of the unperturbed start
};

/// Snapshots of the unperturbed (strong) run, reused across a sweep.
struct StrongRun {
  double dt = 0.0;
  std::vector<SimState> samples;
};

StrongRun strong_run(const SimConfig& config, const WeakStrongOptions& opt);
GapReport compare_runs(const SimConfig& config, double delta, const StrongRun& strong,
                       const WeakStrongOptions& opt);
/// Run 2 with the config's initial data, run 1 with delta times the seeded
/// perturbation added.
GapReport weak_strong_experiment(const SimConfig& config, double delta,
                                 const WeakStrongOptions& opt = {});

struct ResidualSample {
  double residual = 0.0;
  double map_deviation = 0.0;
};

/// Transformed-residual and map-deviation at one time for a pair of states.
ResidualSample residual_estimate_check(const SimState& weak, const SimState& strong,
                                       const FluidSolver& solver);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace slipfsi
