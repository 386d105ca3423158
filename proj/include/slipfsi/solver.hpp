#pragma once

// Transformed Navier-Stokes on the fixed reference annulus: Navier slip on the
// body, no-slip on the container, Heun (RK2) stepping with an exact discrete
// projection that treats the body translation as an unknown.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "slipfsi/config.hpp"
#include "slipfsi/kinematics.hpp"
#include "slipfsi/transform.hpp"

namespace slipfsi {

struct FlowState {
  GridField U;  // reference-frame velocity U = J_Y u o X
  GridField P;  // pressure, zero mean
  double t = 0.0;
  std::uint64_t atlas_ref = 0;
};

/// The state triple advanced by the solver.
struct SimState {
  FlowState flow;
  RigidState rigid;
  std::shared_ptr<const TransformAtlas> atlas;
};

/// Body-force contribution in reference coordinates, added to the momentum
/// right-hand side (used by manufactured-solution tests).
using Forcing = std::function<Vec2(double t, const Vec2& y)>;

struct BoundaryValues {
  Vec2 A = Vec2::Zero();  // body translation in the reference frame, Q_map^T a
  double omega = 0.0;
};

/// Sets inner-boundary nodes from the slip law and outer nodes to zero, then
/// fills ghosts. Normal part: U.N = U_s.N. Tangential part: discrete
/// mu (2 D(U) n).tau = beta (U_s - U).tau with one-sided radial differences.
void apply_slip_bc(GridField& U, const AnnulusGrid& grid, const BoundaryValues& body, double mu,
                   double beta, SlipKind kind);

struct SlipResiduals {
  double normal = 0.0;      // max |(U - U_s).N|
  double tangential = 0.0;  // max |mu (2 D(U) n).tau - beta (U_s - U).tau|
};
SlipResiduals slip_residuals(const GridField& U, const AnnulusGrid& grid, const BoundaryValues& body,
                             double mu, double beta, SlipKind kind);

/// Max |div_y U| over interior rows (reference divergence; the map preserves volume).
double max_divergence(const GridField& U, const AnnulusGrid& grid);

struct ProjectionResult {
  GridField P;  // lambda / dt_eff, boundary rows extrapolated, zero mean
  int iterations = 0;
  double residual = 0.0;  // max divergence after projection
};

/// Energy-orthogonal projection onto discretely divergence-free fields:
/// minimizes sum W (V - V*)^T g (V - V*) + |A - A*|^2 subject to div_y U = 0
/// at interior rows. The body translation A participates when free.
class Projector {
 public:
  Projector(const AnnulusGrid& grid, bool body_free, double tol, int max_iter);

  /// Projects U (interior nodes) and A in place; boundary nodes are not
  /// modified except through A.
  ProjectionResult project(GridField& U, Vec2& A, const TransformAtlas& atlas, double dt_eff) const;

  /// Solves div(G p) = rhs at interior rows with the same discrete operator.
  GridField solve_pressure(const GridField& rhs, const TransformAtlas& atlas) const;

  bool body_free() const { return body_free_; }
  int rows() const { return n_rows_; }

 private:
  using SpMat = Eigen::SparseMatrix<double>;
  SpMat build_schur(const TransformAtlas& atlas, SpMat* minv_ct) const;
  Eigen::VectorXd pcg(const SpMat& S, const Eigen::VectorXd& b, int& iterations, double& res,
                      double tol) const;
  GridField pressure_field(const Eigen::VectorXd& lambda, double scale, double t) const;

  AnnulusGrid grid_;
  bool body_free_;
  double tol_;
  int max_iter_;
  int n_rows_ = 0, n_unknowns_ = 0;
  SpMat C_;  // W-weighted divergence rows
  Eigen::VectorXd row_weight_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> precond_;
};

/// Fluid traction T n at the inner-boundary nodes, n = -e_r pointing into the
/// body, physical frame (rotated by Q_map). Pressure omitted when P is null.
std::vector<Vec2> traction(const GridField& U, const GridField* P, const AnnulusGrid& grid,
                           const BoundaryValues& bv, double mu, const Mat2& Q_map);

/// Free-function form: flat or curved atlas, pinned body.
GridField pressure_solve(const GridField& rhs, const TransformAtlas& atlas, double tol);

struct StepInfo {
  double dt = 0.0;
  double divergence = 0.0;
  double normal_residual = 0.0;
  int iterations = 0;
};

class FluidSolver {
 public:
  explicit FluidSolver(SimConfig config);

  const SimConfig& config() const { return config_; }
  const AnnulusGrid& grid() const { return grid_; }
  Geometry geometry() const { return Geometry{config_.r_inner, config_.r_outer}; }
  double inertia() const { return inertia_; }

  /// Initial triple from the config; extra reference-frame velocity (already
  /// sampled at nodes) may be added before projection.
  SimState initialize(const GridField* extra = nullptr) const;

  /// Largest dt allowed by the stability limits at this state.
  double stable_dt(const SimState& s) const;
  /// dt used when config.dt == 0: cfl times the stability limit.
  double auto_dt(const SimState& s) const;

  /// One Heun step. Throws CflViolation, ProximityError, SolverError.
  SimState step(const SimState& s, double dt, StepInfo* info = nullptr) const;

  /// Momentum right-hand side -N(U) - M U + mu L U (+ forcing) at all nodes.
  GridField momentum_rhs(const GridField& U, const TransformAtlas& atlas, double t) const;

  /// Viscous force and torque on the body from the fluid (physical frame),
  /// pressure excluded (it acts through the projection).
  void viscous_load(const GridField& U, const BoundaryValues& bv, const TransformAtlas& atlas,
                    Vec2& force, double& torque) const;

  BoundaryValues boundary_values(const RigidState& r, const TransformAtlas& atlas) const;
  ExtensionField extension(const RigidState& r) const;

  void set_forcing(Forcing f) { forcing_ = std::move(f); }

 private:
  struct Stage {
    GridField U;
    Vec2 a;
    double omega;
  };

  Stage advance_stage(const GridField& U, const Vec2& a, double omega, const TransformAtlas& atlas,
                      double t, double dt) const;
  ProjectionResult finish_stage(GridField& U, Vec2& a, double omega, const TransformAtlas& atlas,
                                double dt_eff) const;

  SimConfig config_;
  AnnulusGrid grid_;
  double inertia_;
  std::shared_ptr<Projector> projector_;
  Forcing forcing_;
};

/// Fixed-step schedule covering [t, t_end]: n = ceil((t_end - t) / dt_max)
/// steps of equal size. Returns 0 steps when t_end <= t.
struct Schedule {
  int steps = 0;
  double dt = 0.0;
};
Schedule make_schedule(double t, double t_end, double dt_max);

/// Divergence-free perturbation from a seeded sum of compactly supported
/// bumps in the fluid region, unit max amplitude, reference frame.
GridField seeded_perturbation(const AnnulusGrid& grid, std::uint64_t seed);

/// Built-in initial velocity profiles, reference frame, unprojected.
GridField initial_velocity(const SimConfig& config, const AnnulusGrid& grid);

/// Flow map carrying the centered reference annulus to the domain with the
/// body at q0, generated by the extension field of a straight translation.
TransformAtlas initial_atlas(const SimConfig& config, const AnnulusGrid& grid);

}  // namespace slipfsi
