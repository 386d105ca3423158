#pragma once

// Change of variables between the fixed reference annulus and the moving
// fluid domain: the solenoidal extension field, its flow map X and inverse Y,
// metric tensors, Christoffel symbols and the transformed operators.
//
// Index conventions (all 2D):
//   X_jac  component 2k+i  = X_{k,i} = dX_k / dy_i
//   Y_jac  component 2i+k  = Y_{i,k} = dY_i / dx_k
//   symmetric pairs (a,b) are stored at a+b: 0 -> 11, 1 -> 12, 2 -> 22
//   X_hess component 3l+(i+j)     = X_{l,ij}
//   christoffel component 3k+(i+j) = Gamma^k_ij
//   Xdot_jac component 2k+j = d Xdot_k / dy_j

#include <cstdint>
#include <functional>
#include <memory>

#include "slipfsi/grid.hpp"
#include "slipfsi/kinematics.hpp"

namespace slipfsi {

struct TransformAtlas;

/// Derivatives with respect to a Cartesian coordinate system whose points are
/// sampled at the annulus nodes.
class Coordinates {
 public:
  virtual ~Coordinates() = default;
  virtual const AnnulusGrid& grid() const = 0;
  virtual Vec2 grad(const GridField& f, int c, int i, int j) const = 0;
  virtual Hess2 hess(const GridField& f, int c, int i, int j) const = 0;
};

/// The reference coordinates y themselves.
class ReferenceCoordinates final : public Coordinates {
 public:
  explicit ReferenceCoordinates(AnnulusGrid grid) : grid_(std::move(grid)) {}
  const AnnulusGrid& grid() const override { return grid_; }
  Vec2 grad(const GridField& f, int c, int i, int j) const override {
    return gradient_at(grid_, f, c, i, j);
  }
  Hess2 hess(const GridField& f, int c, int i, int j) const override {
    return hessian_at(grid_, f, c, i, j);
  }

 private:
  AnnulusGrid grid_;
};

/// Physical coordinates x = X(y) of an atlas, differentiated by the chain
/// rule: grad_x = Y^T grad_y, Hess_x = Y^T (Hess_y - Gamma^i d_i f) Y.
class MappedCoordinates final : public Coordinates {
 public:
  explicit MappedCoordinates(std::shared_ptr<const TransformAtlas> base);
  const AnnulusGrid& grid() const override;
  Vec2 grad(const GridField& f, int c, int i, int j) const override;
  Hess2 hess(const GridField& f, int c, int i, int j) const override;

 private:
  std::shared_ptr<const TransformAtlas> base_;
};

struct TransformAtlas {
  double t = 0.0;
  std::uint64_t id = 0;
  std::shared_ptr<const Coordinates> coords;

  GridField X, X_jac, Y_jac, X_hess, g_lo, g_up, christoffel;
  GridField Xdot, Xdot_jac, Ydot;
  bool has_time_derivatives = false;

  // Derived quantities for the transformed Laplacian:
  //   div_gup  component k       = sum_j d_j g^{jk}
  //   g_gamma  component 4l+2i+j = sum_k g^{lk} Gamma^i_{jk}
  //   zeroth   component 2i+j    = sum_kl d_k(g^{kl} Gamma^i_{jl})
  //                                + sum_klm g^{kl} Gamma^m_{jl} Gamma^i_{km}
  GridField div_gup, g_gamma, zeroth;

  // Pose of the rigid zone; forward-map interpolation works on the residual
  // X - (body_q + body_Q y), which vanishes identically for rigid atlases.
  Vec2 body_q = Vec2::Zero();
  Mat2 body_Q = Mat2::Identity();
  GridField X_residual;

  const AnnulusGrid& grid() const { return coords->grid(); }

  double gup(int a, int b, int i, int j) const { return g_up(a + b, i, j); }
  double glo(int a, int b, int i, int j) const { return g_lo(a + b, i, j); }
  double gamma(int k, int a, int b, int i, int j) const { return christoffel(3 * k + a + b, i, j); }
  Mat2 jacobian(int i, int j) const;          // X_{k,i}
  Mat2 inverse_jacobian(int i, int j) const;  // Y_{i,k}
  Mat2 metric_up(int i, int j) const;
  Mat2 metric_lo(int i, int j) const;

  /// Interpolated forward map y -> X(y).
  Vec2 map(const Vec2& y) const;
  Mat2 jacobian_at(const Vec2& y) const;
};

/// Computes Jacobians, Hessian, metrics, Christoffel symbols and the derived
/// Laplacian coefficients from atlas.X using atlas.coords.
void finalize_geometry(TransformAtlas& atlas);
/// Stores Xdot and derives Xdot_jac and Ydot = -Y_jac Xdot.
void set_map_velocity(TransformAtlas& atlas, const GridField& Xdot);

TransformAtlas flat_atlas(const AnnulusGrid& grid);
/// Rigid map y -> q + Q y with map velocity a + omega x (X - q).
TransformAtlas rigid_atlas(const AnnulusGrid& grid, const Vec2& q, const Mat2& Q,
                           const Vec2& a = Vec2::Zero(), double omega = 0.0, double t = 0.0);

struct Geometry {
  double r_inner = 0.5;
  double r_outer = 2.0;
};

/// Solenoidal field equal to the rigid velocity near the body and zero near
/// the container wall, built from the stream function chi(d) * psi_rigid.
class ExtensionField {
 public:
  ExtensionField(const RigidState& state, Geometry geometry, double delta0,
                 bool track_rotation = true);

  Vec2 operator()(double t, const Vec2& x) const;
  double cutoff(double t, const Vec2& x) const;
  double delta0() const { return delta0_; }
  bool track_rotation() const { return track_rotation_; }
  Geometry geometry() const { return geometry_; }
  const RigidState& body_state() const { return state_; }
  /// Distance between body and wall at time t under constant-velocity motion.
  double clearance(double t) const;

 private:
  Vec2 center(double t) const;

  RigidState state_;
  Geometry geometry_;
  double delta0_;
  bool track_rotation_;
};

/// Throws ProximityError when the body is within delta0 of the wall.
ExtensionField build_extension(const RigidState& state, Geometry geometry, double delta0,
                               bool track_rotation = true);

/// Heun step of dX/dt = Lambda(t, X) with Lambda evaluated from `now` at t and
/// from `next` at t + dt. Geometry and map velocity are recomputed.
TransformAtlas advance_flow_map(const TransformAtlas& atlas, const ExtensionField& now,
                                const ExtensionField& next, double dt);
/// Same with the body frozen at constant (a, omega) over the step.
TransformAtlas advance_flow_map(const TransformAtlas& atlas, const ExtensionField& field,
                                double dt);
/// Forward-Euler predictor X + dt Lambda(t, X); geometry only.
TransformAtlas predict_flow_map(const TransformAtlas& atlas, const ExtensionField& field,
                                double dt);
/// Sets Xdot = Lambda(atlas.t, X) and derives the time-derivative samples.
void assign_map_velocity(TransformAtlas& atlas, const ExtensionField& field);

/// Newton iteration for y with |X(y) - x| <= tol.
Vec2 invert_map(const TransformAtlas& atlas, const Vec2& x, double tol = 1e-12);

// Transformed operators, evaluated at every node. Inputs need filled ghosts.
GridField op_L(const GridField& u, const TransformAtlas& atlas);
GridField op_conv(const GridField& u, const TransformAtlas& atlas);
struct ConvectionSplit {
  GridField standard;  // u . grad u
  GridField extra;     // Gamma^i_jk u_j u_k
};
ConvectionSplit op_conv_split(const GridField& u, const TransformAtlas& atlas);
GridField op_M(const GridField& u, const TransformAtlas& atlas);
GridField op_G(const GridField& p, const TransformAtlas& atlas);

// Flat counterparts in the atlas' own coordinates.
GridField coord_laplacian(const GridField& u, const TransformAtlas& atlas);
GridField coord_gradient(const GridField& p, const TransformAtlas& atlas);

/// X~2(x1) = q2 + Q2 Q1^T (x1 - q1) in the rigid neighbourhood of body 1.
Vec2 compose_relative_map(const RigidState& state1, const RigidState& state2, const Vec2& x1);
/// X~1(x2) = q1 + Q1 Q2^T (x2 - q2).
Vec2 compose_relative_map_inverse(const RigidState& state1, const RigidState& state2,
                                  const Vec2& x2);
/// X~2 = X2 o Y1 through two atlases.
Vec2 compose_relative_map(const TransformAtlas& atlas1, const TransformAtlas& atlas2,
                          const Vec2& x1, double tol = 1e-12);

/// Relative map X~2 written as an atlas over the physical coordinates of
/// atlas1 (sampled at the same nodes).
TransformAtlas relative_atlas(std::shared_ptr<const TransformAtlas> atlas1,
                              const TransformAtlas& atlas2);

struct TransformedStrong {
  GridField U;  // physical velocity in frame 1 at the nodes x1 = X1(y)
  GridField P;
  Vec2 A2 = Vec2::Zero();
  double Omega2 = 0.0;
  Mat2 Q = Mat2::Identity();  // Q2 Q1^T
};

/// Strong solution of run 2 carried into the fluid domain of run 1, from the
/// reference-frame fields U2 = J_Y2 u2 o X2 and P2 of run 2.
TransformedStrong transform_strong_solution(const GridField& U2_ref, const GridField& P2_ref,
                                            const RigidState& state1, const RigidState& state2,
                                            const TransformAtlas& atlas1,
                                            const TransformAtlas& atlas2);

/// Pointwise form: u2 given as physical velocity samples at the nodes of
/// atlas2 (x2 = X2(y)); evaluates J_{X~1} u2(X~2(x1)) by inversion and
/// bilinear interpolation.
Vec2 transform_velocity_at(const GridField& u2_phys, const TransformAtlas& atlas1,
                           const TransformAtlas& atlas2, const Vec2& x1, double tol = 1e-12);

/// Transformed rigid velocity A2 + Omega2 x (x1 - q1).
Vec2 transformed_rigid_velocity(const RigidState& state1, const RigidState& state2,
                                const Vec2& x1);

struct TractionNormal {
  Vec2 n1;
  Vec2 traction1;
};
TractionNormal transform_traction_normal(const Vec2& n2, const Vec2& traction2, const Mat2& Q);

}  // namespace slipfsi
