#pragma once

// Rigid-body configuration and velocity in N = 2 or N = 3 dimensions.
//
// Angular velocity is stored as a vector of length 1 (planar, the scalar
// rotation rate about the out-of-plane axis) or length 3 (spatial). The
// dimension of every operation is read off the sizes of its arguments.

#include <Eigen/Dense>

namespace slipfsi {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct RigidState {
  double t = 0.0;
  VecX q;      // mass center
  MatX Q;      // orientation, Q in SO(N)
  VecX a;      // translational velocity
  VecX omega;  // angular velocity: size 1 (N=2) or 3 (N=3)

  int dim() const { return static_cast<int>(q.size()); }

  /// Body at rest at q0 with Q = I.
  static RigidState at_rest(const VecX& q0);
  static RigidState planar(double qx, double qy, double ax = 0.0, double ay = 0.0,
                           double omega = 0.0);

  /// Planar orientation angle extracted from Q (N=2 only).
  double angle() const;
};

struct InertiaTensor {
  MatX J;  // 1x1 for N=2, 3x3 for N=3
  double mass = 1.0;

  int dim() const { return J.rows() == 1 ? 2 : 3; }
  double planar() const { return J(0, 0); }
};

/// Angular velocity -> skew matrix with hat(w) x = w cross x.
MatX hat(const VecX& omega);

/// Skew matrix -> angular velocity. Throws InvalidInput if |P + P^T| > tol.
VecX vee(const MatX& P, double tol = 1e-8);

/// Angular-velocity dimension for a spatial dimension N (1 or 3).
int angular_size(int N);

Eigen::Matrix2d rotation2(double angle);
Eigen::Matrix3d rotation3(const Eigen::Vector3d& axis_angle);

/// u_s(x) = a + hat(omega) (x - q).
VecX rigid_velocity(const RigidState& state, const VecX& x);

/// One step of dq/dt = a, dQ/dt = hat(omega) Q with constant (a, omega),
/// followed by polar re-projection of Q onto SO(N).
RigidState step_rigid(const RigidState& state, const VecX& a, const VecX& omega, double dt);

/// Nearest rotation to M in the Frobenius norm.
MatX project_to_rotation(const MatX& M);

/// True when |Q Q^T - I|_F <= tol and det Q > 0.
bool is_rotation(const MatX& Q, double tol = 1e-8);

/// Inertia of a uniform disk (N=2) or ball (N=3) about its center.
InertiaTensor body_inertia(double radius, double mass, int N);

/// J1 = Q^T J2 Q.
InertiaTensor transform_inertia(const InertiaTensor& J2, const MatX& Q);

/// omega_tilde with hat(omega_tilde) = Q^T Q' for Q = Q2 Q1^T, evaluated
/// through Q^T P2 Q - P1.
VecX relative_angular_velocity(const MatX& Q1, const MatX& P1, const MatX& Q2, const MatX& P2);

}  // namespace slipfsi
