#include "slipfsi/kinematics.hpp"

#include <cmath>
#include <string>

#include "slipfsi/errors.hpp"

namespace slipfsi {

namespace {

int dim_from_angular(const VecX& omega) {
  if (omega.size() == 1) return 2;
  if (omega.size() == 3) return 3;
  throw UnsupportedDimension("angular velocity of size " + std::to_string(omega.size()) +
                             " does not correspond to N = 2 or N = 3");
}

void require_rotation(const MatX& Q) {
  if (!is_rotation(Q)) throw InvalidInput("matrix is not a proper rotation");
}

}  // namespace

RigidState RigidState::at_rest(const VecX& q0) {
  const int N = static_cast<int>(q0.size());
  if (N != 2 && N != 3) throw UnsupportedDimension("rigid state must have N = 2 or N = 3");
  RigidState s;
  s.q = q0;
  s.Q = MatX::Identity(N, N);
  s.a = VecX::Zero(N);
  s.omega = VecX::Zero(angular_size(N));
  return s;
}

RigidState RigidState::planar(double qx, double qy, double ax, double ay, double omega) {
  RigidState s = at_rest(Eigen::Vector2d(qx, qy));
  s.a = Eigen::Vector2d(ax, ay);
  s.omega(0) = omega;
  return s;
}

double RigidState::angle() const {
  if (dim() != 2) throw UnsupportedDimension("angle() is defined for planar states only");
  return std::atan2(Q(1, 0), Q(0, 0));
}

int angular_size(int N) {
  if (N == 2) return 1;
  if (N == 3) return 3;
  throw UnsupportedDimension("dimension " + std::to_string(N) + " is not supported");
}

MatX hat(const VecX& omega) {
  const int N = dim_from_angular(omega);
  MatX P = MatX::Zero(N, N);
  if (N == 2) {
    P(0, 1) = -omega(0);
    P(1, 0) = omega(0);
  } else {
    P(0, 1) = -omega(2);
    P(0, 2) = omega(1);
    P(1, 0) = omega(2);
    P(1, 2) = -omega(0);
    P(2, 0) = -omega(1);
    P(2, 1) = omega(0);
  }
  return P;
}

VecX vee(const MatX& P, double tol) {
  if (P.rows() != P.cols() || (P.rows() != 2 && P.rows() != 3))
    throw UnsupportedDimension("vee expects a 2x2 or 3x3 matrix");
  if ((P + P.transpose()).norm() > tol) throw InvalidInput("matrix is not skew-symmetric");
  // Average the two mirrored entries so hat(vee(P)) is the skew part of P.
  if (P.rows() == 2) {
    VecX w(1);
    w(0) = 0.5 * (P(1, 0) - P(0, 1));
    return w;
  }
  VecX w(3);
  w(0) = 0.5 * (P(2, 1) - P(1, 2));
  w(1) = 0.5 * (P(0, 2) - P(2, 0));
  w(2) = 0.5 * (P(1, 0) - P(0, 1));
  return w;
}

Eigen::Matrix2d rotation2(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  return R;
}

Eigen::Matrix3d rotation3(const Eigen::Vector3d& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(theta, axis_angle / theta).toRotationMatrix();
}

VecX rigid_velocity(const RigidState& state, const VecX& x) {
  return state.a + hat(state.omega) * (x - state.q);
}

MatX project_to_rotation(const MatX& M) {
  Eigen::JacobiSVD<MatX> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MatX U = svd.matrixU();
  const MatX V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(U.cols() - 1) *= -1.0;
  return U * V.transpose();
}

bool is_rotation(const MatX& Q, double tol) {
  if (Q.rows() != Q.cols()) return false;
  const MatX I = MatX::Identity(Q.rows(), Q.cols());
  return (Q * Q.transpose() - I).norm() <= tol && Q.determinant() > 0.0;
}

RigidState step_rigid(const RigidState& state, const VecX& a, const VecX& omega, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("step_rigid requires dt > 0");
  RigidState next = state;
  next.t = state.t + dt;
  next.q = state.q + dt * a;
  next.a = a;
  next.omega = omega;
  const MatX P = hat(omega);
  if (state.dim() == 2) {
    // Planar rotations commute, so the constant-rate flow is exact.
    next.Q = rotation2(dt * omega(0)) * state.Q;
  } else {
    const MatX step = MatX::Identity(3, 3) + dt * P + 0.5 * dt * dt * P * P;
    next.Q = project_to_rotation(step * state.Q);
  }
  return next;
}

InertiaTensor body_inertia(double radius, double mass, int N) {
  if (!(radius > 0.0) || !(mass > 0.0)) throw InvalidInput("radius and mass must be positive");
  InertiaTensor I;
  I.mass = mass;
  if (N == 2) {
    I.J = MatX::Constant(1, 1, 0.5 * mass * radius * radius);
  } else if (N == 3) {
    I.J = 0.4 * mass * radius * radius * MatX::Identity(3, 3);
  } else {
    throw UnsupportedDimension("only disk (N=2) and ball (N=3) bodies are supported");
  }
  return I;
}

InertiaTensor transform_inertia(const InertiaTensor& J2, const MatX& Q) {
  require_rotation(Q);
  InertiaTensor J1 = J2;
  if (J2.dim() == 2) return J1;  // scalar moment is invariant under planar rotation
  if (Q.rows() != 3) throw InvalidInput("rotation and inertia tensor dimensions differ");
  J1.J = Q.transpose() * J2.J * Q;
  J1.J = 0.5 * (J1.J + J1.J.transpose()).eval();
  return J1;
}

VecX relative_angular_velocity(const MatX& Q1, const MatX& P1, const MatX& Q2, const MatX& P2) {
  require_rotation(Q1);
  require_rotation(Q2);
  const MatX Q = Q2 * Q1.transpose();
  const MatX P_Omega2 = Q.transpose() * P2 * Q;
  return vee(P_Omega2 - P1);
}

}  // namespace slipfsi
