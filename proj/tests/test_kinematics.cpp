#include <cmath>

#include "doctest.h"
#include "slipfsi/errors.hpp"
#include "slipfsi/kinematics.hpp"

using namespace slipfsi;

TEST_CASE("hat and vee are inverse in 2D and 3D") {
  VecX w2(1);
  w2 << 0.7;
  MatX P = hat(w2);
  CHECK(P(0, 1) == doctest::Approx(-0.7));
  CHECK(P(1, 0) == doctest::Approx(0.7));
  CHECK(vee(P)(0) == doctest::Approx(0.7));

  VecX w3(3);
  w3 << 1.0, -2.0, 0.5;
  MatX P3 = hat(w3);
  Eigen::Vector3d x(0.3, 0.1, -0.4);
  Eigen::Vector3d cross = Eigen::Vector3d(w3).cross(x);
  CHECK((P3 * x - cross).norm() < 1e-14);
  CHECK((vee(P3) - w3).norm() < 1e-14);
}

TEST_CASE("hat rejects unsupported sizes, vee rejects non-skew") {
  CHECK_THROWS_AS(hat(VecX::Zero(2)), UnsupportedDimension);
  MatX M = MatX::Identity(2, 2);
  CHECK_THROWS_AS(vee(M), InvalidInput);
  CHECK(angular_size(2) == 1);
  CHECK(angular_size(3) == 3);
}

TEST_CASE("step_rigid is exact for planar rotation") {
  RigidState s = RigidState::planar(0.1, -0.2, 0.0, 0.0, 0.0);
  VecX a(2), w(1);
  a << 1.0, 2.0;
  w << 0.5;
  for (int n = 0; n < 100; ++n) s = step_rigid(s, a, w, 0.01);
  CHECK(s.q(0) == doctest::Approx(1.1));
  CHECK(s.q(1) == doctest::Approx(1.8));
  CHECK(s.angle() == doctest::Approx(0.5));
  CHECK(is_rotation(s.Q, 1e-13));
  CHECK(s.t == doctest::Approx(1.0));
  CHECK_THROWS_AS(step_rigid(s, a, w, 0.0), InvalidInput);
}

TEST_CASE("3D orientation stays in SO(3)") {
  RigidState s = RigidState::at_rest(VecX::Zero(3));
  VecX a = VecX::Zero(3), w(3);
  w << 0.0, 0.0, 1.0;
  for (int n = 0; n < 1000; ++n) s = step_rigid(s, a, w, 1e-3);
  CHECK(is_rotation(s.Q, 1e-10));
  Eigen::Matrix3d R = rotation3(Eigen::Vector3d(0, 0, 1.0));
  CHECK((s.Q - R).norm() < 1e-5);
}

TEST_CASE("inertia of disk and ball") {
  InertiaTensor J2 = body_inertia(0.5, 1.0, 2);
  CHECK(J2.planar() == doctest::Approx(0.125));
  InertiaTensor J3 = body_inertia(1.0, 2.0, 3);
  CHECK(J3.J(1, 1) == doctest::Approx(0.8));
  MatX Q = rotation3(Eigen::Vector3d(0.2, -0.1, 0.3));
  InertiaTensor Jt = transform_inertia(J3, Q);
  CHECK((Jt.J - J3.J).norm() < 1e-13);
}

TEST_CASE("relative angular velocity in 2D is the difference") {
  MatX Q1 = rotation2(0.3), Q2 = rotation2(-1.1);
  VecX w1(1), w2(1);
  w1 << 0.4;
  w2 << -0.9;
  VecX r = relative_angular_velocity(Q1, hat(w1), Q2, hat(w2));
  CHECK(r(0) == doctest::Approx(-1.3));
}

TEST_CASE("rigid velocity") {
  RigidState s = RigidState::planar(1.0, 0.0, 0.5, 0.0, 2.0);
  VecX x(2);
  x << 1.0, 1.0;
  VecX u = rigid_velocity(s, x);
  CHECK(u(0) == doctest::Approx(-1.5));
  CHECK(u(1) == doctest::Approx(0.0));
}
