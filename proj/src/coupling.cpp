#include "slipfsi/coupling.hpp"

#include "slipfsi/errors.hpp"

namespace slipfsi {

BodyForce surface_force(const std::vector<Vec2>& traction, const std::vector<BoundaryPoint>& quad,
                        const Vec2& q) {
  if (traction.size() != quad.size()) throw ShapeMismatch("traction and quadrature sizes differ");
  Vec2 F = Vec2::Zero();
  double tau = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const Vec2 arm = quad[k].x - q;
    F -= quad[k].weight * traction[k];
    tau -= quad[k].weight * (arm.x() * traction[k].y() - arm.y() * traction[k].x());
  }
  BodyForce out;
  out.F = F;
  out.torque = VecX::Constant(1, tau);
  return out;
}

namespace {

// w x v for w of size 1 (planar, v in the plane) or 3.
VecX cross(const VecX& w, const VecX& v) { return hat(w) * v; }

void check_sizes(const VecX& a, const VecX& w, const BodyForce& f) {
  const int n = static_cast<int>(a.size());
  if (n != 2 && n != 3) throw UnsupportedDimension("body dimension must be 2 or 3");
  if (w.size() != angular_size(n) || f.F.size() != n || f.torque.size() != angular_size(n))
    throw ShapeMismatch("body force / velocity sizes inconsistent");
}

}  // namespace

RigidState step_newton_euler(const RigidState& rigid, const BodyForce& force, const InertiaTensor& J,
                             double dt) {
  check_sizes(rigid.a, rigid.omega, force);
  const VecX a_new = rigid.a + dt * force.F;
  if (rigid.dim() == 2) {
    const VecX w_new = rigid.omega + dt * force.torque / J.planar();
    RigidState out = step_rigid(rigid, 0.5 * (rigid.a + a_new), 0.5 * (rigid.omega + w_new), dt);
    out.a = a_new;
    out.omega = w_new;
    return out;
  }
  auto spatial = [&J](const MatX& Q) -> MatX { return Q * J.J * Q.transpose(); };
  const VecX L = spatial(rigid.Q) * rigid.omega + dt * force.torque;
  const RigidState pred = step_rigid(rigid, rigid.a, rigid.omega, dt);
  const VecX w_pred = spatial(pred.Q).ldlt().solve(L);
  RigidState out = step_rigid(rigid, 0.5 * (rigid.a + a_new), 0.5 * (rigid.omega + w_pred), dt);
  out.a = a_new;
  out.omega = spatial(out.Q).ldlt().solve(L);
  return out;
}

TransformedBody step_transformed_newton_euler(const VecX& A2, const VecX& Omega2,
                                              const VecX& omega_tilde0, const VecX& omega_tilde1,
                                              const BodyForce& force0, const BodyForce& force1,
                                              const InertiaTensor& J1, double dt) {
  check_sizes(A2, Omega2, force0);
  check_sizes(A2, Omega2, force1);
  const bool planar = A2.size() == 2;
  auto rhs = [&](const VecX& A, const VecX& L, const VecX& wt, const BodyForce& f, VecX& dA, VecX& dL) {
    dA = -cross(wt, A) + f.F;
    dL = planar ? VecX(f.torque) : VecX(-cross(wt, L) + f.torque);
  };
  const VecX L0 = J1.J * Omega2;
  VecX dA0, dL0, dA1, dL1;
  rhs(A2, L0, omega_tilde0, force0, dA0, dL0);
  const VecX A_p = A2 + dt * dA0, L_p = L0 + dt * dL0;
  rhs(A_p, L_p, omega_tilde1, force1, dA1, dL1);
  TransformedBody out;
  out.A2 = A2 + 0.5 * dt * (dA0 + dA1);
  const VecX L1 = L0 + 0.5 * dt * (dL0 + dL1);
  out.Omega2 = J1.J.ldlt().solve(L1);
  return out;
}

TransformedBody step_transformed_newton_euler(const VecX& A2, const VecX& Omega2,
                                              const VecX& omega_tilde, const BodyForce& force,
                                              const InertiaTensor& J1, double dt) {
  return step_transformed_newton_euler(A2, Omega2, omega_tilde, omega_tilde, force, force, J1, dt);
}

}  // namespace slipfsi
