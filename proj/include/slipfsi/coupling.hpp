#pragma once

// Newton-Euler stepping of the rigid body from fluid traction, in physical
// form and in the transformed (relative-frame) form.

#include <vector>

#include "slipfsi/grid.hpp"
#include "slipfsi/kinematics.hpp"

namespace slipfsi {

struct BodyForce {
  VecX F;       // net force, length N
  VecX torque;  // size 1 (N=2) or 3 (N=3)
};

/// F = -sum w_k Tn(x_k), torque = -sum w_k (x_k - q) x Tn(x_k), with n the
/// normal pointing into the body. `traction` is indexed like `quad`.
BodyForce surface_force(const std::vector<Vec2>& traction, const std::vector<BoundaryPoint>& quad,
                        const Vec2& q);

/// Mass-1 Newton-Euler step: velocities from the force, positions with the
/// step-averaged velocities. In 3D, J is the body-frame inertia and the
/// spatial angular momentum Q J Q^T omega is advanced.
RigidState step_newton_euler(const RigidState& rigid, const BodyForce& force, const InertiaTensor& J,
                             double dt);

struct TransformedBody {
  VecX A2;
  VecX Omega2;
};

/// Heun step of A2' = -w~ x A2 + F, (J1 Omega2)' = -w~ x (J1 Omega2) + torque,
/// with w~ and the load interpolated linearly between the two step ends.
TransformedBody step_transformed_newton_euler(const VecX& A2, const VecX& Omega2,
                                              const VecX& omega_tilde0, const VecX& omega_tilde1,
                                              const BodyForce& force0, const BodyForce& force1,
                                              const InertiaTensor& J1, double dt);
/// Frozen w~ and load over the step.
TransformedBody step_transformed_newton_euler(const VecX& A2, const VecX& Omega2,
                                              const VecX& omega_tilde, const BodyForce& force,
                                              const InertiaTensor& J1, double dt);

}  // namespace slipfsi
