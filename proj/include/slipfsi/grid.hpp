#pragma once

// Fixed reference annulus R_s <= r <= R_Omega with uniform polar nodes, the
// node-collocated field container and the Cartesian-component stencils.
//
// Node (i, j) sits at r_i = R_s + i*dr, theta_j = j*dtheta with
// i = 0..n_r and j = 0..n_theta-1 (periodic). Fields carry one ghost row on
// each radial side (i = -1 and i = n_r + 1).

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

namespace slipfsi {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class AnnulusGrid {
 public:
  AnnulusGrid(int n_r, int n_theta, double r_inner, double r_outer);

  int n_r() const { return n_r_; }          // radial cells
  int n_theta() const { return n_theta_; }  // angular cells (= nodes, periodic)
  int radial_nodes() const { return n_r_ + 1; }
  int node_count() const { return (n_r_ + 1) * n_theta_; }
  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }
  double dr() const { return dr_; }
  double dtheta() const { return dtheta_; }

  double r(int i) const { return r_inner_ + i * dr_; }
  double theta(int j) const { return j * dtheta_; }
  double cos_theta(int j) const { return cos_[wrap(j)]; }
  double sin_theta(int j) const { return sin_[wrap(j)]; }
  Vec2 node(int i, int j) const { return r(i) * Vec2(cos_theta(j), sin_theta(j)); }
  Vec2 radial_unit(int j) const { return Vec2(cos_theta(j), sin_theta(j)); }
  Vec2 angular_unit(int j) const { return Vec2(-sin_theta(j), cos_theta(j)); }

  int wrap(int j) const { return ((j % n_theta_) + n_theta_) % n_theta_; }
  int index(int i, int j) const { return i * n_theta_ + wrap(j); }

  /// Trapezoidal area weight of node (i, j); the sum is the exact annulus area.
  double weight(int i, int j) const;
  /// Arc-length weight of a boundary node.
  double arc_weight(int i) const { return r(i) * dtheta_; }

  /// Smallest effective spacing h with 1/h^2 = 1/dr^2 + 1/(R_s dtheta)^2.
  double effective_spacing() const;

  bool same_shape(const AnnulusGrid& other) const;

  // Scaled denominators that make the angular stencils exact on
  // span{1, cos, sin}: first difference over 2 sin(dtheta), second difference
  // over 2 (1 - cos(dtheta)).
  double theta_first_denominator() const { return first_den_; }
  double theta_second_denominator() const { return second_den_; }

 private:
  int n_r_, n_theta_;
  double r_inner_, r_outer_, dr_, dtheta_;
  double first_den_, second_den_;
  std::vector<double> cos_, sin_;
};

/// Node-collocated scalar or vector field with radial ghost rows.
class GridField {
 public:
  GridField() = default;
  GridField(const AnnulusGrid& grid, int ncomp, double t = 0.0);

  int ncomp() const { return ncomp_; }
  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  double t() const { return t_; }
  void set_time(double t) { t_ = t; }

  double& operator()(int c, int i, int j) { return data_[offset(c, i, j)]; }
  double operator()(int c, int i, int j) const { return data_[offset(c, i, j)]; }
  Vec2 vec(int i, int j) const { return Vec2((*this)(0, i, j), (*this)(1, i, j)); }
  void set_vec(int i, int j, const Vec2& v) {
    (*this)(0, i, j) = v.x();
    (*this)(1, i, j) = v.y();
  }

  bool ghosts_filled() const { return ghosts_filled_; }
  void mark_ghosts_stale() { ghosts_filled_ = false; }
  void mark_ghosts_filled() { ghosts_filled_ = true; }
  /// Cubic extrapolation from the four nearest rows on each side.
  void fill_ghosts_extrapolate();

  bool matches(const AnnulusGrid& grid) const {
    return n_r_ == grid.n_r() && n_theta_ == grid.n_theta();
  }
  bool all_finite() const;
  void set_zero();

  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

 private:
  std::size_t offset(int c, int i, int j) const {
    const int jw = ((j % n_theta_) + n_theta_) % n_theta_;
    return (static_cast<std::size_t>(c) * (n_r_ + 3) + (i + 1)) * n_theta_ + jw;
  }

  int ncomp_ = 0, n_r_ = 0, n_theta_ = 0;
  double t_ = 0.0;
  bool ghosts_filled_ = false;
  std::vector<double> data_;
};

/// Symmetric 2x2 Hessian (xx, xy, yy).
struct Hess2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  double trace() const { return xx + yy; }
  double operator()(int a, int b) const { return a == b ? (a == 0 ? xx : yy) : xy; }
};

// Second-order centered stencils of one component at node (i, j), i = 0..n_r,
// chain-ruled from (r, theta) to Cartesian coordinates. Ghost rows must hold
// valid values.
Vec2 gradient_at(const AnnulusGrid& g, const GridField& f, int c, int i, int j);
Hess2 hessian_at(const AnnulusGrid& g, const GridField& f, int c, int i, int j);
double laplacian_at(const AnnulusGrid& g, const GridField& f, int c, int i, int j);
double divergence_at(const AnnulusGrid& g, const GridField& u, int i, int j);

enum class OperatorKind { gradient, divergence, laplacian };

/// Applies a stencil at every node. Gradient of a scalar yields 2 components;
/// gradient of a vector yields 4 (component 2*a + b holds d u_a / d x_b).
/// Throws ContractViolation if ghosts are stale.
GridField discrete_operator(const GridField& field, OperatorKind kind, const AnnulusGrid& grid);

struct BoundaryPoint {
  Vec2 x;
  Vec2 normal;
  double weight;
  int j;
};

enum class BoundarySide { inner, outer };

/// Boundary nodes with unit normals and arc weights. The inner normal points
/// into the body (toward the center); the outer normal points out of the fluid.
std::vector<BoundaryPoint> boundary_quadrature(const AnnulusGrid& grid, BoundarySide side);

/// Bilinear interpolation in (r, theta). Points up to half a cell outside the
/// radial range are extrapolated from the edge cell; beyond that throws
/// ExtrapolationError.
double interpolate(const AnnulusGrid& grid, const GridField& f, int c, const Vec2& x);
Vec2 interpolate_vec(const AnnulusGrid& grid, const GridField& f, const Vec2& x);

/// Same without the domain check (used internally by Newton iterations).
double interpolate_unchecked(const AnnulusGrid& grid, const GridField& f, int c, const Vec2& x);

/// Sum of weight * f over all nodes for component c.
double integrate(const AnnulusGrid& grid, const GridField& f, int c);

}  // namespace slipfsi
