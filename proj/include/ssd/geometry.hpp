#pragma once

#include <vector>

#include "ssd/basis.hpp"
#include "ssd/mesh.hpp"

namespace ssd {

// Per-cell geometric tables for an order-N discretization.
// Point families and layouts:
//   sp  N*N solution points, row-major (j*N + i), i the xi index;
//   xf  xi flux points, N rows of N+1: (j*(N+1) + f);
//   yf  eta flux points, N columns of N+1: (i*(N+1) + f).
// a1 = |J| grad xi = (y_eta, -x_eta), a2 = |J| grad eta = (-y_xi, x_xi).
// gcl_xf/gcl_yf are grid-flux scalars per unit angular rate: on rotating
// cells, (a1 . u_g) at a xi FP is taken as omega*gcl_xf (and a2 analogously)
// where the tables come from cross-differentiating the FPxFP tensor
// interpolant of |x - c|^2. That choice makes the discrete divergence of the
// grid flux vanish identically (the interpolant's mixed partials commute), so
// uniform flow stays uniform on the rotating mesh; it equals the pointwise
// value up to the interpolation error O(h^{N+1}).
struct CellGeometry {
  std::vector<double> x_sp, y_sp, jac_sp, a1x_sp, a1y_sp, a2x_sp, a2y_sp,
      ugx_sp, ugy_sp;
  std::vector<double> x_xf, y_xf, jac_xf, a1x_xf, a1y_xf, a2x_xf, a2y_xf,
      ugx_xf, ugy_xf, gcl_xf;
  std::vector<double> x_yf, y_yf, jac_yf, a1x_yf, a1y_yf, a2x_yf, a2y_yf,
      ugx_yf, ugy_yf, gcl_yf;
};

class GeometryCache {
 public:
  GeometryCache(const MeshTopology& mesh, int order);

  // Pose the rotating cells at angle theta (radians, about mesh.center) with
  // angular rate omega. Rebuilds rotated tables from the reference ones;
  // |J| and the gcl tables are rotation invariant and left untouched.
  void set_motion(double theta, double omega);

  const CellGeometry& cell(int c) const { return cur_[c]; }
  int n_cells() const { return static_cast<int>(cur_.size()); }
  const Operators& ops() const { return ops_; }
  double theta() const { return theta_; }
  double omega() const { return omega_; }
  int order() const { return ops_.order; }
  Vec2 center() const { return center_; }

 private:
  void build_cell(const MeshTopology& mesh, int c, CellGeometry& g) const;

  Operators ops_;
  std::vector<CellGeometry> ref_, cur_;
  std::vector<int> rotating_;
  Vec2 center_;
  double theta_ = 0.0, omega_ = 0.0;
};

}  // namespace ssd
