#pragma once

#include <vector>

#include "ssd/basis.hpp"
#include "ssd/flow.hpp"
#include "ssd/geometry.hpp"
#include "ssd/mesh.hpp"

namespace ssd {

// L2 projection operators between one ring face and one mortar covering the
// face sub-interval zeta = o + s*z, z in [0,1] (both parametrized angle-up).
// to_mortar restricts degree <= N-1 face data exactly; back is the adjoint
// scaled by s, so summing back over all mortars of a face yields the face L2
// projection of the piecewise mortar data, and face integrals equal the
// span-weighted sum of mortar integrals.
struct ProjOps {
  std::vector<double> to_mortar;  // N x N row-major, mortar <- face
  std::vector<double> back;       // N x N row-major, face <- mortar
};

// Operators for the order-N solution-point node set.  (o,s) = (0,1) returns
// exact identity matrices.
ProjOps make_projection(const std::vector<double>& sp_nodes, double o,
                        double s);

// One overlap interval between a rotating-ring face and a stationary-ring
// face at the current interface position.
struct MortarPiece {
  int rot = 0, sta = 0;            // indices into mesh ring_rot / ring_sta
  double o_rot = 0, s_rot = 1;     // zeta_rot = o_rot + s_rot*z, angle-up
  double o_sta = 0, s_sta = 1;
  double rev0 = 0, len = 0;        // current angular span, revolutions
  int ops_rot = 0, ops_sta = 0;    // indices into ops()
};

// Nonconforming sliding-interface coupling.  Both rings must hold the same
// number of faces, each spanning exactly 1/n revolutions (the generators
// guarantee this; the constructor validates it).  Per-side data cross the
// interface through L2 projection onto mortar intervals and back, which keeps
// uniform flow and face integrals exact to rounding at any rotation angle.
//
// Trace layouts: ((ring_index*N + t)*4 + comp) with t the face point index in
// the owning cell's trace order; the reversal flags recorded in the mesh are
// handled internally.
class SlidingMortar {
 public:
  SlidingMortar(const MeshTopology& mesh, const GeometryCache& geo,
                const GasModel& gas);

  bool active() const { return n_faces_ > 0; }
  int face_count() const { return n_faces_; }

  // Rebuild connectivity and side tables for the pose currently held by the
  // geometry cache.  Call after every GeometryCache::set_motion.
  void update();

  // Single-valued interface solution: both sides receive the L2 projection
  // of the piecewise mortar average onto their own face points.  The
  // projected per-mortar states are kept until the next update(); a
  // convective_flux call passing the same trace pointers reuses them, so
  // callers must not mutate the trace arrays in place between the two calls.
  void common_solution(const double* q_rot, const double* q_sta,
                       double* out_rot, double* out_sta);

  // Convective + grid-motion common normal flux, outward for each side,
  // overwriting out.  States are projected to the mortars (or taken from the
  // preceding common_solution call when the trace pointers match), averaged
  // physical flux tensors and the dissipation jump are formed pointwise
  // there, and everything is carried back to each side's own face points
  // before being contracted with that side's metric normal and grid-flux
  // table.
  void convective_flux(const double* q_rot, const double* q_sta,
                       double* out_rot, double* out_sta);

  // Averaged viscous normal flux from per-side flux tensors, added onto out.
  void viscous_flux(const double* fv_rot, const double* gv_rot,
                    const double* fv_sta, const double* gv_sta,
                    double* out_rot, double* out_sta);

  const std::vector<MortarPiece>& pieces() const { return pieces_; }
  const std::vector<ProjOps>& ops() const { return ops_; }

  // Seconds spent in update() and the exchanges; the interface overhead of a
  // run.
  double comm_seconds() const { return comm_seconds_; }
  void reset_comm_time() { comm_seconds_ = 0.0; }

 private:
  struct Side {  // one ring face; its tables live in the flat arrays below
    int cell = 0, face = 0;
    bool reversed = false;
  };

  void build_sides(const std::vector<RingFace>& ring, std::vector<Side>& out);
  void refresh_side_tables(int side);
  void gather(const Side& sd, const double* in, int r, double* out) const;
  void gather_all(const std::vector<Side>& sides, const double* in,
                  std::vector<double>& out) const;
  // Fill out with the operators for the face sub-interval (o, s), reusing the
  // cached mass factor and buffers; no allocation after construction.
  void build_projection(double o, double s, ProjOps& out);

  const MeshTopology* mesh_ = nullptr;
  const GeometryCache* geo_ = nullptr;
  GasModel gas_;
  int n_faces_ = 0, order_ = 0;
  double u0_ = 0.0, v0_ = 0.0;  // ring start positions at theta=0, span units
  std::vector<Side> rot_, sta_;
  std::vector<MortarPiece> pieces_;
  std::vector<ProjOps> ops_;
  std::vector<double> mass_chol_;  // Cholesky factor of the mortar mass matrix
  std::vector<double> work_S_;     // cross-matrix workspace
  LagrangeBasis1D sbasis_;         // cardinal basis over the solution points
  // cross-matrix samples S(0, x_m), [m][i][j]: S(0,s) is polynomial of
  // degree N-1 in the scaling s, so the N sampled matrices determine it
  std::vector<double> Ssamp_;
  bool nodes_symmetric_ = false;   // node set mirrors about 1/2
  // face-point geometry in angle-up order, [side][face*N + a]; the normal
  // direction and grid flux follow the pose, the normal magnitude is
  // invariant under the rigid ring rotation and is tabulated once
  std::vector<double> nx_[2], ny_[2], g_[2];
  std::vector<double> nmag_[2], inmag_[2];
  bool sta_fresh_ = false;         // stationary tables valid for sta_omega_
  double sta_omega_ = 0.0;
  // traces gathered to angle-up order, [side][face*N*4]; filled per exchange
  std::vector<double> gq_[2], gg_[2];
  // mortar-projected states from the last common_solution, [side][piece*N*4]
  std::vector<double> pm_[2];
  const double* last_qrot_ = nullptr;  // trace pointers that filled pm_/accQ_
  const double* last_qsta_ = nullptr;
  bool common_cached_ = false;
  // per-call accumulators, [side face][angle-up point][component]
  std::vector<double> accF_[2], accG_[2], accD_[2], accQ_[2];
  double comm_seconds_ = 0.0;
};

}  // namespace ssd
