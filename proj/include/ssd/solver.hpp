#pragma once

#include <functional>
#include <vector>

#include "ssd/basis.hpp"
#include "ssd/flow.hpp"
#include "ssd/geometry.hpp"
#include "ssd/mesh.hpp"
#include "ssd/mortar.hpp"

namespace ssd {

// Boundary treatment for one mesh boundary tag.  No-slip walls move with the
// grid: their velocity is the local grid velocity, which covers spinning
// cylinders, blades and shafts on a rotating sub-domain and static walls on a
// stationary one.
struct BoundaryCondition {
  enum class Kind {
    exact_state,        // ghost = prescribed state (also serves as an inlet)
    slip_wall,          // reflect grid-relative normal velocity, no viscous flux
    noslip_isothermal,  // wall at fixed temperature
    noslip_adiabatic,   // wall with zero normal heat flux
    pressure_outlet,    // interior state with prescribed static pressure
  };
  Kind kind = Kind::slip_wall;
  std::function<State(Vec2, double)> state;  // exact_state only
  double wall_temperature = 1.0;             // noslip_isothermal only
  double outlet_pressure = 1.0;              // pressure_outlet only
};

// Net aerodynamic load on a group of wall faces: force exerted by the fluid
// on the walls, and the torque of that force about the mesh center.
struct WallLoads {
  double fx = 0.0;
  double fy = 0.0;
  double torque = 0.0;
};

// Spectral-difference semi-discretization of the compressible Navier-Stokes
// equations on a (possibly rotating) quadrilateral mesh.  The marched vector
// holds Qt = |J| Q per solution point, layout ((cell*N + j)*N + i)*4 + comp
// with i the xi index and j the eta index.
//
// The divergence is evaluated from flux values at the staggered flux points;
// face and interface flux points carry single-valued common fluxes (Rusanov
// with a grid-motion term drawn from the geometry's grid-flux tables, plus
// averaged viscous fluxes), so uniform flow is preserved to rounding on
// static and rotating meshes alike.
class SdDiscretization {
 public:
  // `mesh` must outlive the discretization; it is referenced, not copied.
  SdDiscretization(const MeshTopology& mesh, int order, const GasModel& gas,
                   std::vector<BoundaryCondition> bcs);

  // internal tables point at each other, so the object is pinned in place
  SdDiscretization(const SdDiscretization&) = delete;
  SdDiscretization& operator=(const SdDiscretization&) = delete;

  int order() const { return n_; }
  int n_cells() const { return int(mesh_->cells.size()); }
  int dof() const { return n_cells() * n_ * n_ * 4; }

  // Pose the rotating sub-domain and refresh the interface connectivity.
  void set_pose(double theta, double omega);

  // out = d(Qt)/dt at the given time and current pose.
  void residual(const std::vector<double>& qt, double time,
                std::vector<double>& out);

  // Collocate a state field at the (posed) solution points: Qt = |J| q(x).
  std::vector<double> init_field(
      const std::function<State(Vec2)>& field) const;

  State state_at(const std::vector<double>& qt, int cell, int i, int j) const;

  // Largest stable explicit time step at unit safety factor, from convective
  // and viscous spectral radius estimates over all solution points.
  double stable_dt(const std::vector<double>& qt) const;

  // Pressure plus shear traction integrated over every boundary face whose
  // tag is in `tags`, using the same wall states and one-sided gradients the
  // residual uses.
  WallLoads wall_loads(const std::vector<double>& qt, double time,
                       const std::vector<int>& tags);

  const MeshTopology& mesh() const { return *mesh_; }
  const GeometryCache& geometry() const { return geo_; }
  const Operators& ops() const { return geo_.ops(); }
  SlidingMortar& mortar() { return mortar_; }
  const GasModel& gas() const { return gas_; }

 private:
  void fill_solution_points(const std::vector<double>& qt);
  void extrapolate_to_flux_points();
  void extract_traces();
  void compute_boundary_ghosts(double time);
  void apply_common_solution();
  void compute_gradients();
  void interior_point_fluxes();
  void common_face_fluxes();
  void assemble_divergence(std::vector<double>& out);

  const MeshTopology* mesh_;
  GasModel gas_;
  int n_;
  GeometryCache geo_;
  SlidingMortar mortar_;
  std::vector<BoundaryCondition> bcs_;
  bool viscous_ = false;

  // workspaces; all layouts use 4 trailing components
  std::vector<double> qsp_;                       // states at solution points
  std::vector<double> uxf_, uyf_;                 // states at flux points
  std::vector<double> fxf_, fyf_;                 // transformed fluxes there
  std::vector<double> tq_;                        // face traces, trace order
  std::vector<double> bghost_;                    // ghosts per boundary face
  std::vector<double> gxsp_, gysp_;               // d/dx, d/dy at SPs
  std::vector<double> gx_xf_, gy_xf_, gx_yf_, gy_yf_;  // gradients at FPs
  std::vector<double> mq_[2], mc_[2], mf_[2];     // mortar traces/common/flux
  std::vector<double> mfv_[2], mgv_[2];           // mortar viscous tensors
};

}  // namespace ssd
