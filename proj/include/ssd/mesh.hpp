#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ssd {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

// Quadrilateral cell with cubic (12-node serendipity) geometry. Node order:
// corners CCW (0..3 at reference (0,0),(1,0),(1,1),(0,1)), then two thirds
// nodes per edge following the CCW boundary walk:
//   4,5 on eta=0 (xi = 1/3, 2/3), 6,7 on xi=1 (eta = 1/3, 2/3),
//   8,9 on eta=1 (xi = 2/3, 1/3), 10,11 on xi=0 (eta = 2/3, 1/3).
// Local faces: 0 eta=0, 1 xi=1, 2 eta=1, 3 xi=0. The CCW walk traverses
// face 0 with xi up, face 1 with eta up, face 2 with xi down, face 3 with
// eta down; face traces follow that walk so interior matching is always
// k <-> N-1-k.
struct Cell {
  std::array<int, 12> n{};
  bool rotating = false;
};

struct InteriorFace {
  int cell_l = -1, face_l = -1;
  int cell_r = -1, face_r = -1;
  bool periodic = false;
};

struct BoundaryFace {
  int cell = -1, face = -1;
  int bc = 0;
};

// One cell face lying on a sliding interface circle. rev0 is the angular
// start of the face (angle-up end ordering) in revolutions in [0,1).
// reversed means the solver-natural trace order of the face runs angle-down.
// Ring faces must be uniform in angle and affinely parametrized by angle.
struct RingFace {
  int cell = -1, face = -1;
  double rev0 = 0.0;
  bool reversed = false;
};

struct MeshTopology {
  std::vector<Vec2> nodes;
  std::vector<Cell> cells;
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<RingFace> ring_rot, ring_sta;  // sorted by rev0 ascending
  Vec2 center{0.0, 0.0};       // rotation center
  double interface_radius = 0.0;
  bool has_interface = false;
  int n_bc_tags = 0;
};

// Reference-square coordinates of a point on a face, in CCW-walk order.
inline void face_point(int face, double zeta, double& xi, double& eta) {
  switch (face) {
    case 0: xi = zeta; eta = 0.0; break;
    case 1: xi = 1.0; eta = zeta; break;
    case 2: xi = 1.0 - zeta; eta = 1.0; break;
    default: xi = 0.0; eta = 1.0 - zeta; break;
  }
}

// 12-node serendipity shape evaluation at reference (xi, eta) in [0,1]^2.
void shape_values(double xi, double eta, double N[12]);
void shape_derivs(double xi, double eta, double dNdxi[12], double dNdeta[12]);

Vec2 map_cell(const MeshTopology& mesh, int cell, double xi, double eta);
// J = [x_xi, x_eta, y_xi, y_eta]
void cell_jacobian(const MeshTopology& mesh, int cell, double xi, double eta,
                   double J[4]);

// Annulus r in [r_inner, r_outer], n_theta x n_r polar cells, cells below
// r_split rotating. r_split must sit on a radial grid line strictly inside.
// BC tags: 0 = wall at r_inner (moves with the rotating ring), 1 = wall at
// r_outer.
MeshTopology make_annulus_mesh(double r_inner, double r_outer, int n_theta,
                               int n_r, double r_split);

// Square box [0, box_len]^2, fully periodic, with a rotating disk of radius
// disk_r about the box center. The disk is a central m x m square block plus
// four ruled wrap blocks (m x k_wrap each); the stationary remainder is a
// ruled ring (4m x k_ring) from the disk circle to the box perimeter.
// No boundary tags (all outer faces periodic).
MeshTopology make_disk_box_mesh(double box_len, double disk_r, int m,
                                int k_wrap, int k_ring);

// Elliptic cylinder (semi-axes ax > ay, centered at origin) inside a rotating
// disk of radius disk_r, embedded in the rectangle [x0,x1] x [y0,y1].
// Rotating part: O-grid ellipse->circle, 4m x k_o cells. Stationary part:
// ruled circle->rectangle ring, 4m x k_ring cells, geometrically stretched.
// BC tags: 0 = cylinder wall (no-slip, moving), 1 = inlet (x0), 2 = outlet
// (x1), 3 = top/bottom (slip).
MeshTopology make_cylinder_mesh(double ax, double ay, double disk_r, double x0,
                                double x1, double y0, double y1, int m, int k_o,
                                int k_ring);

// Cylindrical stirred tank: polar grid between shaft r_shaft and tank wall
// r_wall, n_theta sectors, radial lines placed so that blade/baffle extents
// and r_interface are grid circles. Blades (rotating, spanning
// [r_blade0, r_blade1]) and baffles (stationary, [r_baffle0, r_baffle1]) are
// solid sectors removed from the fluid mesh, n_blades/n_baffles of them, each
// one sector wide. BC tags: 0 = shaft wall (moving), 1 = tank wall,
// 2 = blade walls (moving), 3 = baffle walls.
MeshTopology make_tank_mesh(double r_shaft, double r_wall, double r_interface,
                            int n_theta, int n_r, int n_blades, double r_blade0,
                            double r_blade1, int n_baffles, double r_baffle0,
                            double r_baffle1);

}  // namespace ssd
