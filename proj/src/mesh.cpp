#include "ssd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ssd {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Reference node coordinates on [-1,1]^2 in the header's node order.
constexpr double kRN[12] = {-1.0, 1.0,  1.0,       -1.0,      -1.0 / 3.0,
                            1.0 / 3.0,  1.0,       1.0,       1.0 / 3.0,
                            -1.0 / 3.0, -1.0,      -1.0};
constexpr double kSN[12] = {-1.0,      -1.0,      1.0,        1.0, -1.0,
                            -1.0,      -1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0,
                            1.0 / 3.0, -1.0 / 3.0};

inline bool is_corner(int i) { return i < 4; }
// nodes 4,5,8,9 sit on eta = +-1 edges (fractional r), 6,7,10,11 on xi = +-1.
inline bool on_horizontal_edge(int i) {
  return i == 4 || i == 5 || i == 8 || i == 9;
}

int imod(int a, int b) { return ((a % b) + b) % b; }

double frac(double x) { return x - std::floor(x); }

}  // namespace

void shape_values(double xi, double eta, double N[12]) {
  const double r = 2.0 * xi - 1.0, s = 2.0 * eta - 1.0;
  for (int i = 0; i < 12; ++i) {
    const double ri = kRN[i], si = kSN[i];
    if (is_corner(i)) {
      N[i] = (1.0 / 32.0) * (1.0 + r * ri) * (1.0 + s * si) *
             (9.0 * (r * r + s * s) - 10.0);
    } else if (on_horizontal_edge(i)) {
      N[i] = (9.0 / 32.0) * (1.0 + s * si) * (1.0 - r * r) * (1.0 + 9.0 * r * ri);
    } else {
      N[i] = (9.0 / 32.0) * (1.0 + r * ri) * (1.0 - s * s) * (1.0 + 9.0 * s * si);
    }
  }
}

void shape_derivs(double xi, double eta, double dNdxi[12], double dNdeta[12]) {
  const double r = 2.0 * xi - 1.0, s = 2.0 * eta - 1.0;
  for (int i = 0; i < 12; ++i) {
    const double ri = kRN[i], si = kSN[i];
    double dr, ds;
    if (is_corner(i)) {
      dr = (1.0 / 32.0) * (1.0 + s * si) *
           (ri * (9.0 * (r * r + s * s) - 10.0) + (1.0 + r * ri) * 18.0 * r);
      ds = (1.0 / 32.0) * (1.0 + r * ri) *
           (si * (9.0 * (r * r + s * s) - 10.0) + (1.0 + s * si) * 18.0 * s);
    } else if (on_horizontal_edge(i)) {
      dr = (9.0 / 32.0) * (1.0 + s * si) *
           (-2.0 * r * (1.0 + 9.0 * r * ri) + (1.0 - r * r) * 9.0 * ri);
      ds = (9.0 / 32.0) * si * (1.0 - r * r) * (1.0 + 9.0 * r * ri);
    } else {
      dr = (9.0 / 32.0) * ri * (1.0 - s * s) * (1.0 + 9.0 * s * si);
      ds = (9.0 / 32.0) * (1.0 + r * ri) *
           (-2.0 * s * (1.0 + 9.0 * s * si) + (1.0 - s * s) * 9.0 * si);
    }
    // chain rule for the [0,1] reference square
    dNdxi[i] = 2.0 * dr;
    dNdeta[i] = 2.0 * ds;
  }
}

Vec2 map_cell(const MeshTopology& mesh, int cell, double xi, double eta) {
  double N[12];
  shape_values(xi, eta, N);
  Vec2 p{0.0, 0.0};
  for (int i = 0; i < 12; ++i) {
    const Vec2& v = mesh.nodes[mesh.cells[cell].n[i]];
    p.x += N[i] * v.x;
    p.y += N[i] * v.y;
  }
  return p;
}

void cell_jacobian(const MeshTopology& mesh, int cell, double xi, double eta,
                   double J[4]) {
  double dxi[12], deta[12];
  shape_derivs(xi, eta, dxi, deta);
  J[0] = J[1] = J[2] = J[3] = 0.0;
  for (int i = 0; i < 12; ++i) {
    const Vec2& v = mesh.nodes[mesh.cells[cell].n[i]];
    J[0] += dxi[i] * v.x;
    J[1] += deta[i] * v.x;
    J[2] += dxi[i] * v.y;
    J[3] += deta[i] * v.y;
  }
}

MeshTopology make_annulus_mesh(double r_inner, double r_outer, int n_theta,
                               int n_r, double r_split) {
  if (n_theta < 4 || n_r < 2)
    throw std::invalid_argument("annulus: need n_theta >= 4, n_r >= 2");
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    throw std::invalid_argument("annulus: need 0 < r_inner < r_outer");
  const double dr = (r_outer - r_inner) / n_r;
  const int ks = static_cast<int>(std::lround((r_split - r_inner) / dr));
  if (ks < 1 || ks > n_r - 1 ||
      std::abs(r_inner + ks * dr - r_split) > 1e-10 * (r_outer - r_inner))
    throw std::invalid_argument(
        "annulus: r_split must lie on an interior radial grid line");

  const int T = 3 * n_theta;   // angular third-stations
  const int Q = 3 * n_r + 1;   // radial third-stations
  MeshTopology mesh;
  mesh.nodes.resize(Q * T + T);  // + duplicated split circle (stationary copy)
  for (int q = 0; q < Q; ++q) {
    const double r = r_inner + q * (dr / 3.0);
    for (int t = 0; t < T; ++t) {
      const double th = 2.0 * kPi * t / T;
      mesh.nodes[q * T + t] = {r * std::cos(th), r * std::sin(th)};
      if (q == 3 * ks) mesh.nodes[Q * T + t] = mesh.nodes[q * T + t];
    }
  }

  mesh.cells.resize(static_cast<size_t>(n_r) * n_theta);
  for (int k = 0; k < n_r; ++k) {
    const bool sta = k >= ks;
    for (int m = 0; m < n_theta; ++m) {
      auto nd = [&](int q, int t) {
        t = imod(t, T);
        return (q == 3 * ks && sta) ? Q * T + t : q * T + t;
      };
      Cell& c = mesh.cells[static_cast<size_t>(k) * n_theta + m];
      c.rotating = !sta;
      const int q0 = 3 * k, t0 = 3 * m;
      c.n = {nd(q0, t0),          nd(q0 + 3, t0),     nd(q0 + 3, t0 + 3),
             nd(q0, t0 + 3),      nd(q0 + 1, t0),     nd(q0 + 2, t0),
             nd(q0 + 3, t0 + 1),  nd(q0 + 3, t0 + 2), nd(q0 + 2, t0 + 3),
             nd(q0 + 1, t0 + 3),  nd(q0, t0 + 2),     nd(q0, t0 + 1)};
    }
  }

  auto cid = [&](int k, int m) { return k * n_theta + imod(m, n_theta); };
  for (int k = 0; k < n_r; ++k)
    for (int m = 0; m < n_theta; ++m)
      mesh.interior_faces.push_back({cid(k, m), 2, cid(k, m + 1), 0, false});
  for (int k = 0; k + 1 < n_r; ++k) {
    if (k + 1 == ks) continue;  // sliding interface, handled by mortars
    for (int m = 0; m < n_theta; ++m)
      mesh.interior_faces.push_back({cid(k, m), 1, cid(k + 1, m), 3, false});
  }
  for (int m = 0; m < n_theta; ++m) {
    mesh.boundary_faces.push_back({cid(0, m), 3, 0});
    mesh.boundary_faces.push_back({cid(n_r - 1, m), 1, 1});
    mesh.ring_rot.push_back({cid(ks - 1, m), 1, double(m) / n_theta, false});
    mesh.ring_sta.push_back({cid(ks, m), 3, double(m) / n_theta, true});
  }
  mesh.center = {0.0, 0.0};
  mesh.interface_radius = r_split;
  mesh.has_interface = true;
  mesh.n_bc_tags = 2;
  return mesh;
}

namespace {

// Shared helper for the wrap/ring blocks used by the disk/cylinder meshes:
// a lattice of 12m columns (wrapping) x (3k+1) rows, cells with xi = radial
// (row direction) and eta = CCW (column direction).
struct BlockCells {
  // node_id(gg, tt): lattice node id; adds cells for rows [0, k).
  template <typename NodeId>
  static void add(std::vector<Cell>& cells, int cols, int k, bool rotating,
                  NodeId&& nid, std::vector<int>& out_ids) {
    for (int l = 0; l < k; ++l) {
      for (int j = 0; j < cols; ++j) {
        Cell c;
        c.rotating = rotating;
        const int g0 = 3 * j, t0 = 3 * l;
        c.n = {nid(g0, t0),         nid(g0, t0 + 3),     nid(g0 + 3, t0 + 3),
               nid(g0 + 3, t0),     nid(g0, t0 + 1),     nid(g0, t0 + 2),
               nid(g0 + 1, t0 + 3), nid(g0 + 2, t0 + 3), nid(g0 + 3, t0 + 2),
               nid(g0 + 3, t0 + 1), nid(g0 + 2, t0),     nid(g0 + 1, t0)};
        out_ids.push_back(static_cast<int>(cells.size()));
        cells.push_back(c);
      }
    }
  }
};

}  // namespace

MeshTopology make_disk_box_mesh(double box_len, double disk_r, int m,
                                int k_wrap, int k_ring) {
  if (m < 2 || k_wrap < 1 || k_ring < 1)
    throw std::invalid_argument("disk box: need m >= 2, k_wrap/k_ring >= 1");
  if (!(disk_r > 0.0) || !(disk_r < 0.5 * box_len))
    throw std::invalid_argument("disk box: disk must fit inside the box");
  const double w = 0.45 * disk_r;  // central square half-width
  const Vec2 c{0.5 * box_len, 0.5 * box_len};
  const int sqN = 3 * m + 1;
  const int cols = 12 * m;

  MeshTopology mesh;
  const int base_wrap = sqN * sqN;
  const int base_ring = base_wrap + cols * (3 * k_wrap);
  mesh.nodes.resize(base_ring + cols * (3 * k_ring + 1));

  auto sq_id = [&](int a, int b) { return b * sqN + a; };
  for (int b = 0; b < sqN; ++b)
    for (int a = 0; a < sqN; ++a)
      mesh.nodes[sq_id(a, b)] = {c.x - w + 2.0 * w * a / (3 * m),
                                 c.y - w + 2.0 * w * b / (3 * m)};

  // square-perimeter lattice id for wrap column gg (CCW from corner (w,-w))
  auto perim_id = [&](int gg) {
    gg = imod(gg, cols);
    const int side = gg / (3 * m), off = gg % (3 * m);
    switch (side) {
      case 0: return sq_id(3 * m, off);
      case 1: return sq_id(3 * m - off, 3 * m);
      case 2: return sq_id(0, 3 * m - off);
      default: return sq_id(off, 0);
    }
  };
  auto angle = [&](int gg) { return -kPi / 4.0 + 2.0 * kPi * gg / cols; };
  auto arc_pt = [&](int gg) {
    return Vec2{c.x + disk_r * std::cos(angle(gg)),
                c.y + disk_r * std::sin(angle(gg))};
  };
  auto box_pt = [&](int gg) {
    gg = imod(gg, cols);
    const int side = gg / (3 * m);
    const double f = double(gg % (3 * m)) / (3 * m);
    switch (side) {
      case 0: return Vec2{box_len, f * box_len};
      case 1: return Vec2{box_len - f * box_len, box_len};
      case 2: return Vec2{0.0, box_len - f * box_len};
      default: return Vec2{f * box_len, 0.0};
    }
  };

  auto wrap_id = [&](int gg, int tt) {
    gg = imod(gg, cols);
    return tt == 0 ? perim_id(gg) : base_wrap + (tt - 1) * cols + gg;
  };
  for (int tt = 1; tt <= 3 * k_wrap; ++tt) {
    const double beta = double(tt) / (3 * k_wrap);
    for (int gg = 0; gg < cols; ++gg) {
      const Vec2 s = mesh.nodes[perim_id(gg)];
      mesh.nodes[wrap_id(gg, tt)] = (1.0 - beta) * s + beta * arc_pt(gg);
    }
  }
  auto ring_id = [&](int gg, int tt) {
    return base_ring + tt * cols + imod(gg, cols);
  };
  for (int tt = 0; tt <= 3 * k_ring; ++tt) {
    const double beta = double(tt) / (3 * k_ring);
    for (int gg = 0; gg < cols; ++gg)
      mesh.nodes[ring_id(gg, tt)] = (1.0 - beta) * arc_pt(gg) + beta * box_pt(gg);
  }

  // cells: central square, then wrap, then ring
  mesh.cells.reserve(static_cast<size_t>(m) * m + 4 * m * (k_wrap + k_ring));
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      Cell cc;
      cc.rotating = true;
      const int a = 3 * i, b = 3 * j;
      cc.n = {sq_id(a, b),         sq_id(a + 3, b),     sq_id(a + 3, b + 3),
              sq_id(a, b + 3),     sq_id(a + 1, b),     sq_id(a + 2, b),
              sq_id(a + 3, b + 1), sq_id(a + 3, b + 2), sq_id(a + 2, b + 3),
              sq_id(a + 1, b + 3), sq_id(a, b + 2),     sq_id(a, b + 1)};
      mesh.cells.push_back(cc);
    }
  }
  std::vector<int> wrap_cells, ring_cells;
  BlockCells::add(mesh.cells, 4 * m, k_wrap, true, wrap_id, wrap_cells);
  BlockCells::add(mesh.cells, 4 * m, k_ring, false, ring_id, ring_cells);
  auto sq_cell = [&](int i, int j) { return j * m + i; };
  auto wrap_cell = [&](int j, int l) { return wrap_cells[l * 4 * m + imod(j, 4 * m)]; };
  auto ring_cell = [&](int j, int l) { return ring_cells[l * 4 * m + imod(j, 4 * m)]; };

  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (i + 1 < m)
        mesh.interior_faces.push_back({sq_cell(i, j), 1, sq_cell(i + 1, j), 3, false});
      if (j + 1 < m)
        mesh.interior_faces.push_back({sq_cell(i, j), 2, sq_cell(i, j + 1), 0, false});
    }
  auto add_block_faces = [&](auto cell_of, int k) {
    for (int l = 0; l < k; ++l)
      for (int j = 0; j < 4 * m; ++j) {
        mesh.interior_faces.push_back({cell_of(j, l), 2, cell_of(j + 1, l), 0, false});
        if (l + 1 < k)
          mesh.interior_faces.push_back({cell_of(j, l), 1, cell_of(j, l + 1), 3, false});
      }
  };
  add_block_faces(wrap_cell, k_wrap);
  add_block_faces(ring_cell, k_ring);
  for (int j = 0; j < 4 * m; ++j) {
    const int side = j / m, off = j % m;
    int sc, sf;
    switch (side) {
      case 0: sc = sq_cell(m - 1, off); sf = 1; break;
      case 1: sc = sq_cell(m - 1 - off, m - 1); sf = 2; break;
      case 2: sc = sq_cell(0, m - 1 - off); sf = 3; break;
      default: sc = sq_cell(off, 0); sf = 0; break;
    }
    mesh.interior_faces.push_back({sc, sf, wrap_cell(j, 0), 3, false});
  }
  // periodic pairing of the box perimeter (right<->left, top<->bottom)
  for (int j = 0; j < m; ++j) {
    mesh.interior_faces.push_back(
        {ring_cell(j, k_ring - 1), 1, ring_cell(3 * m - 1 - j, k_ring - 1), 1, true});
    mesh.interior_faces.push_back(
        {ring_cell(m + j, k_ring - 1), 1, ring_cell(4 * m - 1 - j, k_ring - 1), 1, true});
  }

  for (int j = 0; j < 4 * m; ++j) {
    const double rev = frac(-0.125 + double(j) / (4 * m));
    mesh.ring_rot.push_back({wrap_cell(j, k_wrap - 1), 1, rev, false});
    mesh.ring_sta.push_back({ring_cell(j, 0), 3, rev, true});
  }
  auto by_rev = [](const RingFace& a, const RingFace& b) { return a.rev0 < b.rev0; };
  std::sort(mesh.ring_rot.begin(), mesh.ring_rot.end(), by_rev);
  std::sort(mesh.ring_sta.begin(), mesh.ring_sta.end(), by_rev);

  mesh.center = c;
  mesh.interface_radius = disk_r;
  mesh.has_interface = true;
  mesh.n_bc_tags = 0;
  return mesh;
}

MeshTopology make_cylinder_mesh(double ax, double ay, double disk_r, double x0,
                                double x1, double y0, double y1, int m, int k_o,
                                int k_ring) {
  if (m < 3 || k_o < 2 || k_ring < 2)
    throw std::invalid_argument("cylinder: need m >= 3, k_o/k_ring >= 2");
  if (!(ax > 0) || !(ay > 0) || !(disk_r > std::max(ax, ay)))
    throw std::invalid_argument("cylinder: disk must enclose the ellipse");
  if (!(x0 < -disk_r) || !(x1 > disk_r) || !(y0 < -disk_r) || !(y1 > disk_r))
    throw std::invalid_argument("cylinder: box must enclose the disk");
  const int cols = 12 * m;

  MeshTopology mesh;
  const int base_o = 0;
  const int base_ring = cols * (3 * k_o + 1);
  mesh.nodes.resize(base_ring + cols * (3 * k_ring + 1));

  auto t_of = [&](int gg) { return 2.0 * kPi * imod(gg, cols) / cols; };
  // geometric row fractions with thirds affine inside each row of cells
  auto stretch = [](int tt, int k, double ratio) {
    const int l = tt / 3, sub = tt % 3;
    auto beta = [&](int row) {
      return (std::pow(ratio, row) - 1.0) / (std::pow(ratio, k) - 1.0);
    };
    const double b0 = beta(l), b1 = (l == k) ? 1.0 : beta(l + 1);
    return b0 + (b1 - b0) * sub / 3.0;
  };

  auto o_id = [&](int gg, int tt) { return base_o + tt * cols + imod(gg, cols); };
  for (int tt = 0; tt <= 3 * k_o; ++tt) {
    const double beta = stretch(tt, k_o, 1.3);
    for (int gg = 0; gg < cols; ++gg) {
      const double t = t_of(gg);
      const Vec2 e{ax * std::cos(t), ay * std::sin(t)};
      const Vec2 q{disk_r * std::cos(t), disk_r * std::sin(t)};
      mesh.nodes[o_id(gg, tt)] = (1.0 - beta) * e + beta * q;
    }
  }

  // stationary ring: columns start at the rectangle corner nearest angle 0-
  // (x1, y0), so every rectangle corner is a column of the lattice.
  const double start = std::atan2(y0, x1) + 2.0 * kPi;  // in (3/2 pi, 2 pi)
  const double start_rev = start / (2.0 * kPi) - 1.0;   // negative fraction
  const double corner_rev[4] = {
      frac(std::atan2(y1, x1) / (2.0 * kPi) - start_rev - 1e-15),
      frac(std::atan2(y1, x0) / (2.0 * kPi) - start_rev),
      frac(std::atan2(y0, x0) / (2.0 * kPi) - start_rev),
      1.0};
  int ccol[5] = {0, 0, 0, 0, 4 * m};
  for (int i = 0; i < 3; ++i)
    ccol[i + 1] = static_cast<int>(std::lround(corner_rev[i] * 4 * m));
  for (int i = 0; i < 4; ++i)
    if (ccol[i + 1] - ccol[i] < 1)
      throw std::invalid_argument("cylinder: too few columns for a box side");
  const Vec2 corner[5] = {{x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}, {x1, y0}};
  auto rect_pt = [&](int gg) {
    gg = imod(gg, cols);
    int s = 0;
    while (gg >= 3 * ccol[s + 1]) ++s;
    const double f = double(gg - 3 * ccol[s]) / (3.0 * (ccol[s + 1] - ccol[s]));
    return (1.0 - f) * corner[s] + f * corner[s + 1];
  };
  auto ring_t = [&](int gg) { return start + 2.0 * kPi * imod(gg, cols) / cols; };
  auto ring_id = [&](int gg, int tt) {
    return base_ring + tt * cols + imod(gg, cols);
  };
  for (int tt = 0; tt <= 3 * k_ring; ++tt) {
    const double beta = stretch(tt, k_ring, 1.45);
    for (int gg = 0; gg < cols; ++gg) {
      const Vec2 q{disk_r * std::cos(ring_t(gg)), disk_r * std::sin(ring_t(gg))};
      mesh.nodes[ring_id(gg, tt)] = (1.0 - beta) * q + beta * rect_pt(gg);
    }
  }

  std::vector<int> o_cells, ring_cells;
  BlockCells::add(mesh.cells, 4 * m, k_o, true, o_id, o_cells);
  BlockCells::add(mesh.cells, 4 * m, k_ring, false, ring_id, ring_cells);
  auto o_cell = [&](int j, int l) { return o_cells[l * 4 * m + imod(j, 4 * m)]; };
  auto ring_cell = [&](int j, int l) { return ring_cells[l * 4 * m + imod(j, 4 * m)]; };

  auto add_block_faces = [&](auto cell_of, int k) {
    for (int l = 0; l < k; ++l)
      for (int j = 0; j < 4 * m; ++j) {
        mesh.interior_faces.push_back({cell_of(j, l), 2, cell_of(j + 1, l), 0, false});
        if (l + 1 < k)
          mesh.interior_faces.push_back({cell_of(j, l), 1, cell_of(j, l + 1), 3, false});
      }
  };
  add_block_faces(o_cell, k_o);
  add_block_faces(ring_cell, k_ring);
  for (int j = 0; j < 4 * m; ++j) {
    mesh.boundary_faces.push_back({o_cell(j, 0), 3, 0});  // cylinder wall
    int s = 0;
    while (j >= ccol[s + 1]) ++s;
    // rectangle sides CCW from (x1,y0): right -> outlet, top/bottom -> slip,
    // left -> inlet
    const int tag = (s == 0) ? 2 : (s == 2) ? 1 : 3;
    mesh.boundary_faces.push_back({ring_cell(j, k_ring - 1), 1, tag});
  }
  for (int j = 0; j < 4 * m; ++j) {
    mesh.ring_rot.push_back({o_cell(j, k_o - 1), 1, frac(double(j) / (4 * m)), false});
    mesh.ring_sta.push_back(
        {ring_cell(j, 0), 3, frac(start_rev + double(j) / (4 * m)), true});
  }
  auto by_rev = [](const RingFace& a, const RingFace& b) { return a.rev0 < b.rev0; };
  std::sort(mesh.ring_rot.begin(), mesh.ring_rot.end(), by_rev);
  std::sort(mesh.ring_sta.begin(), mesh.ring_sta.end(), by_rev);

  mesh.center = {0.0, 0.0};
  mesh.interface_radius = disk_r;
  mesh.has_interface = true;
  mesh.n_bc_tags = 4;
  return mesh;
}

MeshTopology make_tank_mesh(double r_shaft, double r_wall, double r_interface,
                            int n_theta, int n_r, int n_blades, double r_blade0,
                            double r_blade1, int n_baffles, double r_baffle0,
                            double r_baffle1) {
  if (n_theta < 8 || n_r < 4)
    throw std::invalid_argument("tank: need n_theta >= 8, n_r >= 4");
  if (n_blades < 1 || n_baffles < 1 || n_theta % n_blades != 0 ||
      n_theta % n_baffles != 0)
    throw std::invalid_argument("tank: blade/baffle counts must divide n_theta");
  const double dr = (r_wall - r_shaft) / n_r;
  auto line = [&](double r, const char* what) {
    const int k = static_cast<int>(std::lround((r - r_shaft) / dr));
    if (k < 0 || k > n_r || std::abs(r_shaft + k * dr - r) > 1e-10 * r_wall)
      throw std::invalid_argument(std::string("tank: ") + what +
                                  " must lie on a radial grid line");
    return k;
  };
  const int ks = line(r_interface, "r_interface");
  const int kb0 = line(r_blade0, "r_blade0"), kb1 = line(r_blade1, "r_blade1");
  const int kf0 = line(r_baffle0, "r_baffle0"), kf1 = line(r_baffle1, "r_baffle1");
  if (!(0 < kb0 && kb0 < kb1 && kb1 < ks && ks < kf0 && kf0 < kf1 && kf1 <= n_r))
    throw std::invalid_argument(
        "tank: need shaft < blades < interface < baffles <= wall");

  auto removed = [&](int k, int mm) {
    const int bs = n_theta / n_blades;
    if (k >= kb0 && k < kb1 && mm % bs == 0) return true;
    const int fs = n_theta / n_baffles;
    if (k >= kf0 && k < kf1 && imod(mm - fs / 2, fs) == 0) return true;
    return false;
  };

  const int T = 3 * n_theta, Q = 3 * n_r + 1;
  MeshTopology mesh;
  mesh.nodes.resize(Q * T + T);
  for (int q = 0; q < Q; ++q) {
    const double r = r_shaft + q * (dr / 3.0);
    for (int t = 0; t < T; ++t) {
      const double th = 2.0 * kPi * t / T;
      mesh.nodes[q * T + t] = {r * std::cos(th), r * std::sin(th)};
      if (q == 3 * ks) mesh.nodes[Q * T + t] = mesh.nodes[q * T + t];
    }
  }

  std::vector<int> id(static_cast<size_t>(n_r) * n_theta, -1);
  for (int k = 0; k < n_r; ++k) {
    const bool sta = k >= ks;
    for (int mm = 0; mm < n_theta; ++mm) {
      if (removed(k, mm)) continue;
      auto nd = [&](int q, int t) {
        t = imod(t, T);
        return (q == 3 * ks && sta) ? Q * T + t : q * T + t;
      };
      Cell c;
      c.rotating = !sta;
      const int q0 = 3 * k, t0 = 3 * mm;
      c.n = {nd(q0, t0),          nd(q0 + 3, t0),     nd(q0 + 3, t0 + 3),
             nd(q0, t0 + 3),      nd(q0 + 1, t0),     nd(q0 + 2, t0),
             nd(q0 + 3, t0 + 1),  nd(q0 + 3, t0 + 2), nd(q0 + 2, t0 + 3),
             nd(q0 + 1, t0 + 3),  nd(q0, t0 + 2),     nd(q0, t0 + 1)};
      id[static_cast<size_t>(k) * n_theta + mm] = static_cast<int>(mesh.cells.size());
      mesh.cells.push_back(c);
    }
  }
  auto cell_at = [&](int k, int mm) {
    return id[static_cast<size_t>(k) * n_theta + imod(mm, n_theta)];
  };
  auto pair_or_wall = [&](int ka, int ma, int fa, int kb, int mb, int fb) {
    const int a = cell_at(ka, ma), b = cell_at(kb, mb);
    if (a >= 0 && b >= 0) {
      mesh.interior_faces.push_back({a, fa, b, fb, false});
    } else if (a >= 0) {
      mesh.boundary_faces.push_back({a, fa, kb < ks ? 2 : 3});
    } else if (b >= 0) {
      mesh.boundary_faces.push_back({b, fb, ka < ks ? 2 : 3});
    }
  };
  for (int k = 0; k < n_r; ++k)
    for (int mm = 0; mm < n_theta; ++mm)
      pair_or_wall(k, mm, 2, k, mm + 1, 0);
  for (int k = 0; k + 1 < n_r; ++k) {
    if (k + 1 == ks) continue;
    for (int mm = 0; mm < n_theta; ++mm)
      pair_or_wall(k, mm, 1, k + 1, mm, 3);
  }
  for (int mm = 0; mm < n_theta; ++mm) {
    if (cell_at(0, mm) >= 0)
      mesh.boundary_faces.push_back({cell_at(0, mm), 3, 0});
    if (cell_at(n_r - 1, mm) >= 0)
      mesh.boundary_faces.push_back({cell_at(n_r - 1, mm), 1, 1});
    mesh.ring_rot.push_back({cell_at(ks - 1, mm), 1, double(mm) / n_theta, false});
    mesh.ring_sta.push_back({cell_at(ks, mm), 3, double(mm) / n_theta, true});
  }
  mesh.center = {0.0, 0.0};
  mesh.interface_radius = r_interface;
  mesh.has_interface = true;
  mesh.n_bc_tags = 4;
  return mesh;
}

}  // namespace ssd
