#include "ssd/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ssd/basis.hpp"
#include "ssd/bench.hpp"
#include "ssd/time_march.hpp"

namespace ssd {

namespace {

std::string fmt17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

void append_line(std::string& out, const std::string& s) {
  out += s;
  out += '\n';
}

// --- token-level line scanner with 1-based line numbers --------------------

struct Scanner {
  std::vector<std::string> lines;
  std::string origin;
  size_t next = 0;

  explicit Scanner(const std::string& text, std::string org)
      : origin(std::move(org)) {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ParseError(origin, line, msg);
  }

  int line_no() const { return int(next); }  // last consumed line

  std::string take(const std::string& what) {
    if (next >= lines.size())
      fail(int(lines.size()), "unexpected end of file, expected " + what);
    return lines[next++];
  }

  // "name <count>" block header
  int header(const std::string& name) {
    const std::string l = take("'" + name + " <count>'");
    std::istringstream ss(l);
    std::string key;
    long long count = -1;
    if (!(ss >> key) || key != name)
      fail(line_no(), "expected '" + name + " <count>', got '" + l + "'");
    if (!(ss >> count) || count < 0)
      fail(line_no(), "bad count in '" + name + "' header");
    std::string rest;
    if (ss >> rest) fail(line_no(), "trailing text in '" + name + "' header");
    return int(count);
  }

  // fixed number of whitespace-separated fields
  std::vector<std::string> fields(int n, const std::string& what) {
    const std::string l = take(what);
    std::istringstream ss(l);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    if (int(out.size()) != n)
      fail(line_no(), "expected " + std::to_string(n) + " fields for " + what +
                          ", got " + std::to_string(out.size()));
    return out;
  }

  long long to_int(const std::string& tok, const std::string& what) {
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      fail(line_no(), "bad integer '" + tok + "' in " + what);
    return v;
  }

  double to_real(const std::string& tok, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      fail(line_no(), "bad real '" + tok + "' in " + what);
    return v;
  }

  bool to_flag(const std::string& tok, const std::string& what) {
    if (tok == "0") return false;
    if (tok == "1") return true;
    fail(line_no(), "expected 0 or 1 in " + what + ", got '" + tok + "'");
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mesh text format
// ---------------------------------------------------------------------------

std::string format_mesh(const MeshTopology& mesh) {
  std::string out;
  append_line(out, "ssd-mesh 1");

  append_line(out, "nodes " + std::to_string(mesh.nodes.size()));
  for (const Vec2& p : mesh.nodes)
    append_line(out, fmt17(p.x) + " " + fmt17(p.y));

  append_line(out, "cells " + std::to_string(mesh.cells.size()));
  for (const Cell& c : mesh.cells) {
    std::string l = "12";
    for (int k = 0; k < 12; ++k) l += " " + std::to_string(c.n[k]);
    l += c.rotating ? " 1" : " 0";
    append_line(out, l);
  }

  append_line(out,
              "interior_faces " + std::to_string(mesh.interior_faces.size()));
  for (const InteriorFace& f : mesh.interior_faces)
    append_line(out, std::to_string(f.cell_l) + " " + std::to_string(f.face_l) +
                         " " + std::to_string(f.cell_r) + " " +
                         std::to_string(f.face_r) + (f.periodic ? " 1" : " 0"));

  append_line(out,
              "boundary_faces " + std::to_string(mesh.boundary_faces.size()));
  for (const BoundaryFace& f : mesh.boundary_faces)
    append_line(out, std::to_string(f.cell) + " " + std::to_string(f.face) +
                         " " + std::to_string(f.bc));

  append_line(out, "tags " + std::to_string(mesh.n_bc_tags));
  append_line(out, std::string("interface ") + (mesh.has_interface ? "1" : "0"));
  if (mesh.has_interface) {
    append_line(out, "center " + fmt17(mesh.center.x) + " " +
                         fmt17(mesh.center.y));
    append_line(out, "radius " + fmt17(mesh.interface_radius));
    for (int side = 0; side < 2; ++side) {
      const auto& ring = side == 0 ? mesh.ring_rot : mesh.ring_sta;
      append_line(out, (side == 0 ? "ring_rot " : "ring_sta ") +
                           std::to_string(ring.size()));
      for (const RingFace& r : ring)
        append_line(out, std::to_string(r.cell) + " " +
                             std::to_string(r.face) + " " + fmt17(r.rev0) +
                             (r.reversed ? " 1" : " 0"));
    }
  }
  return out;
}

MeshTopology parse_mesh(const std::string& text, const std::string& origin) {
  Scanner sc(text, origin);
  MeshTopology mesh;

  const std::string head = sc.take("'ssd-mesh 1' header");
  if (head != "ssd-mesh 1")
    sc.fail(sc.line_no(), "expected 'ssd-mesh 1' header, got '" + head + "'");

  const int n_nodes = sc.header("nodes");
  mesh.nodes.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const auto f = sc.fields(2, "node " + std::to_string(i));
    mesh.nodes[i] = {sc.to_real(f[0], "node x"), sc.to_real(f[1], "node y")};
  }

  const int n_cells = sc.header("cells");
  mesh.cells.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    const auto f = sc.fields(14, "cell " + std::to_string(i));
    if (f[0] != "12")
      sc.fail(sc.line_no(), "only 12-node cells are supported, got " + f[0]);
    Cell& c = mesh.cells[i];
    for (int k = 0; k < 12; ++k) {
      const long long idx = sc.to_int(f[k + 1], "cell node index");
      if (idx < 0 || idx >= n_nodes)
        sc.fail(sc.line_no(), "cell " + std::to_string(i) + " node index " +
                                  std::to_string(idx) + " out of range");
      c.n[k] = int(idx);
    }
    c.rotating = sc.to_flag(f[13], "cell rotating flag");
  }

  const int n_int = sc.header("interior_faces");
  mesh.interior_faces.resize(n_int);
  for (int i = 0; i < n_int; ++i) {
    const auto f = sc.fields(5, "interior face " + std::to_string(i));
    InteriorFace& e = mesh.interior_faces[i];
    e.cell_l = int(sc.to_int(f[0], "interior face cell"));
    e.face_l = int(sc.to_int(f[1], "interior face index"));
    e.cell_r = int(sc.to_int(f[2], "interior face cell"));
    e.face_r = int(sc.to_int(f[3], "interior face index"));
    e.periodic = sc.to_flag(f[4], "interior face periodic flag");
  }

  const int n_bnd = sc.header("boundary_faces");
  mesh.boundary_faces.resize(n_bnd);
  for (int i = 0; i < n_bnd; ++i) {
    const auto f = sc.fields(3, "boundary face " + std::to_string(i));
    BoundaryFace& e = mesh.boundary_faces[i];
    e.cell = int(sc.to_int(f[0], "boundary face cell"));
    e.face = int(sc.to_int(f[1], "boundary face index"));
    e.bc = int(sc.to_int(f[2], "boundary tag"));
  }

  mesh.n_bc_tags = sc.header("tags");
  mesh.has_interface = sc.header("interface") != 0;
  if (mesh.has_interface) {
    {
      const auto f = sc.fields(3, "interface center");
      if (f[0] != "center")
        sc.fail(sc.line_no(), "expected 'center <x> <y>'");
      mesh.center = {sc.to_real(f[1], "center x"),
                     sc.to_real(f[2], "center y")};
    }
    {
      const auto f = sc.fields(2, "interface radius");
      if (f[0] != "radius") sc.fail(sc.line_no(), "expected 'radius <r>'");
      mesh.interface_radius = sc.to_real(f[1], "interface radius");
    }
    for (int side = 0; side < 2; ++side) {
      const int n = sc.header(side == 0 ? "ring_rot" : "ring_sta");
      auto& ring = side == 0 ? mesh.ring_rot : mesh.ring_sta;
      ring.resize(n);
      for (int i = 0; i < n; ++i) {
        const auto f = sc.fields(4, "ring face " + std::to_string(i));
        ring[i].cell = int(sc.to_int(f[0], "ring face cell"));
        ring[i].face = int(sc.to_int(f[1], "ring face index"));
        ring[i].rev0 = sc.to_real(f[2], "ring face angle");
        ring[i].reversed = sc.to_flag(f[3], "ring face reversal flag");
      }
    }
  }
  if (sc.next != sc.lines.size())
    sc.fail(int(sc.next) + 1, "trailing content after the mesh");

  validate_topology(mesh);
  return mesh;
}

void write_mesh_file(const MeshTopology& mesh, const std::string& path) {
  write_file(path, format_mesh(mesh));
}

MeshTopology read_mesh_file(const std::string& path) {
  return parse_mesh(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Topology validation
// ---------------------------------------------------------------------------

namespace {

// nodes met along the CCW walk of one face: corner, third, third, corner
std::array<int, 4> face_walk_nodes(const Cell& c, int face) {
  switch (face) {
    case 0: return {c.n[0], c.n[4], c.n[5], c.n[1]};
    case 1: return {c.n[1], c.n[6], c.n[7], c.n[2]};
    case 2: return {c.n[2], c.n[8], c.n[9], c.n[3]};
    default: return {c.n[3], c.n[10], c.n[11], c.n[0]};
  }
}

[[noreturn]] void bad_mesh(const std::string& msg) {
  throw std::runtime_error("mesh validation: " + msg);
}

}  // namespace

void validate_topology(const MeshTopology& mesh) {
  const int n_nodes = int(mesh.nodes.size());
  const int n_cells = int(mesh.cells.size());
  if (n_cells == 0) bad_mesh("mesh has no cells");

  double scale = 1.0;
  for (const Vec2& p : mesh.nodes)
    scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-12 * scale * 8.0;

  for (int i = 0; i < n_cells; ++i)
    for (int k = 0; k < 12; ++k)
      if (mesh.cells[i].n[k] < 0 || mesh.cells[i].n[k] >= n_nodes)
        bad_mesh("cell " + std::to_string(i) + " node index out of range");

  // every (cell, face) must appear exactly once across all face lists
  std::vector<int> seen(size_t(n_cells) * 4, 0);
  auto mark = [&](int cell, int face, const char* kind) {
    if (cell < 0 || cell >= n_cells || face < 0 || face >= 4)
      bad_mesh(std::string(kind) + " face refers to cell " +
               std::to_string(cell) + " face " + std::to_string(face) +
               " out of range");
    if (seen[size_t(cell) * 4 + face]++)
      bad_mesh("cell " + std::to_string(cell) + " face " +
               std::to_string(face) + " is listed twice");
  };
  for (const InteriorFace& f : mesh.interior_faces) {
    mark(f.cell_l, f.face_l, "interior");
    mark(f.cell_r, f.face_r, "interior");
  }
  for (const BoundaryFace& f : mesh.boundary_faces)
    mark(f.cell, f.face, "boundary");
  for (const RingFace& f : mesh.ring_rot) mark(f.cell, f.face, "ring");
  for (const RingFace& f : mesh.ring_sta) mark(f.cell, f.face, "ring");
  for (int c = 0; c < n_cells; ++c)
    for (int face = 0; face < 4; ++face)
      if (!seen[size_t(c) * 4 + face])
        bad_mesh("cell " + std::to_string(c) + " face " +
                 std::to_string(face) + " is not covered by any face list");

  // shared interior edges coincide geometrically, traversed in opposite
  // directions by the two incident cells
  for (size_t i = 0; i < mesh.interior_faces.size(); ++i) {
    const InteriorFace& f = mesh.interior_faces[i];
    if (f.periodic) continue;
    const auto a = face_walk_nodes(mesh.cells[f.cell_l], f.face_l);
    const auto b = face_walk_nodes(mesh.cells[f.cell_r], f.face_r);
    for (int k = 0; k < 4; ++k) {
      const Vec2 pa = mesh.nodes[a[k]];
      const Vec2 pb = mesh.nodes[b[3 - k]];
      if (std::abs(pa.x - pb.x) > tol || std::abs(pa.y - pb.y) > tol)
        bad_mesh("interior face " + std::to_string(i) + " (cells " +
                 std::to_string(f.cell_l) + "/" + std::to_string(f.cell_r) +
                 ") endpoints do not coincide");
    }
  }

  for (size_t i = 0; i < mesh.boundary_faces.size(); ++i)
    if (mesh.boundary_faces[i].bc < 0 ||
        mesh.boundary_faces[i].bc >= mesh.n_bc_tags)
      bad_mesh("boundary face " + std::to_string(i) + " tag " +
               std::to_string(mesh.boundary_faces[i].bc) +
               " outside [0, " + std::to_string(mesh.n_bc_tags) + ")");

  // rotating cells may meet stationary ones only across the sliding rings
  for (size_t i = 0; i < mesh.interior_faces.size(); ++i) {
    const InteriorFace& f = mesh.interior_faces[i];
    if (mesh.cells[f.cell_l].rotating != mesh.cells[f.cell_r].rotating)
      bad_mesh("interior face " + std::to_string(i) +
               " joins a rotating and a stationary cell");
  }

  if (!mesh.has_interface) {
    if (!mesh.ring_rot.empty() || !mesh.ring_sta.empty())
      bad_mesh("ring faces present without an interface");
    return;
  }
  if (mesh.interface_radius <= 0.0) bad_mesh("interface radius must be > 0");
  if (mesh.ring_rot.empty() || mesh.ring_rot.size() != mesh.ring_sta.size())
    bad_mesh("interface rings must be non-empty and equal in size");
  for (int side = 0; side < 2; ++side) {
    const auto& ring = side == 0 ? mesh.ring_rot : mesh.ring_sta;
    const char* name = side == 0 ? "ring_rot" : "ring_sta";
    const double span = 1.0 / double(ring.size());
    for (size_t i = 0; i < ring.size(); ++i) {
      const RingFace& r = ring[i];
      if (r.rev0 < 0.0 || r.rev0 >= 1.0)
        bad_mesh(std::string(name) + " angle outside [0,1) at entry " +
                 std::to_string(i));
      if (mesh.cells[r.cell].rotating != (side == 0))
        bad_mesh(std::string(name) + " entry " + std::to_string(i) +
                 " lies on a cell of the wrong sub-domain");
      const double expected = ring[0].rev0 + double(i) * span;
      if (std::abs(r.rev0 - expected) > 1e-12)
        bad_mesh(std::string(name) + " is not uniform in angle at entry " +
                 std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// VTK field snapshots
// ---------------------------------------------------------------------------

std::string format_fields(const SdDiscretization& disc,
                          const std::vector<double>& qt) {
  const int n = disc.order();
  const int nc = disc.n_cells();
  const GasModel& gas = disc.gas();
  const Operators& ops = disc.ops();
  const int pts_per_cell = n * n;
  const long long n_pts = (long long)nc * pts_per_cell;

  // reference-coordinate differentiation matrix on the solution points
  LagrangeBasis1D basis(ops.pts.solution_pts);
  std::vector<double> D(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    basis.derivatives_at(ops.pts.solution_pts[i], &D[size_t(i) * n]);

  std::string out;
  append_line(out, "# vtk DataFile Version 3.0");
  append_line(out, "flow field snapshot");
  append_line(out, "ASCII");
  append_line(out, "DATASET UNSTRUCTURED_GRID");

  append_line(out, "POINTS " + std::to_string(n_pts) + " double");
  for (int c = 0; c < nc; ++c) {
    const CellGeometry& g = disc.geometry().cell(c);
    for (int p = 0; p < pts_per_cell; ++p)
      append_line(out, fmt17(g.x_sp[p]) + " " + fmt17(g.y_sp[p]) + " 0");
  }

  const long long n_quads = (long long)nc * (n - 1) * (n - 1);
  append_line(out, "CELLS " + std::to_string(n_quads) + " " +
                       std::to_string(5 * n_quads));
  for (int c = 0; c < nc; ++c) {
    const long long base = (long long)c * pts_per_cell;
    for (int j = 0; j + 1 < n; ++j)
      for (int i = 0; i + 1 < n; ++i) {
        const long long p00 = base + j * n + i;
        append_line(out, "4 " + std::to_string(p00) + " " +
                             std::to_string(p00 + 1) + " " +
                             std::to_string(p00 + n + 1) + " " +
                             std::to_string(p00 + n));
      }
  }
  append_line(out, "CELL_TYPES " + std::to_string(n_quads));
  for (long long q = 0; q < n_quads; ++q) append_line(out, "9");

  // per-point scalars, assembled cell by cell in point order
  std::vector<std::vector<double>> scal(6);
  for (auto& s : scal) s.reserve(size_t(n_pts));
  std::vector<double> u(pts_per_cell), v(pts_per_cell);
  for (int c = 0; c < nc; ++c) {
    const CellGeometry& g = disc.geometry().cell(c);
    for (int p = 0; p < pts_per_cell; ++p) {
      const State q = disc.state_at(qt, c, p % n, p / n);
      u[p] = q.rho_u / q.rho;
      v[p] = q.rho_v / q.rho;
      const double pr = pressure(gas, q);
      const double speed = std::hypot(u[p], v[p]);
      scal[0].push_back(q.rho);
      scal[1].push_back(u[p]);
      scal[2].push_back(v[p]);
      scal[3].push_back(pr);
      scal[4].push_back(speed / std::sqrt(gas.gamma * pr / q.rho));
    }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double u_xi = 0.0, u_eta = 0.0, v_xi = 0.0, v_eta = 0.0;
        for (int k = 0; k < n; ++k) {
          u_xi += D[size_t(i) * n + k] * u[size_t(j) * n + k];
          v_xi += D[size_t(i) * n + k] * v[size_t(j) * n + k];
          u_eta += D[size_t(j) * n + k] * u[size_t(k) * n + i];
          v_eta += D[size_t(j) * n + k] * v[size_t(k) * n + i];
        }
        const int p = j * n + i;
        const double dvdx =
            (g.a1x_sp[p] * v_xi + g.a2x_sp[p] * v_eta) / g.jac_sp[p];
        const double dudy =
            (g.a1y_sp[p] * u_xi + g.a2y_sp[p] * u_eta) / g.jac_sp[p];
        scal[5].push_back(dvdx - dudy);
      }
  }

  append_line(out, "POINT_DATA " + std::to_string(n_pts));
  const char* names[6] = {"rho", "u", "v", "p", "mach", "vorticity"};
  for (int s = 0; s < 6; ++s) {
    append_line(out, std::string("SCALARS ") + names[s] + " double 1");
    append_line(out, "LOOKUP_TABLE default");
    for (double val : scal[s]) append_line(out, fmt17(val));
  }
  return out;
}

void write_fields(const SdDiscretization& disc, const std::vector<double>& qt,
                  const std::string& path) {
  write_file(path, format_fields(disc, qt));
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::map<std::string, int> where;  // key -> line it was set on

  std::istringstream ss(text);
  std::string raw;
  int line = 0;
  auto fail = [&](int ln, const std::string& msg) {
    throw ParseError(origin, ln, msg);
  };
  while (std::getline(ss, raw)) {
    ++line;
    std::string l = raw.substr(0, raw.find('#'));
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      const size_t a = s.find_first_not_of(ws);
      if (a == std::string::npos) return std::string();
      const size_t b = s.find_last_not_of(ws);
      return s.substr(a, b - a + 1);
    };
    l = trim(l);
    if (l.empty()) continue;
    const size_t eq = l.find('=');
    if (eq == std::string::npos)
      fail(line, "expected 'key = value', got '" + trim(raw) + "'");
    const std::string key = trim(l.substr(0, eq));
    const std::string val = trim(l.substr(eq + 1));
    if (key.empty()) fail(line, "missing key before '='");
    if (val.empty()) fail(line, "missing value for key '" + key + "'");
    if (where.count(key)) fail(line, "duplicate key '" + key + "'");
    where[key] = line;

    auto as_real = [&](const std::string& v) {
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (end == v.c_str() || *end != '\0')
        fail(line, "bad number '" + v + "' for key '" + key + "'");
      return x;
    };
    auto as_int = [&](const std::string& v) {
      char* end = nullptr;
      const long long x = std::strtoll(v.c_str(), &end, 10);
      if (end == v.c_str() || *end != '\0')
        fail(line, "bad integer '" + v + "' for key '" + key + "'");
      return int(x);
    };
    auto as_bool = [&](const std::string& v) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      fail(line, "bad boolean '" + v + "' for key '" + key +
                     "' (use true/false)");
      return false;
    };

    if (key == "case") cfg.case_name = val;
    else if (key == "order") cfg.order = as_int(val);
    else if (key == "dt") cfg.dt = as_real(val);
    else if (key == "cfl") cfg.cfl = as_real(val);
    else if (key == "t_end") cfg.t_end = as_real(val);
    else if (key == "level") cfg.level = as_int(val);
    else if (key == "mesh") cfg.mesh_file = val;
    else if (key == "output_dir") cfg.output_dir = val;
    else if (key == "output_every") cfg.output_every = as_real(val);
    else if (key == "instrument") cfg.instrument = as_bool(val);
    else if (key == "gamma") cfg.gamma = as_real(val);
    else if (key == "prandtl") cfg.prandtl = as_real(val);
    else if (key == "mach") cfg.mach = as_real(val);
    else if (key == "reynolds") cfg.reynolds = as_real(val);
    else fail(line, "unknown key '" + key + "'");
  }

  auto at = [&](const char* key) {
    auto it = where.find(key);
    return it == where.end() ? 0 : it->second;
  };
  if (cfg.case_name.empty()) fail(0, "config must set 'case'");
  if (cfg.case_name != "euler_vortex" && cfg.case_name != "taylor_couette" &&
      cfg.case_name != "cylinder" && cfg.case_name != "tank")
    fail(at("case"), "unknown case '" + cfg.case_name + "'");
  if (cfg.order < 1 || cfg.order > 10)
    fail(at("order"), "order must be in [1,10]");
  const bool has_dt = where.count("dt"), has_cfl = where.count("cfl");
  if (has_dt && has_cfl)
    fail(std::max(at("dt"), at("cfl")), "give exactly one of dt and cfl");
  if (!has_dt && !has_cfl) fail(0, "config must set dt or cfl");
  if (has_dt && cfg.dt <= 0.0) fail(at("dt"), "dt must be > 0");
  if (has_cfl && cfg.cfl <= 0.0) fail(at("cfl"), "cfl must be > 0");
  if (where.count("t_end") && cfg.t_end <= 0.0)
    fail(at("t_end"), "t_end must be > 0");
  if (cfg.level < 0 || cfg.level > 2)
    fail(at("level"), "level must be 0, 1, or 2");
  if (cfg.output_every < 0.0)
    fail(at("output_every"), "output_every must be >= 0");
  if (where.count("gamma") && cfg.gamma <= 1.0)
    fail(at("gamma"), "gamma must be > 1");
  if (where.count("prandtl") && cfg.prandtl <= 0.0)
    fail(at("prandtl"), "prandtl must be > 0");
  if (where.count("mach") && cfg.mach <= 0.0)
    fail(at("mach"), "mach must be > 0");
  if (where.count("reynolds") && cfg.reynolds <= 0.0)
    fail(at("reynolds"), "reynolds must be > 0");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Command line driver
// ---------------------------------------------------------------------------

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "--key value" pairs restricted to an allowed set; --help is value-free
struct CliArgs {
  std::map<std::string, std::string> kv;
  bool help = false;

  CliArgs(int argc, const char* const* argv, int first,
          const std::vector<std::string>& allowed) {
    for (int i = first; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--help" || a == "-h") {
        help = true;
        continue;
      }
      if (a.rfind("--", 0) != 0)
        throw CliError("unexpected argument '" + a + "'");
      const std::string key = a.substr(2);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw CliError("unknown option '--" + key + "'");
      if (i + 1 >= argc) throw CliError("option '--" + key + "' needs a value");
      if (kv.count(key)) throw CliError("option '--" + key + "' given twice");
      kv[key] = argv[++i];
    }
  }

  bool has(const std::string& k) const { return kv.count(k) != 0; }
  std::string str(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  int num(const std::string& k, int dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    char* end = nullptr;
    const long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
      throw CliError("option '--" + k + "' wants an integer, got '" +
                     it->second + "'");
    return int(v);
  }
  double real(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
      throw CliError("option '--" + k + "' wants a number, got '" +
                     it->second + "'");
    return v;
  }
};

const std::vector<std::pair<int, int>> kAnnulusLevels = {
    {24, 8}, {48, 16}, {96, 32}};

MeshTopology case_mesh(const std::string& case_name, int level) {
  if (case_name == "euler_vortex") {
    const VortexCase vc;
    const VortexLevel lv = vortex_levels()[level];
    return make_disk_box_mesh(vc.box, vc.disk_r, lv.m, lv.k_wrap, lv.k_ring);
  }
  if (case_name == "taylor_couette") {
    const CouetteCase cc;
    const auto [nt, nr] = kAnnulusLevels[level];
    return make_annulus_mesh(cc.r_i, cc.r_o, nt, nr, cc.r_interface);
  }
  if (case_name == "cylinder") {
    const CylinderDemoConfig d;
    return make_cylinder_mesh(d.ax, d.ay, d.disk_r, d.x0, d.x1, d.y0, d.y1,
                              d.m, d.k_o, d.k_ring);
  }
  if (case_name == "tank") {
    const TankDemoConfig d;
    return make_tank_mesh(d.r_shaft, d.r_wall, d.r_interface, d.n_theta(),
                          d.n_r, d.n_blades, d.blade_r0, d.blade_r1,
                          d.n_baffles, d.baffle_r0, d.baffle_r1);
  }
  throw CliError("unknown case '" + case_name + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
}

std::string snapshot_path(const std::string& dir, int index) {
  char b[32];
  std::snprintf(b, sizeof b, "fields_%04d.vtk", index);
  return dir + "/" + b;
}

void write_force_csv(const std::string& path,
                     const std::vector<ForceSample>& forces) {
  std::string out = "time, fx, fy, torque\n";
  char line[160];
  for (const ForceSample& f : forces) {
    std::snprintf(line, sizeof line, "%.10e, %.10e, %.10e, %.10e\n", f.t, f.fx,
                  f.fy, f.torque);
    out += line;
  }
  write_file(path, out);
}

int run_exact_case(const RunConfig& cfg) {
  const bool vortex = cfg.case_name == "euler_vortex";

  VortexCase vc;
  CouetteCase cc;
  GasModel gas{cfg.gamma, 1.0, 0.0, cfg.prandtl};
  std::vector<BoundaryCondition> bcs;
  double omega = 1.0;
  double t_end = cfg.t_end;
  if (vortex) {
    if (cfg.reynolds > 0.0)
      throw CliError("euler_vortex is inviscid; drop the reynolds key");
    if (cfg.mach > 0.0) vc.mach = cfg.mach;
    vc.p_inf = 1.0 / (cfg.gamma * vc.mach * vc.mach);
    omega = vc.omega;
    if (t_end < 0.0) t_end = 2.0;
  } else {
    if (cfg.mach > 0.0) cc.mach_i = cfg.mach;
    if (cfg.reynolds > 0.0) cc.reynolds = cfg.reynolds;
    cc.gamma = cfg.gamma;
    cc.prandtl = cfg.prandtl;
    gas = cc.gas();
    BoundaryCondition wall;
    wall.kind = BoundaryCondition::Kind::noslip_isothermal;
    wall.wall_temperature = cc.wall_temperature();
    bcs = {wall, wall};
    omega = cc.omega_i;
    if (t_end < 0.0) t_end = 3.0;
  }

  const MeshTopology mesh = cfg.mesh_file.empty()
                                ? case_mesh(cfg.case_name, cfg.level)
                                : read_mesh_file(cfg.mesh_file);
  if (mesh.n_bc_tags != int(bcs.size()))
    throw CliError("mesh carries " + std::to_string(mesh.n_bc_tags) +
                   " boundary tags but the case needs " +
                   std::to_string(bcs.size()));

  SdDiscretization disc(mesh, cfg.order, gas, bcs);
  std::vector<double> qt = disc.init_field([&](Vec2 p) {
    return vortex ? vc.exact(gas, p, 0.0) : cc.exact(p);
  });

  std::printf("case %s cells %d order %d\n", cfg.case_name.c_str(),
              disc.n_cells(), cfg.order);

  if (cfg.instrument) {
    const double dt =
        cfg.dt > 0.0 ? cfg.dt : cfg.cfl * disc.stable_dt(qt);
    std::vector<TimingRow> rows = {timed_run(disc, qt, omega, 100, dt)};
    std::fputs(timing_csv(rows).c_str(), stdout);
  }

  const bool snaps = cfg.output_every > 0.0;
  if (snaps) ensure_dir(cfg.output_dir);
  int snap = 0;
  if (snaps) write_fields(disc, qt, snapshot_path(cfg.output_dir, snap++));

  TimeMarcher m(disc, 0.0, omega);
  try {
    if (cfg.dt > 0.0) {
      const long long total = (long long)std::ceil(t_end / cfg.dt - 1e-12);
      const long long per_snap =
          snaps ? std::max<long long>(1, std::llround(cfg.output_every /
                                                      cfg.dt))
                : 0;
      for (long long s = 1; s <= total; ++s) {
        m.step(qt, s == total ? t_end - m.time() : cfg.dt);
        if (snaps && (s % per_snap == 0 || s == total)) {
          disc.set_pose(m.theta(), omega);
          write_fields(disc, qt, snapshot_path(cfg.output_dir, snap++));
        }
      }
      disc.set_pose(m.theta(), omega);
    } else {
      StepController ctrl;
      ctrl.cfl = cfg.cfl;
      const int n_chunks =
          snaps ? std::max(1, int(std::ceil(t_end / cfg.output_every - 1e-9)))
                : 1;
      for (int k = 1; k <= n_chunks; ++k) {
        m.advance_to(qt, t_end * k / n_chunks, ctrl);
        if (snaps)
          write_fields(disc, qt, snapshot_path(cfg.output_dir, snap++));
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed at t=%.6g after %lld steps: %s\n",
                 m.time(), m.steps_taken(), e.what());
    return 2;
  }

  const ErrorNorms en =
      vortex ? error_norms(disc, qt,
                           [&](const State& q, Vec2 pos) {
                             return q.rho - vc.exact(gas, pos, m.time()).rho;
                           })
             : error_norms(disc, qt, [&](const State& q, Vec2 pos) {
                 const double r = std::hypot(pos.x, pos.y);
                 return q.rho_u / q.rho - (-cc.vtheta(r) * pos.y / r);
               });
  std::printf("steps %lld final time %.10g\n", m.steps_taken(), m.time());
  std::printf("error vs exact (%s): L1 %.6e L2 %.6e\n",
              vortex ? "density" : "u", en.l1, en.l2);
  return 0;
}

int run_demo_case(const RunConfig& cfg) {
  if (!cfg.mesh_file.empty())
    throw CliError("demo cases build their own mesh; drop the mesh key");
  if (cfg.level != 0)
    throw CliError("demo cases build a single mesh; drop the level key");
  if (cfg.cfl > 0.0)
    throw CliError("demo cases use a fixed dt; give dt instead of cfl");
  if (cfg.gamma != 1.4 || cfg.prandtl != 0.72)
    throw CliError("demo cases fix gamma = 1.4 and prandtl = 0.72");

  ensure_dir(cfg.output_dir);
  SnapshotHook hook;
  if (cfg.output_every > 0.0) {
    const std::string dir = cfg.output_dir;
    hook = [dir](const SdDiscretization& d, const std::vector<double>& q,
                 double, int index) {
      write_fields(d, q, snapshot_path(dir, index));
    };
  }

  DemoResult res;
  if (cfg.case_name == "cylinder") {
    CylinderDemoConfig d;
    d.order = cfg.order;
    if (cfg.dt > 0.0) d.dt = cfg.dt;
    if (cfg.t_end > 0.0) d.t_end = cfg.t_end;
    if (cfg.mach > 0.0) d.mach = cfg.mach;
    if (cfg.reynolds > 0.0) d.reynolds = cfg.reynolds;
    d.snapshot_dt = cfg.output_every;
    std::printf("case cylinder order %d dt %.3e t_end %.6g\n", d.order, d.dt,
                d.t_end);
    res = run_cylinder_demo(d, hook);
  } else {
    TankDemoConfig d;
    d.order = cfg.order;
    if (cfg.dt > 0.0) d.dt = cfg.dt;
    if (cfg.t_end > 0.0) d.t_end = cfg.t_end;
    if (cfg.mach > 0.0) d.tip_mach = cfg.mach;
    if (cfg.reynolds > 0.0) d.reynolds = cfg.reynolds;
    d.snapshot_dt = cfg.output_every;
    std::printf("case tank order %d dt %.3e t_end %.6g\n", d.order, d.dt,
                d.t_end);
    res = run_tank_demo(d, hook);
  }

  write_force_csv(cfg.output_dir + "/forces.csv", res.forces);
  std::printf("force samples %zu -> %s/forces.csv\n", res.forces.size(),
              cfg.output_dir.c_str());
  if (!res.completed) {
    std::fprintf(stderr, "run failed: %s\n", res.note.c_str());
    return 2;
  }
  std::printf("completed\n");
  return 0;
}

int cmd_mesh(int argc, const char* const* argv) {
  const CliArgs a(argc, argv, 2, {"case", "level", "out", "check"});
  if (a.help) {
    std::puts(
        "usage: sdsolve mesh --case <name> [--level 0|1|2] --out <path>\n"
        "       sdsolve mesh --check <path>\n"
        "cases: euler_vortex taylor_couette cylinder tank\n"
        "Writes the generated mesh in the text format, or reads and\n"
        "validates an existing file.");
    return 0;
  }
  if (a.has("check")) {
    const MeshTopology mesh = read_mesh_file(a.str("check", ""));
    std::printf("ok: %zu cells, %zu nodes, %zu boundary faces, interface %s\n",
                mesh.cells.size(), mesh.nodes.size(),
                mesh.boundary_faces.size(),
                mesh.has_interface ? "yes" : "no");
    return 0;
  }
  if (!a.has("case") || !a.has("out"))
    throw CliError("mesh needs --case and --out (or --check); see --help");
  const int level = a.num("level", 0);
  if (level < 0 || level > 2) throw CliError("--level must be 0, 1, or 2");
  const MeshTopology mesh = case_mesh(a.str("case", ""), level);
  write_mesh_file(mesh, a.str("out", ""));
  std::printf("wrote %zu cells to %s\n", mesh.cells.size(),
              a.str("out", "").c_str());
  return 0;
}

int cmd_run(int argc, const char* const* argv) {
  const CliArgs a(argc, argv, 2, {"config"});
  if (a.help) {
    std::puts(
        "usage: sdsolve run --config <path>\n"
        "Integrates the configured case; see the config key list in the\n"
        "project README or include/ssd/io.hpp.");
    return 0;
  }
  if (!a.has("config")) throw CliError("run needs --config; see --help");
  const RunConfig cfg = load_run_config(a.str("config", ""));
  if (cfg.case_name == "cylinder" || cfg.case_name == "tank")
    return run_demo_case(cfg);
  return run_exact_case(cfg);
}

int cmd_convergence(int argc, const char* const* argv) {
  const CliArgs a(argc, argv, 2,
                  {"case", "order", "levels", "horizon", "t-end", "cfl"});
  if (a.help) {
    std::puts(
        "usage: sdsolve convergence --case <euler_vortex|taylor_couette>\n"
        "           [--order N] [--levels K] [--cfl C]\n"
        "           [--horizon T]   (taylor_couette: march horizon)\n"
        "           [--t-end T]     (euler_vortex: measurement time)\n"
        "Runs the refinement study and prints the CSV table.");
    return 0;
  }
  const std::string case_name = a.str("case", "");
  const int order = a.num("order", 4);
  const int levels = a.num("levels", 3);
  if (levels < 1 || levels > 3) throw CliError("--levels must be 1, 2, or 3");
  std::vector<ConvergenceRow> rows;
  if (case_name == "taylor_couette") {
    CouetteCase cc;
    CouetteStudyOptions opt;
    opt.order = order;
    opt.levels.assign(kAnnulusLevels.begin(), kAnnulusLevels.begin() + levels);
    opt.horizon = a.real("horizon", opt.horizon);
    opt.cfl = a.real("cfl", opt.cfl);
    rows = couette_convergence(cc, opt);
  } else if (case_name == "euler_vortex") {
    VortexCase vc;
    VortexStudyOptions opt;
    opt.order = order;
    const std::vector<VortexLevel> all = vortex_levels();
    opt.levels.assign(all.begin(), all.begin() + levels);
    opt.t_end = a.real("t-end", opt.t_end);
    opt.cfl0 = a.real("cfl", opt.cfl0);
    rows = vortex_convergence(vc, opt);
  } else {
    throw CliError("convergence needs --case euler_vortex or taylor_couette");
  }
  std::fputs(convergence_csv(rows).c_str(), stdout);
  for (const ConvergenceRow& r : rows)
    if (r.failed) return 2;
  return 0;
}

int cmd_timing(int argc, const char* const* argv) {
  const CliArgs a(argc, argv, 2, {"case", "order", "level", "steps", "cfl"});
  if (a.help) {
    std::puts(
        "usage: sdsolve timing --case <euler_vortex|taylor_couette>\n"
        "           [--order N] [--level 0|1|2] [--steps S] [--cfl C]\n"
        "Times S solver steps per mesh level (all levels when --level is\n"
        "omitted) and prints total and interface-exchange seconds as CSV.");
    return 0;
  }
  const std::string case_name = a.str("case", "");
  TimingOptions opt;
  opt.order = a.num("order", opt.order);
  opt.steps = a.num("steps", opt.steps);
  opt.cfl = a.real("cfl", opt.cfl);
  const int level = a.num("level", -1);
  if (level < -1 || level > 2) throw CliError("--level must be 0, 1, or 2");
  std::vector<TimingRow> rows;
  if (case_name == "taylor_couette") {
    std::vector<std::pair<int, int>> lv = kAnnulusLevels;
    if (level >= 0) lv = {kAnnulusLevels[level]};
    rows = couette_timing(CouetteCase{}, lv, opt);
  } else if (case_name == "euler_vortex") {
    std::vector<VortexLevel> lv = vortex_levels();
    if (level >= 0) lv = {vortex_levels()[level]};
    rows = vortex_timing(VortexCase{}, lv, opt);
  } else {
    throw CliError("timing needs --case euler_vortex or taylor_couette");
  }
  std::fputs(timing_csv(rows).c_str(), stdout);
  return 0;
}

const char* kTopUsage =
    "usage: sdsolve <command> [options]\n"
    "commands:\n"
    "  mesh          generate a benchmark mesh file, or --check one\n"
    "  run           integrate a case from a key = value config file\n"
    "  convergence   mesh-refinement study, CSV on stdout\n"
    "  timing        instrumented step timing, CSV on stdout\n"
    "run 'sdsolve <command> --help' for the command's options";

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    if (argc < 2) {
      std::puts(kTopUsage);
      return 1;
    }
    const std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "-h") {
      std::puts(kTopUsage);
      return 0;
    }
    if (cmd == "mesh") return cmd_mesh(argc, argv);
    if (cmd == "run") return cmd_run(argc, argv);
    if (cmd == "convergence") return cmd_convergence(argc, argv);
    if (cmd == "timing") return cmd_timing(argc, argv);
    std::fprintf(stderr, "unknown command '%s'\n%s\n", cmd.c_str(), kTopUsage);
    return 1;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const CliError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
}

}  // namespace ssd
