#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ssd/mesh.hpp"
#include "ssd/solver.hpp"

namespace ssd {

// Error in a line-oriented text input. `line` is 1-based; 0 means the problem
// is not tied to a single line. what() already includes origin and line.
struct ParseError : std::runtime_error {
  ParseError(const std::string& origin, int line_no, const std::string& msg)
      : std::runtime_error(origin + (line_no > 0 ? ":" + std::to_string(line_no)
                                                 : "") +
                           ": " + msg),
        line(line_no) {}
  int line = 0;
};

// ---------------------------------------------------------------------------
// Mesh text format
//
//   ssd-mesh 1
//   nodes <count>        one "x y" per line, 17 significant digits
//   cells <count>        one "12 i0 .. i11 r" per line, r = 1 if rotating
//   interior_faces <count>   "cell_l face_l cell_r face_r periodic"
//   boundary_faces <count>   "cell face tag"
//   tags <n_bc_tags>
//   interface <0|1>
//   [center <x> <y>, radius <r>, then ring_rot / ring_sta blocks of
//    "cell face rev0 reversed" lines, angle-sorted]
//
// Writing then reading reproduces every double bit-exactly.
// ---------------------------------------------------------------------------
std::string format_mesh(const MeshTopology& mesh);
MeshTopology parse_mesh(const std::string& text,
                        const std::string& origin = "mesh");
void write_mesh_file(const MeshTopology& mesh, const std::string& path);
MeshTopology read_mesh_file(const std::string& path);

// Structural invariants: index ranges, every (cell, face) covered exactly once
// by interior/boundary/ring lists, shared interior edges geometrically
// coincident, rotating flags consistent with the interface rings. Throws
// std::runtime_error naming the offending cell/face.
void validate_topology(const MeshTopology& mesh);

// ---------------------------------------------------------------------------
// Field snapshots: legacy-ASCII VTK unstructured grid. Each cell is split
// into (N-1)^2 quads on its solution points; point data are density,
// velocity, pressure, Mach number, and vorticity. Output is deterministic.
// ---------------------------------------------------------------------------
std::string format_fields(const SdDiscretization& disc,
                          const std::vector<double>& qt);
void write_fields(const SdDiscretization& disc, const std::vector<double>& qt,
                  const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration: "key = value" per line, '#' comments. Keys:
//   case        euler_vortex | taylor_couette | cylinder | tank   (required)
//   order       scheme order, 1..10                    (default 4)
//   dt | cfl    fixed step or CFL number — exactly one (required)
//   t_end       final time                             (default per case)
//   level       refinement level 0..2, generator cases (default 0)
//   mesh        mesh file path, replaces the generator (optional)
//   output_dir  snapshot/report directory              (default ".")
//   output_every  snapshot cadence in time units, 0 = no snapshots
//   instrument  true/false: print a 100-step timing row before the run
//   gamma, prandtl, mach, reynolds   gas/case overrides
// ---------------------------------------------------------------------------
struct RunConfig {
  std::string case_name;
  int order = 4;
  double dt = 0.0;
  double cfl = 0.0;
  double t_end = -1.0;  // < 0: use the case default
  int level = 0;
  std::string mesh_file;
  std::string output_dir = ".";
  double output_every = 0.0;
  bool instrument = false;
  double gamma = 1.4;
  double prandtl = 0.72;
  double mach = -1.0;      // < 0: case default
  double reynolds = -1.0;  // < 0: case default
};

RunConfig parse_run_config(const std::string& text,
                           const std::string& origin = "config");
RunConfig load_run_config(const std::string& path);

// Command-line driver behind the sdsolve tool. Subcommands: mesh, run,
// convergence, timing; each understands --help. Returns 0 on success, 1 on
// usage/configuration errors, 2 when a solver run fails.
int cli_main(int argc, const char* const* argv);

}  // namespace ssd
