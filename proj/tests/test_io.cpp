#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ssd/bench.hpp"
#include "ssd/io.hpp"

using namespace ssd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_lines(const std::string& text, int n) {
  std::string out;
  int count = 0;
  for (char c : text) {
    out += c;
    if (c == '\n' && ++count == n) break;
  }
  return out;
}

// two unit quads side by side sharing the edge x = 1, each with its own
// copies of the shared-edge nodes so one side can be perturbed independently
MeshTopology two_cell_mesh() {
  MeshTopology mesh;
  auto quad = [&](double xa, double xb) {
    const int base = int(mesh.nodes.size());
    mesh.nodes.insert(mesh.nodes.end(),
                      {{xa, 0}, {xb, 0}, {xb, 1}, {xa, 1},
                       {xa + (xb - xa) / 3, 0}, {xa + 2 * (xb - xa) / 3, 0},
                       {xb, 1.0 / 3}, {xb, 2.0 / 3},
                       {xa + 2 * (xb - xa) / 3, 1}, {xa + (xb - xa) / 3, 1},
                       {xa, 2.0 / 3}, {xa, 1.0 / 3}});
    Cell c;
    for (int k = 0; k < 12; ++k) c.n[k] = base + k;
    c.rotating = false;
    mesh.cells.push_back(c);
  };
  quad(0.0, 1.0);
  quad(1.0, 2.0);
  mesh.interior_faces = {{0, 1, 1, 3, false}};
  mesh.boundary_faces = {{0, 0, 0}, {0, 2, 0}, {0, 3, 0},
                         {1, 0, 0}, {1, 1, 0}, {1, 2, 0}};
  mesh.n_bc_tags = 1;
  mesh.has_interface = false;
  return mesh;
}

}  // namespace

TEST_CASE("mesh text format round trips bit exactly") {
  const MeshTopology mesh = make_annulus_mesh(1.0, 2.0, 24, 8, 1.5);
  const std::string text = format_mesh(mesh);
  const MeshTopology back = parse_mesh(text, "round-trip");
  CHECK(format_mesh(back) == text);

  REQUIRE(back.nodes.size() == mesh.nodes.size());
  for (size_t i = 0; i < mesh.nodes.size(); ++i) {
    CHECK(back.nodes[i].x == mesh.nodes[i].x);  // bitwise, via %.17g
    CHECK(back.nodes[i].y == mesh.nodes[i].y);
  }
  CHECK(back.cells.size() == mesh.cells.size());
  CHECK(back.interior_faces.size() == mesh.interior_faces.size());
  CHECK(back.boundary_faces.size() == mesh.boundary_faces.size());
  CHECK(back.ring_rot.size() == mesh.ring_rot.size());
  CHECK(back.ring_sta.size() == mesh.ring_sta.size());
  CHECK(back.has_interface);
  CHECK(back.interface_radius == mesh.interface_radius);

  const std::string tmp = "/tmp/ssd_io_roundtrip.msh";
  write_mesh_file(mesh, tmp);
  CHECK(slurp(tmp) == text);
  const MeshTopology from_file = read_mesh_file(tmp);
  CHECK(format_mesh(from_file) == text);
  std::remove(tmp.c_str());
}

TEST_CASE("truncated and malformed mesh files fail with line context") {
  const std::string text = format_mesh(make_annulus_mesh(1.0, 2.0, 12, 4, 1.5));

  // cut mid-way through the node block: the error names the missing node
  const std::string cut = first_lines(text, 2 + 50);
  try {
    parse_mesh(cut, "cut");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("cut:") == 0);
    CHECK(std::string(e.what()).find("node") != std::string::npos);
    CHECK(e.line > 0);
  }

  CHECK_THROWS_AS(parse_mesh("not-a-mesh 1\n", "bad"), ParseError);
  CHECK_THROWS_AS(parse_mesh(text + "stray\n", "tail"), ParseError);

  // corrupt one node index out of range
  std::string broken = text;
  const size_t pos = broken.find("\n12 ");
  REQUIRE(pos != std::string::npos);
  broken.replace(pos, 5, "\n12 999999");
  CHECK_THROWS_WITH_AS(parse_mesh(broken, "idx"),
                       doctest::Contains("out of range"), ParseError);
}

TEST_CASE("topology validation pinpoints broken meshes") {
  CHECK_NOTHROW(validate_topology(two_cell_mesh()));

  // shared-edge node displaced on one side only
  {
    MeshTopology m = two_cell_mesh();
    m.nodes[12 + 10].x += 1e-3;  // cell 1, edge node on xi = 0
    CHECK_THROWS_WITH_AS(validate_topology(m),
                         doctest::Contains("interior face 0"),
                         std::runtime_error);
  }
  // a face missing from every list
  {
    MeshTopology m = two_cell_mesh();
    m.boundary_faces.pop_back();
    CHECK_THROWS_WITH_AS(validate_topology(m), doctest::Contains("not covered"),
                         std::runtime_error);
  }
  // the same face listed twice
  {
    MeshTopology m = two_cell_mesh();
    m.boundary_faces.push_back(m.boundary_faces.front());
    CHECK_THROWS_WITH_AS(validate_topology(m), doctest::Contains("twice"),
                         std::runtime_error);
  }
  // boundary tag outside the declared range
  {
    MeshTopology m = two_cell_mesh();
    m.boundary_faces.front().bc = 7;
    CHECK_THROWS_WITH_AS(validate_topology(m), doctest::Contains("tag"),
                         std::runtime_error);
  }
  // rotating flag flips across a plain interior face
  {
    MeshTopology m = two_cell_mesh();
    m.cells[0].rotating = true;
    CHECK_THROWS_WITH_AS(validate_topology(m),
                         doctest::Contains("rotating"), std::runtime_error);
  }
}

TEST_CASE("run config parses with line-precise diagnostics") {
  const RunConfig cfg = parse_run_config(
      "# vortex study\n"
      "case = euler_vortex\n"
      "order = 3\n"
      "\n"
      "dt = 1e-3   # fixed step\n"
      "t_end = 0.5\n"
      "level = 1\n"
      "output_dir = out\n"
      "output_every = 0.1\n"
      "instrument = true\n"
      "mach = 0.5\n",
      "good");
  CHECK(cfg.case_name == "euler_vortex");
  CHECK(cfg.order == 3);
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.cfl == 0.0);
  CHECK(cfg.t_end == 0.5);
  CHECK(cfg.level == 1);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.output_every == 0.1);
  CHECK(cfg.instrument);
  CHECK(cfg.mach == 0.5);

  auto line_of = [](const std::string& text) {
    try {
      parse_run_config(text, "cfg");
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  CHECK(line_of("case = euler_vortex\ncfl = 0.5\nwhat = 1\n") == 3);
  CHECK(line_of("case = euler_vortex\ncfl = 0.5\ncfl = 0.6\n") == 3);
  CHECK(line_of("case = euler_vortex\ndt = 1e-3\ncfl = 0.5\n") == 3);
  CHECK(line_of("case = euler_vortex\ncfl = nope\n") == 2);
  CHECK(line_of("case = euler_vortex\ncfl = 0.5\norder = 11\n") == 3);
  CHECK(line_of("case = lid_cavity\ncfl = 0.5\n") == 1);
  CHECK(line_of("case = euler_vortex\ncfl = 0.5\nbroken line\n") == 3);
  CHECK(line_of("case = euler_vortex\n") == 0);       // no dt, no cfl
  CHECK(line_of("cfl = 0.5\n") == 0);                 // no case
  CHECK(line_of("case = euler_vortex\ndt = -1\n") == 2);
}

TEST_CASE("field snapshots are deterministic and faithful") {
  const MeshTopology mesh = make_annulus_mesh(1.0, 2.0, 12, 4, 1.5);
  BoundaryCondition wall;
  wall.kind = BoundaryCondition::Kind::slip_wall;
  const GasModel gas{1.4, 1.0, 0.0, 0.72};
  SdDiscretization disc(mesh, 3, gas, {wall, wall});

  const State rest = {1.25, 0.0, 0.0, 2.5};
  const std::vector<double> qt = disc.init_field([&](Vec2) { return rest; });

  const std::string a = format_fields(disc, qt);
  const std::string b = format_fields(disc, qt);
  CHECK(a == b);

  // rho round-trips the stored samples (the Jacobian-weighted storage costs
  // at most an ulp against the constant); vorticity stays at zero
  std::istringstream ss(a);
  std::string line;
  bool in_rho = false, in_vort = false;
  int rho_count = 0;
  while (std::getline(ss, line)) {
    if (line.rfind("SCALARS", 0) == 0) {
      in_rho = line.find(" rho ") != std::string::npos;
      in_vort = line.find(" vorticity ") != std::string::npos;
      std::getline(ss, line);  // LOOKUP_TABLE
      continue;
    }
    if (in_rho && line.find(' ') == std::string::npos && !line.empty()) {
      CHECK(std::strtod(line.c_str(), nullptr) ==
            doctest::Approx(1.25).epsilon(1e-14));
      ++rho_count;
    }
    if (in_vort && line.find(' ') == std::string::npos && !line.empty())
      CHECK(std::abs(std::strtod(line.c_str(), nullptr)) < 1e-10);
  }
  CHECK(rho_count == disc.n_cells() * 9);

  // point coordinates re-parse to the geometry cache bit exactly
  std::istringstream ps(a);
  while (std::getline(ps, line) && line.rfind("POINTS", 0) != 0) {
  }
  std::getline(ps, line);
  double x = 0.0, y = 0.0;
  REQUIRE(std::sscanf(line.c_str(), "%lf %lf", &x, &y) == 2);
  CHECK(x == disc.geometry().cell(0).x_sp[0]);
  CHECK(y == disc.geometry().cell(0).y_sp[0]);
}

TEST_CASE("vortex snapshot carries the analytic density minimum") {
  const VortexCase vc;
  const GasModel gas{1.4, 1.0, 0.0, 0.72};
  const MeshTopology mesh = make_disk_box_mesh(vc.box, vc.disk_r, 6, 2, 4);
  SdDiscretization disc(mesh, 4, gas, {});
  const std::vector<double> qt =
      disc.init_field([&](Vec2 p) { return vc.exact(gas, p, 0.0); });

  double min_state = 1e30;
  for (int c = 0; c < disc.n_cells(); ++c)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i)
        min_state = std::min(min_state, disc.state_at(qt, c, i, j).rho);

  const std::string text = format_fields(disc, qt);
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line) && line.rfind("SCALARS rho", 0) != 0) {
  }
  std::getline(ss, line);  // LOOKUP_TABLE
  double min_vtk = 1e30;
  for (int k = 0; k < disc.n_cells() * 16; ++k) {
    REQUIRE(std::getline(ss, line));
    min_vtk = std::min(min_vtk, std::strtod(line.c_str(), nullptr));
  }
  CHECK(min_vtk == min_state);  // bitwise: %.17g round trip
  CHECK(min_vtk < 0.9);         // the dip is actually in the field
  CHECK(min_vtk > 0.85);
}

TEST_CASE("command line driver handles the basic flows") {
  auto run = [](std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"sdsolve"};
    argv.insert(argv.end(), args.begin(), args.end());
    return cli_main(int(argv.size()), argv.data());
  };

  CHECK(run({"--help"}) == 0);
  CHECK(run({"mesh", "--help"}) == 0);
  CHECK(run({"run", "--help"}) == 0);
  CHECK(run({"convergence", "--help"}) == 0);
  CHECK(run({"timing", "--help"}) == 0);

  CHECK(run({"definitely-not-a-command"}) == 1);
  CHECK(run({"mesh", "--case", "euler_vortex"}) == 1);    // missing --out
  CHECK(run({"mesh", "--frobnicate", "1"}) == 1);         // unknown option
  CHECK(run({"run", "--config", "/tmp/ssd_no_such.cfg"}) == 1);
  CHECK(run({"convergence", "--case", "lid_cavity"}) == 1);

  const std::string mfile = "/tmp/ssd_io_cli.msh";
  CHECK(run({"mesh", "--case", "taylor_couette", "--level", "0", "--out",
             mfile.c_str()}) == 0);
  CHECK(run({"mesh", "--check", mfile.c_str()}) == 0);

  const std::string cfile = "/tmp/ssd_io_cli.cfg";
  {
    std::ofstream out(cfile);
    out << "case = taylor_couette\norder = 2\ncfl = 0.8\nt_end = 0.01\n"
        << "mesh = " << mfile << "\n";
  }
  CHECK(run({"run", "--config", cfile.c_str()}) == 0);

  {
    std::ofstream out(cfile);
    out << "case = taylor_couette\ncfl = 0.8\nmesh = /tmp/ssd_gone.msh\n";
  }
  CHECK(run({"run", "--config", cfile.c_str()}) == 1);

  std::remove(mfile.c_str());
  std::remove(cfile.c_str());
}
