#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ssd/time_march.hpp"

using namespace ssd;

namespace {

GasModel euler_gas() { return {1.4, 1.0, 0.0, 0.72}; }

MeshTopology periodic_box_mesh(int k) {
  MeshTopology m;
  m.cells.resize(size_t(k) * k);
  auto grid = [&](int i3) { return double(i3) / (3.0 * k); };
  auto add_node = [&](double x, double y) {
    m.nodes.push_back({x, y});
    return int(m.nodes.size()) - 1;
  };
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      const double x0 = grid(3 * i), x1 = grid(3 * i + 1),
                   x2 = grid(3 * i + 2), x3 = grid(3 * i + 3);
      const double y0 = grid(3 * j), y1 = grid(3 * j + 1),
                   y2 = grid(3 * j + 2), y3 = grid(3 * j + 3);
      Cell& c = m.cells[size_t(j) * k + i];
      c.n = {add_node(x0, y0), add_node(x3, y0), add_node(x3, y3),
             add_node(x0, y3), add_node(x1, y0), add_node(x2, y0),
             add_node(x3, y1), add_node(x3, y2), add_node(x2, y3),
             add_node(x1, y3), add_node(x0, y2), add_node(x0, y1)};
    }
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      const int c = j * k + i;
      m.interior_faces.push_back({c, 1, j * k + (i + 1) % k, 3, i + 1 == k});
      m.interior_faces.push_back({c, 2, ((j + 1) % k) * k + i, 0, j + 1 == k});
    }
  return m;
}

// integrate u' = cos(t) u (exact: exp(sin t)) with n equal steps
double ode_error(int n) {
  std::vector<double> u = {1.0};
  const double dt = 1.0 / n;
  OdeRhs f = [](const std::vector<double>& q, double t,
                std::vector<double>& out) {
    out.resize(1);
    out[0] = std::cos(t) * q[0];
  };
  for (int s = 0; s < n; ++s) ssprk54_step(f, u, s * dt, dt);
  return std::abs(u[0] - std::exp(std::sin(1.0)));
}

}  // namespace

TEST_CASE("the scheme integrates a scalar problem at fourth order") {
  const double e1 = ode_error(16);
  const double e2 = ode_error(32);
  const double e3 = ode_error(64);
  const double s12 = std::log2(e1 / e2);
  const double s23 = std::log2(e2 / e3);
  CAPTURE(e1);
  CAPTURE(e2);
  CAPTURE(e3);
  CHECK(s12 == doctest::Approx(4.0).epsilon(0.02));
  CHECK(s23 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("halving the step cuts the decay-problem error sixteenfold") {
  auto decay_err = [](int n) {
    std::vector<double> u = {1.0};
    OdeRhs f = [](const std::vector<double>& q, double,
                  std::vector<double>& out) {
      out.assign(1, -q[0]);
    };
    for (int s = 0; s < n; ++s) ssprk54_step(f, u, s * (1.0 / n), 1.0 / n);
    return std::abs(u[0] - std::exp(-1.0));
  };
  const double ratio = decay_err(8) / decay_err(16);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("marching conserves the totals on a periodic box") {
  const MeshTopology mesh = periodic_box_mesh(4);
  const GasModel gas = euler_gas();
  SdDiscretization sol(mesh, 3, gas, {});
  auto qt = sol.init_field([&](Vec2 p) {
    return cons_from_prim(gas, 1.0 + 0.15 * std::sin(2 * M_PI * p.x),
                          0.3 + 0.1 * std::cos(2 * M_PI * p.y), 0.1,
                          1.0 + 0.1 * std::sin(2 * M_PI * p.y));
  });
  const auto& w = sol.ops().sp_weights;
  const int n = sol.order();
  auto totals = [&](const std::vector<double>& q) {
    std::array<double, 4> tot{0, 0, 0, 0};
    for (int c = 0; c < sol.n_cells(); ++c)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < 4; ++k)
            tot[k] += w[i] * w[j] * q[((size_t(c) * n + j) * n + i) * 4 + k];
    return tot;
  };
  const auto before = totals(qt);
  TimeMarcher march(sol, 0.0, 0.0);
  StepController ctrl;
  ctrl.cfl = 0.4;
  const long long steps = march.advance_to(qt, 0.05, ctrl);
  CHECK(steps > 3);
  CHECK(march.time() == 0.05);
  const auto after = totals(qt);
  for (int k = 0; k < 4; ++k) {
    CAPTURE(k);
    CHECK(std::abs(after[k] - before[k]) < 1e-12 * double(steps + 1));
  }
}

TEST_CASE("a spinning ring preserves uniform flow while marching") {
  const MeshTopology mesh = make_annulus_mesh(1.0, 2.0, 24, 8, 1.5);
  const GasModel gas = euler_gas();
  const State qf = cons_from_prim(gas, 1.0, 0.3, 0.2, 1.0);
  BoundaryCondition bc;
  bc.kind = BoundaryCondition::Kind::exact_state;
  bc.state = [qf](Vec2, double) { return qf; };
  SdDiscretization sol(mesh, 4, gas, {bc, bc});
  auto qt = sol.init_field([qf](Vec2) { return qf; });
  TimeMarcher march(sol, 0.2, 2.0);
  StepController ctrl;
  ctrl.cfl = 0.5;
  for (int s = 0; s < 20; ++s) march.step(qt, 0.4 * sol.stable_dt(qt));
  double worst = 0.0;
  for (int c = 0; c < sol.n_cells(); ++c)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        const State q = sol.state_at(qt, c, i, j);
        for (int k = 0; k < 4; ++k)
          worst = std::max(worst, std::abs(q[k] - qf[k]));
      }
  CHECK(worst < 1e-10);
  CHECK(march.theta() == doctest::Approx(0.2 + 2.0 * march.time()));
}

TEST_CASE("advancing restores the pose at the target time") {
  const GasModel gas = euler_gas();
  const MeshTopology mesh = make_annulus_mesh(1.0, 2.0, 12, 4, 1.5);
  BoundaryCondition bc;
  bc.kind = BoundaryCondition::Kind::slip_wall;
  SdDiscretization sol(mesh, 3, gas, {bc, bc});
  auto qt = sol.init_field(
      [&](Vec2) { return cons_from_prim(gas, 1.0, 0.0, 0.0, 1.0); });

  // remember a rotating cell's first solution point at the initial pose
  int rot = -1;
  for (int c = 0; c < sol.n_cells(); ++c)
    if (mesh.cells[c].rotating) {
      rot = c;
      break;
    }
  REQUIRE(rot >= 0);
  const double x0 = sol.geometry().cell(rot).x_sp[0];
  const double y0 = sol.geometry().cell(rot).y_sp[0];

  TimeMarcher march(sol, 0.0, 2.0);
  StepController ctrl;
  ctrl.cfl = 0.4;
  march.advance_to(qt, 0.07, ctrl);

  // the point must sit exactly at the rotation of its initial position
  const double th = march.theta();
  const double xr = std::cos(th) * x0 - std::sin(th) * y0;
  const double yr = std::sin(th) * x0 + std::cos(th) * y0;
  CHECK(std::abs(sol.geometry().cell(rot).x_sp[0] - xr) < 1e-12);
  CHECK(std::abs(sol.geometry().cell(rot).y_sp[0] - yr) < 1e-12);
}

TEST_CASE("marching rejects a backwards target") {
  const MeshTopology mesh = periodic_box_mesh(2);
  const GasModel gas = euler_gas();
  SdDiscretization sol(mesh, 3, gas, {});
  auto qt = sol.init_field(
      [&](Vec2) { return cons_from_prim(gas, 1.0, 0.1, 0.0, 1.0); });
  TimeMarcher march(sol, 0.0, 0.0);
  StepController ctrl;
  march.advance_to(qt, 1e-4, ctrl);
  CHECK_THROWS_AS(march.advance_to(qt, 5e-5, ctrl), std::invalid_argument);
}
