#include "ssd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ssd/basis.hpp"

namespace ssd {

namespace {

// composite interpolatory quadrature, machine-accurate for the smooth radial
// integrands below
template <class F>
double integrate(const F& f, double a, double b) {
  static const Operators op = make_operators(10);
  const int panels = 24;
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < op.order; ++i)
      s += h * op.sp_weights[i] * f(a + (p + op.pts.solution_pts[i]) * h);
  return s;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Reference solutions
// ---------------------------------------------------------------------------

State VortexCase::exact(const GasModel& gas, Vec2 pos, double t) const {
  const double ub = u_inf * std::cos(theta);
  const double vb = u_inf * std::sin(theta);
  // relative coordinates, wrapped back into the box
  double xr = pos.x - x0 - ub * t;
  double yr = pos.y - y0 - vb * t;
  xr -= std::floor((xr + x0) / box) * box;
  yr -= std::floor((yr + y0) / box) * box;

  const double q2 = (1.0 - xr * xr - yr * yr) / (2.0 * r_c * r_c);
  const double ex = std::exp(q2);
  const double u = u_inf * (std::cos(theta) - eps * yr / r_c * ex);
  const double v = u_inf * (std::sin(theta) + eps * xr / r_c * ex);
  const double em = eps * mach;
  const double base =
      1.0 - 0.5 * (gas.gamma - 1.0) * em * em * std::exp(2.0 * q2);
  const double rho = rho_inf * std::pow(base, 1.0 / (gas.gamma - 1.0));
  const double p = p_inf * std::pow(base, gas.gamma / (gas.gamma - 1.0));
  return cons_from_prim(gas, rho, u, v, p);
}

double CouetteCase::vtheta(double r) const {
  return omega_i * r_i * (r_o / r - r / r_o) / (r_o / r_i - r_i / r_o);
}

double CouetteCase::temperature(double r) const {
  const double d = r_o / r_i - r_i / r_o;
  const double b = omega_i * r_i * r_o / d;
  const GasModel g = gas();
  // conduction balances the dissipation of the tangential shear
  const double a = g.mu * b * b / g.conductivity();
  const double c1 =
      -a * (1.0 / (r_i * r_i) - 1.0 / (r_o * r_o)) / std::log(r_o / r_i);
  return wall_temperature() + a * (1.0 / (r_i * r_i) - 1.0 / (r * r)) +
         c1 * std::log(r / r_i);
}

double CouetteCase::pressure(double r) const {
  // radial momentum balance dp/dr = rho vtheta^2 / r with rho = p/(R T);
  // the level is set by rho(r_i) = 1
  const double p_i = gas_constant * wall_temperature();
  const double expo = integrate(
      [this](double s) {
        const double v = vtheta(s);
        return v * v / (s * gas_constant * temperature(s));
      },
      r_i, r);
  return p_i * std::exp(expo);
}

State CouetteCase::exact(Vec2 pos) const {
  const double r = std::hypot(pos.x, pos.y);
  if (r < r_i * (1.0 - 1e-3) || r > r_o * (1.0 + 1e-3))
    throw std::domain_error("annular exact solution queried at r=" +
                            std::to_string(r) + " outside [" +
                            std::to_string(r_i) + ", " + std::to_string(r_o) +
                            "]");
  const double v = vtheta(r);
  const double p = pressure(r);
  const double t = temperature(r);
  return cons_from_prim(gas(), p / (gas_constant * t), -v * pos.y / r,
                        v * pos.x / r, p);
}

// ---------------------------------------------------------------------------
// Error norms and tables
// ---------------------------------------------------------------------------

ErrorNorms error_norms(
    const SdDiscretization& disc, const std::vector<double>& qt,
    const std::function<double(const State&, Vec2)>& sample) {
  const int n = disc.order();
  double s1 = 0.0, s2 = 0.0;
  long long count = 0;
  for (int c = 0; c < disc.n_cells(); ++c) {
    const CellGeometry& g = disc.geometry().cell(c);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int p = j * n + i;
        const double e =
            sample(disc.state_at(qt, c, i, j), {g.x_sp[p], g.y_sp[p]});
        s1 += std::abs(e);
        s2 += e * e;
        ++count;
      }
  }
  ErrorNorms out;
  out.l1 = s1 / double(count);
  out.l2 = std::sqrt(s2 / double(count));
  if (out.l2 < out.l1 * (1.0 - 1e-12))
    throw std::logic_error("error norms violate L2 >= L1");
  return out;
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
  for (size_t k = 1; k < rows.size(); ++k) {
    ConvergenceRow& cur = rows[k];
    const ConvergenceRow& prev = rows[k - 1];
    if (cur.failed || prev.failed) continue;
    // mesh ratio from cell counts of the successive refinement levels
    const double ratio = std::sqrt(double(cur.cells) / double(prev.cells));
    if (!(ratio > 1.0)) continue;
    if (prev.l1 > 0.0 && cur.l1 > 0.0)
      cur.l1_order = std::log(prev.l1 / cur.l1) / std::log(ratio);
    if (prev.l2 > 0.0 && cur.l2 > 0.0)
      cur.l2_order = std::log(prev.l2 / cur.l2) / std::log(ratio);
  }
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "cells, L1 error, order, L2 error, order\n";
  char line[256];
  for (const ConvergenceRow& r : rows) {
    if (r.failed) {
      std::snprintf(line, sizeof line, "%d, failed: %s, -, -, -\n", r.cells,
                    sanitize(r.note).c_str());
      out += line;
      continue;
    }
    auto ord = [](double o) {
      char b[32];
      if (o == 0.0 || !std::isfinite(o)) return std::string("-");
      std::snprintf(b, sizeof b, "%.2f", o);
      return std::string(b);
    };
    std::snprintf(line, sizeof line, "%d, %.6e, %s, %.6e, %s\n", r.cells, r.l1,
                  ord(r.l1_order).c_str(), r.l2, ord(r.l2_order).c_str());
    out += line;
  }
  return out;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::string out = "cells, total time, comm. time, percentage\n";
  char line[128];
  for (const TimingRow& r : rows) {
    std::snprintf(line, sizeof line, "%d, %.6f, %.6f, %.2f%%\n", r.cells,
                  r.total_seconds, r.comm_seconds, r.percent());
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convergence drivers
// ---------------------------------------------------------------------------

std::vector<ConvergenceRow> vortex_convergence(const VortexCase& vc,
                                               const VortexStudyOptions& opt) {
  std::vector<ConvergenceRow> rows;
  const GasModel gas{1.4, 1.0, 0.0, 0.72};
  for (const VortexLevel& lv : opt.levels) {
    ConvergenceRow row;
    try {
      const MeshTopology mesh =
          make_disk_box_mesh(vc.box, vc.disk_r, lv.m, lv.k_wrap, lv.k_ring);
      row.cells = int(mesh.cells.size());
      SdDiscretization disc(mesh, opt.order, gas, {});
      const std::vector<double> qt0 =
          disc.init_field([&](Vec2 p) { return vc.exact(gas, p, 0.0); });

      auto run = [&](double dt_req) {
        const long long steps =
            std::max<long long>(1, (long long)std::ceil(opt.t_end / dt_req));
        const double dt = opt.t_end / double(steps);
        TimeMarcher m(disc, 0.0, vc.omega);
        std::vector<double> qt = qt0;
        for (long long s = 0; s < steps; ++s) m.step(qt, dt);
        disc.set_pose(m.theta(), vc.omega);
        return error_norms(disc, qt, [&](const State& q, Vec2 pos) {
          return q.rho - vc.exact(gas, pos, opt.t_end).rho;
        });
      };

      // halve the step until the error is spatially dominated
      double dt = opt.cfl0 * disc.stable_dt(qt0);
      ErrorNorms prev = run(dt);
      ErrorNorms accepted = prev;
      bool settled = opt.max_halvings == 0;
      for (int h = 1; h <= opt.max_halvings; ++h) {
        dt *= 0.5;
        const ErrorNorms cur = run(dt);
        const bool close =
            std::abs(cur.l2 - prev.l2) <= opt.halving_tol * cur.l2;
        prev = cur;
        accepted = cur;
        if (close) {
          settled = true;
          break;
        }
      }
      if (!settled) row.note = "step-size refinement still changing the error";
      row.l1 = accepted.l1;
      row.l2 = accepted.l2;
    } catch (const std::exception& e) {
      row.failed = true;
      row.note = e.what();
    }
    rows.push_back(row);
    if (opt.on_row) opt.on_row(rows.back());
  }
  fill_orders(rows);
  return rows;
}

std::vector<ConvergenceRow> couette_convergence(
    const CouetteCase& cc, const CouetteStudyOptions& opt) {
  std::vector<ConvergenceRow> rows;
  const GasModel gas = cc.gas();
  BoundaryCondition wall;
  wall.kind = BoundaryCondition::Kind::noslip_isothermal;
  wall.wall_temperature = cc.wall_temperature();
  for (const auto& [nt, nr] : opt.levels) {
    ConvergenceRow row;
    row.cells = nt * nr;
    try {
      const MeshTopology mesh =
          make_annulus_mesh(cc.r_i, cc.r_o, nt, nr, cc.r_interface);
      SdDiscretization disc(mesh, opt.order, gas, {wall, wall});
      std::vector<double> qt =
          disc.init_field([&](Vec2 p) { return cc.exact(p); });
      TimeMarcher m(disc, 0.0, cc.omega_i);
      StepController ctrl;
      ctrl.cfl = opt.cfl;

      // march to the fixed horizon in chunks; stop early once the residual
      // max-norm says the state is steady
      const int chunks = 12;
      std::vector<double> res;
      for (int k = 1; k <= chunks; ++k) {
        m.advance_to(qt, opt.horizon * k / chunks, ctrl);
        disc.residual(qt, m.time(), res);
        double rmax = 0.0;
        for (const double v : res) rmax = std::max(rmax, std::abs(v));
        if (rmax < opt.residual_tol) break;
      }

      auto norms_now = [&] {
        return error_norms(disc, qt, [&](const State& q, Vec2 pos) {
          const double r = std::hypot(pos.x, pos.y);
          return q.rho_u / q.rho - (-cc.vtheta(r) * pos.y / r);
        });
      };

      // the settled interface error is periodic in the sliding alignment
      // (one face pitch of relative rotation), so sample the norms across a
      // full pitch and report their means instead of one arbitrary pose
      const int poses = std::max(1, opt.alignment_samples);
      const double pitch =
          2.0 * 3.14159265358979323846 / nt / std::abs(cc.omega_i);
      const double t0 = m.time();
      double l1 = 0.0, l2 = 0.0;
      for (int s = 0; s < poses; ++s) {
        if (s > 0) m.advance_to(qt, t0 + s * pitch / poses, ctrl);
        const ErrorNorms en = norms_now();
        l1 += en.l1;
        l2 += en.l2;
      }
      row.l1 = l1 / poses;
      row.l2 = l2 / poses;
    } catch (const std::exception& e) {
      row.failed = true;
      row.note = e.what();
    }
    rows.push_back(row);
    if (opt.on_row) opt.on_row(rows.back());
  }
  fill_orders(rows);
  return rows;
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

TimingRow timed_run(SdDiscretization& disc, std::vector<double> qt,
                    double omega, int steps, double dt) {
  TimeMarcher m(disc, 0.0, omega);
  disc.mortar().reset_comm_time();
  const auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < steps; ++s) m.step(qt, dt);
  const auto t1 = std::chrono::steady_clock::now();
  TimingRow row;
  row.cells = disc.n_cells();
  row.total_seconds = std::chrono::duration<double>(t1 - t0).count();
  row.comm_seconds = disc.mortar().comm_seconds();
  return row;
}

std::vector<TimingRow> vortex_timing(const VortexCase& vc,
                                     const std::vector<VortexLevel>& levels,
                                     const TimingOptions& opt) {
  std::vector<TimingRow> rows;
  const GasModel gas{1.4, 1.0, 0.0, 0.72};
  for (const VortexLevel& lv : levels) {
    const MeshTopology mesh =
        make_disk_box_mesh(vc.box, vc.disk_r, lv.m, lv.k_wrap, lv.k_ring);
    SdDiscretization disc(mesh, opt.order, gas, {});
    const std::vector<double> qt =
        disc.init_field([&](Vec2 p) { return vc.exact(gas, p, 0.0); });
    rows.push_back(timed_run(disc, qt, vc.omega, opt.steps,
                             opt.cfl * disc.stable_dt(qt)));
  }
  return rows;
}

std::vector<TimingRow> couette_timing(
    const CouetteCase& cc, const std::vector<std::pair<int, int>>& levels,
    const TimingOptions& opt) {
  std::vector<TimingRow> rows;
  const GasModel gas = cc.gas();
  BoundaryCondition wall;
  wall.kind = BoundaryCondition::Kind::noslip_isothermal;
  wall.wall_temperature = cc.wall_temperature();
  for (const auto& [nt, nr] : levels) {
    const MeshTopology mesh =
        make_annulus_mesh(cc.r_i, cc.r_o, nt, nr, cc.r_interface);
    SdDiscretization disc(mesh, opt.order, gas, {wall, wall});
    const std::vector<double> qt =
        disc.init_field([&](Vec2 p) { return cc.exact(p); });
    rows.push_back(timed_run(disc, qt, cc.omega_i, opt.steps,
                             opt.cfl * disc.stable_dt(qt)));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Demonstrations
// ---------------------------------------------------------------------------

DemoResult run_cylinder_demo(const CylinderDemoConfig& cfg,
                             const SnapshotHook& hook) {
  DemoResult out;
  try {
    const MeshTopology mesh =
        make_cylinder_mesh(cfg.ax, cfg.ay, cfg.disk_r, cfg.x0, cfg.x1, cfg.y0,
                           cfg.y1, cfg.m, cfg.k_o, cfg.k_ring);
    const GasModel gas{1.4, 1.0, cfg.mu(), 0.72};
    const State inflow = cons_from_prim(gas, 1.0, 1.0, 0.0, cfg.p_inf());

    BoundaryCondition wall;
    wall.kind = BoundaryCondition::Kind::noslip_adiabatic;
    BoundaryCondition in;
    in.kind = BoundaryCondition::Kind::exact_state;
    in.state = [inflow](Vec2, double) { return inflow; };
    BoundaryCondition outlet;
    outlet.kind = BoundaryCondition::Kind::pressure_outlet;
    outlet.outlet_pressure = cfg.p_inf();
    BoundaryCondition slip;
    slip.kind = BoundaryCondition::Kind::slip_wall;

    SdDiscretization disc(mesh, cfg.order, gas, {wall, in, outlet, slip});
    std::vector<double> qt = disc.init_field([&](Vec2) { return inflow; });
    TimeMarcher m(disc, 0.0, cfg.omega);

    const long long total = std::llround(cfg.t_end / cfg.dt);
    const long long per_sample =
        std::max<long long>(1, std::llround(cfg.sample_dt / cfg.dt));
    const long long per_snap =
        cfg.snapshot_dt > 0 ? std::llround(cfg.snapshot_dt / cfg.dt) : 0;
    int snap = 0;

    const WallLoads w0 = disc.wall_loads(qt, 0.0, {0});
    out.forces.push_back({0.0, w0.fx, w0.fy, w0.torque});
    if (hook && per_snap > 0) hook(disc, qt, 0.0, snap++);

    for (long long s = 1; s <= total; ++s) {
      m.step(qt, cfg.dt);
      const bool sample = s % per_sample == 0 || s == total;
      const bool shoot = hook && per_snap > 0 && (s % per_snap == 0 || s == total);
      if (sample || shoot) disc.set_pose(m.theta(), cfg.omega);
      if (sample) {
        const WallLoads wl = disc.wall_loads(qt, m.time(), {0});
        out.forces.push_back({m.time(), wl.fx, wl.fy, wl.torque});
      }
      if (shoot) hook(disc, qt, m.time(), snap++);
    }
    out.completed = true;
  } catch (const std::exception& e) {
    out.note = e.what();
  }
  return out;
}

DemoResult run_tank_demo(const TankDemoConfig& cfg, const SnapshotHook& hook) {
  DemoResult out;
  try {
    const MeshTopology mesh = make_tank_mesh(
        cfg.r_shaft, cfg.r_wall, cfg.r_interface, cfg.n_theta(), cfg.n_r,
        cfg.n_blades, cfg.blade_r0, cfg.blade_r1, cfg.n_baffles, cfg.baffle_r0,
        cfg.baffle_r1);
    const GasModel gas{1.4, 1.0, cfg.mu(), 0.72};
    const State rest = cons_from_prim(gas, 1.0, 0.0, 0.0, cfg.rest_pressure());

    BoundaryCondition wall;
    wall.kind = BoundaryCondition::Kind::noslip_adiabatic;
    SdDiscretization disc(mesh, cfg.order, gas, {wall, wall, wall, wall});
    std::vector<double> qt = disc.init_field([&](Vec2) { return rest; });
    TimeMarcher m(disc, 0.0, cfg.omega);

    const std::vector<int> spinning = {0, 2};  // shaft and blade walls
    const long long total = std::llround(cfg.t_end / cfg.dt);
    const long long per_sample =
        std::max<long long>(1, std::llround(cfg.sample_dt / cfg.dt));
    const long long per_snap =
        cfg.snapshot_dt > 0 ? std::llround(cfg.snapshot_dt / cfg.dt) : 0;
    int snap = 0;

    const WallLoads w0 = disc.wall_loads(qt, 0.0, spinning);
    out.forces.push_back({0.0, w0.fx, w0.fy, w0.torque});
    if (hook && per_snap > 0) hook(disc, qt, 0.0, snap++);

    for (long long s = 1; s <= total; ++s) {
      m.step(qt, cfg.dt);
      const bool sample = s % per_sample == 0 || s == total;
      const bool shoot = hook && per_snap > 0 && (s % per_snap == 0 || s == total);
      if (sample || shoot) disc.set_pose(m.theta(), cfg.omega);
      if (sample) {
        const WallLoads wl = disc.wall_loads(qt, m.time(), spinning);
        out.forces.push_back({m.time(), wl.fx, wl.fy, wl.torque});
      }
      if (shoot) hook(disc, qt, m.time(), snap++);
    }
    out.completed = true;
  } catch (const std::exception& e) {
    out.note = e.what();
  }
  return out;
}

double estimate_period(const std::vector<double>& t,
                       const std::vector<double>& v, double t_min) {
  if (t.size() != v.size() || t.size() < 3) return 0.0;
  size_t first = 0;
  while (first < t.size() && t[first] < t_min) ++first;
  if (t.size() - first < 3) return 0.0;

  double mean = 0.0;
  for (size_t i = first; i < v.size(); ++i) mean += v[i];
  mean /= double(v.size() - first);

  std::vector<double> cross;
  for (size_t i = first + 1; i < v.size(); ++i)
    if (v[i - 1] < mean && v[i] >= mean) {
      const double f = (mean - v[i - 1]) / (v[i] - v[i - 1]);
      cross.push_back(t[i - 1] + f * (t[i] - t[i - 1]));
    }
  if (cross.size() < 2) return 0.0;

  // drop spurious re-crossings much closer than the typical spacing
  std::vector<double> gaps;
  for (size_t i = 1; i < cross.size(); ++i)
    gaps.push_back(cross[i] - cross[i - 1]);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double med = gaps[gaps.size() / 2];
  std::vector<double> kept = {cross[0]};
  for (size_t i = 1; i < cross.size(); ++i)
    if (cross[i] - kept.back() > 0.3 * med) kept.push_back(cross[i]);
  if (kept.size() < 2) return 0.0;
  return (kept.back() - kept.front()) / double(kept.size() - 1);
}

}  // namespace ssd
