#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ssd/solver.hpp"
#include "ssd/time_march.hpp"

namespace ssd {

// ---------------------------------------------------------------------------
// Reference solutions
// ---------------------------------------------------------------------------

// Isentropic vortex carried by a uniform stream across a doubly periodic
// square that contains a spinning disk.  The exact field translates with the
// stream and wraps around the box, so it serves as an error reference at any
// time.  Defaults place the vortex center exactly on the sliding interface
// (radius 2 about the box center) at t = 2.
struct VortexCase {
  double u_inf = 1.0;    // stream speed
  double rho_inf = 1.0;  // stream density
  double mach = 0.3;     // stream Mach number
  // Stream pressure consistent with mach: c = u_inf/mach = sqrt(gamma p/rho).
  double p_inf = 1.0 / (1.4 * 0.3 * 0.3);
  double theta = std::atan(0.5);  // stream direction
  double eps = 1.0;               // vortex strength
  double r_c = 1.0;               // vortex core radius
  double x0 = 5.0, y0 = 5.0;      // initial vortex center
  double box = 10.0;              // box side = period
  double omega = 1.0;             // disk spin rate
  double disk_r = 2.0;            // sliding-interface radius

  State exact(const GasModel& gas, Vec2 pos, double t) const;
};

// Annular flow between an inner cylinder spinning at omega_i and a static
// outer cylinder, both held at the same wall temperature.  The steady
// compressible solution is closed-form: the tangential velocity profile is
// independent of the density field, the temperature balances viscous
// dissipation against conduction, and the pressure integrates the radial
// momentum balance (evaluated here by Gauss quadrature).
struct CouetteCase {
  double r_i = 1.0, r_o = 2.0;
  double omega_i = 1.0;
  double r_interface = 1.5;
  double reynolds = 10.0;  // rho_i omega_i r_i^2 / mu
  double mach_i = 0.1;     // inner-wall Mach number
  double gamma = 1.4, gas_constant = 1.0, prandtl = 0.72;

  double mu() const { return omega_i * r_i * r_i / reynolds; }
  double wall_temperature() const {
    const double c = omega_i * r_i / mach_i;
    return c * c / (gamma * gas_constant);
  }
  GasModel gas() const { return {gamma, gas_constant, mu(), prandtl}; }

  double vtheta(double r) const;      // tangential velocity profile
  double temperature(double r) const;
  double pressure(double r) const;    // rho(r_i) = 1 fixes the level
  State exact(Vec2 pos) const;        // throws outside [r_i, r_o]
};

// ---------------------------------------------------------------------------
// Error norms and study tables
// ---------------------------------------------------------------------------

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
};

// Pointwise norms over every solution point of every cell:
// l1 = sum|e|/K, l2 = sqrt(sum e^2/K) with K the total point count.  The
// sample functional receives the conservative state and the point's current
// physical position.  Always satisfies l2 >= l1 (checked).
ErrorNorms error_norms(
    const SdDiscretization& disc, const std::vector<double>& qt,
    const std::function<double(const State&, Vec2)>& sample);

struct ConvergenceRow {
  int cells = 0;
  double l1 = 0.0, l1_order = 0.0;  // orders defined from the second row on
  double l2 = 0.0, l2_order = 0.0;
  bool failed = false;
  std::string note;  // failure diagnostic
};

// Fill the order columns from successive rows; the mesh ratio between rows
// is sqrt(cells_cur/cells_prev).
void fill_orders(std::vector<ConvergenceRow>& rows);

// CSV with header "cells, L1 error, order, L2 error, order"; orders print as
// "-" where undefined.
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

struct TimingRow {
  int cells = 0;
  double total_seconds = 0.0;
  double comm_seconds = 0.0;
  double percent() const {
    return total_seconds > 0.0 ? 100.0 * comm_seconds / total_seconds : 0.0;
  }
};

// CSV with header "cells, total time, comm. time, percentage".
std::string timing_csv(const std::vector<TimingRow>& rows);

// ---------------------------------------------------------------------------
// Convergence drivers
// ---------------------------------------------------------------------------

struct VortexLevel {
  int m = 6, k_wrap = 2, k_ring = 4;  // disk-box generator arguments
};

inline std::vector<VortexLevel> vortex_levels() {
  return {{6, 2, 4}, {12, 4, 8}, {24, 8, 16}};
}

struct VortexStudyOptions {
  int order = 4;
  std::vector<VortexLevel> levels = vortex_levels();
  double t_end = 2.0;
  // The step size starts at cfl0 * stable_dt of the initial field and is
  // halved until the L2 error changes by less than halving_tol (at most
  // max_halvings times); each run uses a fixed step count.
  double cfl0 = 0.5;
  double halving_tol = 0.01;
  int max_halvings = 2;
  std::function<void(const ConvergenceRow&)> on_row;  // progress hook
};

std::vector<ConvergenceRow> vortex_convergence(const VortexCase& vc,
                                               const VortexStudyOptions& opt);

struct CouetteStudyOptions {
  int order = 4;
  // (n_theta, n_r) annulus levels
  std::vector<std::pair<int, int>> levels = {{24, 8}, {48, 16}, {96, 32}};
  double horizon = 3.0;        // fixed marching horizon for the steady state
  double residual_tol = 1e-10; // max-norm early exit, checked periodically
  double cfl = 0.8;
  // The settled interface error is periodic in the sliding alignment, so the
  // reported norms are means over one face pitch sampled at this many poses.
  int alignment_samples = 16;
  std::function<void(const ConvergenceRow&)> on_row;
};

std::vector<ConvergenceRow> couette_convergence(const CouetteCase& cc,
                                                const CouetteStudyOptions& opt);

// ---------------------------------------------------------------------------
// Timing instrumentation
// ---------------------------------------------------------------------------

// March exactly `steps` fixed-size steps and report the wall time of the
// marching loop alone plus the interface-communication share accumulated by
// the sliding mortar (zero on meshes without an interface).  Monotonic clock.
TimingRow timed_run(SdDiscretization& disc, std::vector<double> qt,
                    double omega, int steps, double dt);

struct TimingOptions {
  int order = 4;
  int steps = 100;
  double cfl = 0.8;
};

std::vector<TimingRow> vortex_timing(const VortexCase& vc,
                                     const std::vector<VortexLevel>& levels,
                                     const TimingOptions& opt);

std::vector<TimingRow> couette_timing(
    const CouetteCase& cc, const std::vector<std::pair<int, int>>& levels,
    const TimingOptions& opt);

// ---------------------------------------------------------------------------
// Demonstration cases
// ---------------------------------------------------------------------------

struct ForceSample {
  double t = 0.0;
  double fx = 0.0, fy = 0.0;  // force on the tracked walls
  double torque = 0.0;        // about the mesh center
};

// Called every snapshot interval when set; index counts snapshots from 0.
using SnapshotHook = std::function<void(const SdDiscretization&,
                                        const std::vector<double>&, double,
                                        int)>;

struct DemoResult {
  std::vector<ForceSample> forces;
  bool completed = false;
  std::string note;  // failure diagnostic when !completed
};

// Spinning elliptic cylinder in a free stream.  The ellipse (semi-axes
// ax/ay) sits in a rotating disk of radius disk_r inside a rectangular
// domain; forces on the wall are sampled every sample_dt.
struct CylinderDemoConfig {
  double ax = 0.5, ay = 0.25;
  double disk_r = 1.5;
  double x0 = -10.0, x1 = 30.0, y0 = -10.0, y1 = 10.0;
  double omega = 0.5 * 3.14159265358979323846;
  double reynolds = 200.0;  // by chord 2*ax and stream speed
  double mach = 0.05;
  double dt = 6.25e-5;      // fixed step; ~20% under the explicit limit
  int order = 3;
  int m = 12, k_o = 8, k_ring = 16;  // mesh: 4m x (k_o + k_ring) cells
  double t_end = 18.0;
  double sample_dt = 0.02;
  double snapshot_dt = 2.0;

  double chord() const { return 2.0 * ax; }
  double mu() const { return chord() / reynolds; }  // rho = u = 1
  double p_inf() const { return 1.0 / (1.4 * mach * mach); }
  double rotation_period() const {
    return 2.0 * 3.14159265358979323846 / omega;
  }
};

DemoResult run_cylinder_demo(const CylinderDemoConfig& cfg,
                             const SnapshotHook& hook = {});

// Stirred tank: spinning shaft with blades inside a baffled cylindrical
// vessel, started from rest; the torque on the shaft and blades is sampled.
struct TankDemoConfig {
  double r_shaft = 0.5, r_wall = 5.0, r_interface = 3.0;
  double blade_r0 = 1.0, blade_r1 = 2.0;
  int n_blades = 6;
  double baffle_r0 = 4.0, baffle_r1 = 5.0;
  int n_baffles = 4;
  double blade_thickness = 0.1;  // sets the angular sector count
  double omega = 1.0;
  double reynolds = 100.0;  // by blade tip speed and blade span
  double tip_mach = 0.1;
  double dt = 1e-4;
  int order = 3;
  int n_r = 27;  // radial count that puts every feature radius on a grid line
  double t_end = 8.0;
  double sample_dt = 0.02;
  double snapshot_dt = 1.0;

  double tip_speed() const { return omega * blade_r1; }
  double blade_span() const { return blade_r1 - blade_r0; }
  double mu() const { return tip_speed() * blade_span() / reynolds; }
  int n_theta() const {
    // one sector = one blade; mid-blade arc length ~ blade_thickness,
    // rounded to a sector count divisible by the blade and baffle counts
    const double r_mid = 0.5 * (blade_r0 + blade_r1);
    const double pi = 3.14159265358979323846;
    const int n = int(std::lround(2.0 * pi * r_mid / blade_thickness));
    const int l = std::lcm(n_blades, n_baffles);
    return std::max(2 * l, (n + l / 2) / l * l);
  }
  double rest_pressure() const {
    const double c = tip_speed() / tip_mach;
    return c * c / 1.4;  // rho = 1 at rest
  }
};

DemoResult run_tank_demo(const TankDemoConfig& cfg,
                         const SnapshotHook& hook = {});

struct DemoCases {
  CylinderDemoConfig cylinder;
  TankDemoConfig tank;
};

inline DemoCases demo_cases() { return {}; }

// Dominant period of a sampled series from the mean spacing of upward
// mean-crossings on t >= t_min; returns 0 when fewer than two crossings.
double estimate_period(const std::vector<double>& t,
                       const std::vector<double>& v, double t_min);

}  // namespace ssd
