#pragma once

#include <functional>
#include <vector>

#include "ssd/solver.hpp"

namespace ssd {

// Five-stage fourth-order strong-stability-preserving Runge-Kutta scheme in
// low-storage form (two registers plus the stage residual).
//
// The generic entry point advances du/dt = f(u, t); the solver entry point
// couples the stages to the mesh pose: each stage evaluates the residual at
// its own stage time with the rotating ring posed at the exact analytic
// angle theta(t) = theta0 + omega * t.

struct StepController {
  double cfl = 0.5;
  // re-evaluate the stable step every this many steps (it drifts slowly)
  int dt_refresh_interval = 10;
};

using OdeRhs =
    std::function<void(const std::vector<double>&, double, std::vector<double>&)>;

// One SSPRK(5,4) step of the plain ODE u' = f(u, t), overwriting u.
void ssprk54_step(const OdeRhs& f, std::vector<double>& u, double t,
                  double dt);

class TimeMarcher {
 public:
  TimeMarcher(SdDiscretization& sol, double theta0, double omega);

  // advance to exactly t_end and restore the pose at t_end; returns the
  // number of steps taken
  long long advance_to(std::vector<double>& qt, double t_end,
                       const StepController& ctrl);

  // single step with a caller-chosen dt; leaves the pose at the final
  // interior stage time, not t+dt — re-pose via set_pose(theta(), omega)
  // before any position-based measurement
  void step(std::vector<double>& qt, double dt);

  double time() const { return time_; }
  double theta() const { return theta0_ + omega_ * time_; }
  long long steps_taken() const { return steps_; }

  // called after every completed step (diagnostics, snapshots)
  std::function<void(long long step, double time)> on_step;

 private:
  void stage_rhs(const std::vector<double>& qt, double stage_time,
                 std::vector<double>& out);
  void check_finite(const std::vector<double>& qt) const;

  SdDiscretization* sol_;
  double theta0_, omega_;
  double time_ = 0.0;
  long long steps_ = 0;
  std::vector<double> u1_, u2_, r_;
};

}  // namespace ssd
