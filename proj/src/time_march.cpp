#include "ssd/time_march.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ssd {

namespace {

// five-stage fourth-order SSP Runge-Kutta, low-storage coefficients
constexpr double kB1 = 0.391752226571890;
constexpr double kA20 = 0.444370493651235, kA21 = 0.555629506348765,
                 kB2 = 0.368410593050371;
constexpr double kA30 = 0.620101851488403, kA31 = 0.379898148511597,
                 kB3 = 0.251891774271694;
constexpr double kA40 = 0.178079954393132, kA41 = 0.821920045606868,
                 kB4 = 0.544974750228521;
constexpr double kF2 = 0.517231671970585, kF3 = 0.096059710526147,
                 kF3R = 0.063692468666290, kF4 = 0.386708617503269,
                 kF4R = 0.226007483236906;

// stage abscissae follow the same recursion as the stage values
constexpr double kC1 = kB1;
constexpr double kC2 = kA21 * kC1 + kB2;
constexpr double kC3 = kA31 * kC2 + kB3;
constexpr double kC4 = kA41 * kC3 + kB4;

template <class Rhs>
void run_step(const Rhs& f, std::vector<double>& u, double t, double dt,
              std::vector<double>& u1, std::vector<double>& u2,
              std::vector<double>& r) {
  const size_t n = u.size();
  u1.resize(n);
  u2.resize(n);
  f(u, t, r);
  for (size_t i = 0; i < n; ++i) u1[i] = u[i] + kB1 * dt * r[i];
  f(u1, t + kC1 * dt, r);
  for (size_t i = 0; i < n; ++i)
    u2[i] = kA20 * u[i] + kA21 * u1[i] + kB2 * dt * r[i];
  f(u2, t + kC2 * dt, r);
  for (size_t i = 0; i < n; ++i)  // u1 register now holds the third stage
    u1[i] = kA30 * u[i] + kA31 * u2[i] + kB3 * dt * r[i];
  f(u1, t + kC3 * dt, r);
  for (size_t i = 0; i < n; ++i)  // u register now holds the fourth stage
    u[i] = kA40 * u[i] + kA41 * u1[i] + kB4 * dt * r[i];
  for (size_t i = 0; i < n; ++i)  // u2 register accumulates the update
    u2[i] = kF2 * u2[i] + kF3 * u1[i] + kF3R * dt * r[i];
  f(u, t + kC4 * dt, r);
  for (size_t i = 0; i < n; ++i) u[i] = u2[i] + kF4 * u[i] + kF4R * dt * r[i];
}

}  // namespace

void ssprk54_step(const OdeRhs& f, std::vector<double>& u, double t,
                  double dt) {
  std::vector<double> u1, u2, r;
  run_step([&](const std::vector<double>& q, double tt,
               std::vector<double>& out) { f(q, tt, out); },
           u, t, dt, u1, u2, r);
}

TimeMarcher::TimeMarcher(SdDiscretization& sol, double theta0, double omega)
    : sol_(&sol), theta0_(theta0), omega_(omega) {
  sol_->set_pose(theta0_, omega_);
}

void TimeMarcher::stage_rhs(const std::vector<double>& qt, double stage_time,
                            std::vector<double>& out) {
  if (omega_ != 0.0) sol_->set_pose(theta0_ + omega_ * stage_time, omega_);
  sol_->residual(qt, stage_time, out);
}

void TimeMarcher::check_finite(const std::vector<double>& qt) const {
  for (size_t i = 0; i < qt.size(); ++i)
    if (!std::isfinite(qt[i]))
      throw std::runtime_error(
          "solution lost finiteness after step " + std::to_string(steps_) +
          " (t=" + std::to_string(time_) + ")");
}

void TimeMarcher::step(std::vector<double>& qt, double dt) {
  run_step(
      [this](const std::vector<double>& q, double tt,
             std::vector<double>& out) { stage_rhs(q, tt, out); },
      qt, time_, dt, u1_, u2_, r_);
  time_ += dt;
  ++steps_;
  check_finite(qt);
  if (on_step) on_step(steps_, time_);
}

long long TimeMarcher::advance_to(std::vector<double>& qt, double t_end,
                                  const StepController& ctrl) {
  const long long start = steps_;
  double dt_base = 0.0;
  long long since_refresh = 0;
  const double eps = 1e-13 * (1.0 + std::abs(t_end));
  if (t_end < time_ - eps)
    throw std::invalid_argument("cannot march backwards in time");
  while (time_ < t_end - eps) {
    if (dt_base == 0.0 || since_refresh >= ctrl.dt_refresh_interval) {
      dt_base = ctrl.cfl * sol_->stable_dt(qt);
      since_refresh = 0;
    }
    double dt = dt_base;
    if (time_ + dt >= t_end - eps) dt = t_end - time_;
    step(qt, dt);
    ++since_refresh;
  }
  time_ = t_end;  // clear accumulated roundoff
  // the last stage left the pose at an interior stage time; restore the
  // pose at t_end so position-based post-processing sees consistent geometry
  if (omega_ != 0.0) sol_->set_pose(theta0_ + omega_ * time_, omega_);
  return steps_ - start;
}

}  // namespace ssd
