#include "ssd/flow.hpp"

#include <string>

namespace ssd {

void throw_nonphysical(const GasModel& gas, const State& q,
                       const char* where) {
  throw NonPhysicalState(std::string(where) +
                         ": rho=" + std::to_string(q.rho) +
                         " p=" + std::to_string(pressure(gas, q)));
}

State normal_flux(const GasModel& gas, const State& q, double nx, double ny,
                  double vgn) {
  const double inv_rho = 1.0 / q.rho;
  const double un = (q.rho_u * nx + q.rho_v * ny) * inv_rho;
  const double p = pressure(gas, q);
  const double rel = un - vgn;
  return {q.rho * rel, q.rho_u * rel + p * nx, q.rho_v * rel + p * ny,
          q.E * rel + p * un};
}

void temperature_gradient(const GasModel& gas, const State& q,
                          const StateGrad& grad, double& Tx, double& Ty) {
  const double inv_rho = 1.0 / q.rho;
  const double u = q.rho_u * inv_rho;
  const double v = q.rho_v * inv_rho;
  const double ux = (grad.dx.rho_u - u * grad.dx.rho) * inv_rho;
  const double uy = (grad.dy.rho_u - u * grad.dy.rho) * inv_rho;
  const double vx = (grad.dx.rho_v - v * grad.dx.rho) * inv_rho;
  const double vy = (grad.dy.rho_v - v * grad.dy.rho) * inv_rho;
  const double p = pressure(gas, q);
  const double gm1 = gas.gamma - 1.0;
  const double ke = 0.5 * (u * u + v * v);
  const double px = gm1 * (grad.dx.E - ke * grad.dx.rho -
                           q.rho * (u * ux + v * vx));
  const double py = gm1 * (grad.dy.E - ke * grad.dy.rho -
                           q.rho * (u * uy + v * vy));
  const double T = p * inv_rho / gas.R;
  Tx = (px - T * gas.R * grad.dx.rho) * inv_rho / gas.R;
  Ty = (py - T * gas.R * grad.dy.rho) * inv_rho / gas.R;
}

void viscous_flux(const GasModel& gas, const State& q, const StateGrad& grad,
                  State& Fv, State& Gv) {
  require_physical(gas, q, "viscous_flux");
  const double inv_rho = 1.0 / q.rho;
  const double u = q.rho_u * inv_rho;
  const double v = q.rho_v * inv_rho;
  // chain rule from conservative gradients to velocity gradients
  const double ux = (grad.dx.rho_u - u * grad.dx.rho) * inv_rho;
  const double uy = (grad.dy.rho_u - u * grad.dy.rho) * inv_rho;
  const double vx = (grad.dx.rho_v - v * grad.dx.rho) * inv_rho;
  const double vy = (grad.dy.rho_v - v * grad.dy.rho) * inv_rho;
  double Tx, Ty;
  temperature_gradient(gas, q, grad, Tx, Ty);

  const double mu = gas.mu;
  const double lambda = -2.0 / 3.0 * mu;
  const double div = ux + vy;
  const double txx = 2.0 * mu * ux + lambda * div;
  const double tyy = 2.0 * mu * vy + lambda * div;
  const double txy = mu * (uy + vx);
  const double k = gas.conductivity();

  Fv.rho = 0.0;
  Fv.rho_u = -txx;
  Fv.rho_v = -txy;
  Fv.E = -(u * txx + v * txy + k * Tx);
  Gv.rho = 0.0;
  Gv.rho_u = -txy;
  Gv.rho_v = -tyy;
  Gv.E = -(u * txy + v * tyy + k * Ty);
}

State rusanov_flux(const GasModel& gas, const State& qL, const State& qR,
                   double nx, double ny, double vgn) {
  require_physical(gas, qL, "rusanov_flux(left)");
  require_physical(gas, qR, "rusanov_flux(right)");
  const State fL = normal_flux(gas, qL, nx, ny, vgn);
  const State fR = normal_flux(gas, qR, nx, ny, vgn);
  const double unL = (qL.rho_u * nx + qL.rho_v * ny) / qL.rho;
  const double unR = (qR.rho_u * nx + qR.rho_v * ny) / qR.rho;
  const double lam = std::max(std::abs(unL - vgn) + sound_speed(gas, qL),
                              std::abs(unR - vgn) + sound_speed(gas, qR));
  return 0.5 * (fL + fR) - 0.5 * lam * (qR - qL);
}

double max_wave_speed(const GasModel& gas, const State& q, double ug,
                      double vg) {
  const double u = q.rho_u / q.rho - ug;
  const double v = q.rho_v / q.rho - vg;
  return std::sqrt(u * u + v * v) + sound_speed(gas, q);
}

}  // namespace ssd
