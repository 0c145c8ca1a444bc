#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace ssd {

// Conservative state vector (rho, rho*u, rho*v, E) with E total energy per
// volume: E = p/(gamma-1) + rho*(u^2+v^2)/2.
struct State {
  double rho = 0.0;
  double rho_u = 0.0;
  double rho_v = 0.0;
  double E = 0.0;

  double& operator[](int k) { return (&rho)[k]; }
  double operator[](int k) const { return (&rho)[k]; }
};

inline State operator+(const State& a, const State& b) {
  return {a.rho + b.rho, a.rho_u + b.rho_u, a.rho_v + b.rho_v, a.E + b.E};
}
inline State operator-(const State& a, const State& b) {
  return {a.rho - b.rho, a.rho_u - b.rho_u, a.rho_v - b.rho_v, a.E - b.E};
}
inline State operator*(double c, const State& a) {
  return {c * a.rho, c * a.rho_u, c * a.rho_v, c * a.E};
}

// Calorically perfect gas.  mu and the Prandtl number close the viscous
// terms: lambda = -2mu/3 (Stokes), k = mu*cp/Pr.
struct GasModel {
  double gamma = 1.4;
  double R = 1.0;
  double mu = 0.0;
  double prandtl = 0.72;

  double cp() const { return gamma * R / (gamma - 1.0); }
  double conductivity() const { return mu * cp() / prandtl; }
};

struct NonPhysicalState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double pressure(const GasModel& gas, const State& q) {
  return (gas.gamma - 1.0) *
         (q.E - 0.5 * (q.rho_u * q.rho_u + q.rho_v * q.rho_v) / q.rho);
}

inline double temperature(const GasModel& gas, const State& q) {
  return pressure(gas, q) / (q.rho * gas.R);
}

inline double sound_speed(const GasModel& gas, const State& q) {
  return std::sqrt(gas.gamma * pressure(gas, q) / q.rho);
}

inline State cons_from_prim(const GasModel& gas, double rho, double u,
                            double v, double p) {
  return {rho, rho * u, rho * v,
          p / (gas.gamma - 1.0) + 0.5 * rho * (u * u + v * v)};
}

// Cold half of require_physical: builds the diagnostic and throws.
[[noreturn]] void throw_nonphysical(const GasModel& gas, const State& q,
                                    const char* where);

inline void require_physical(const GasModel& gas, const State& q,
                             const char* where) {
  if (!(q.rho > 0.0) || !(pressure(gas, q) > 0.0))
    throw_nonphysical(gas, q, where);
}

// ALE inviscid fluxes from a state whose pressure the caller has already
// computed and validated; physical fluxes minus grid velocity times the
// state.
inline void inviscid_flux_p(const State& q, double p, double ug, double vg,
                            State& F, State& G) {
  const double inv_rho = 1.0 / q.rho;
  const double u = q.rho_u * inv_rho;
  const double v = q.rho_v * inv_rho;
  F.rho = q.rho * u - ug * q.rho;
  F.rho_u = q.rho_u * u + p - ug * q.rho_u;
  F.rho_v = q.rho_v * u - ug * q.rho_v;
  F.E = (q.E + p) * u - ug * q.E;
  G.rho = q.rho * v - vg * q.rho;
  G.rho_u = q.rho_u * v - vg * q.rho_u;
  G.rho_v = q.rho_v * v + p - vg * q.rho_v;
  G.E = (q.E + p) * v - vg * q.E;
}

inline void inviscid_flux(const GasModel& gas, const State& q, double ug,
                          double vg, State& F, State& G) {
  require_physical(gas, q, "inviscid_flux");
  inviscid_flux_p(q, pressure(gas, q), ug, vg, F, G);
}

// ALE normal flux n.(F,G) - (n.u_g) q for a unit normal.
State normal_flux(const GasModel& gas, const State& q, double nx, double ny,
                  double vgn);

// Conservative gradients per direction.
struct StateGrad {
  State dx, dy;
};

// d(T)/dx and d(T)/dy by the chain rule from conservative gradients.
void temperature_gradient(const GasModel& gas, const State& q,
                          const StateGrad& grad, double& Tx, double& Ty);

// Viscous fluxes of the negated-vector convention: adding them to the
// inviscid fluxes yields the full Navier-Stokes flux.
void viscous_flux(const GasModel& gas, const State& q, const StateGrad& grad,
                  State& Fv, State& Gv);

// Rusanov common normal flux between two states along a unit normal with
// normal grid speed vgn.  lambda = max over sides of |u.n - vgn| + c.
State rusanov_flux(const GasModel& gas, const State& qL, const State& qR,
                   double nx, double ny, double vgn);

// |u - u_g| + c, the characteristic speed used by the CFL estimate.
double max_wave_speed(const GasModel& gas, const State& q, double ug,
                      double vg);

}  // namespace ssd
