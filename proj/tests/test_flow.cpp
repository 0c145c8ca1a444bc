#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ssd/flow.hpp"

using namespace ssd;

TEST_CASE("energy assembly and flux of a unit state") {
  GasModel gas;
  State q = cons_from_prim(gas, 1.0, 1.0, 0.0, 1.0);
  CHECK(q.E == doctest::Approx(3.0).epsilon(1e-14));
  State F, G;
  inviscid_flux(gas, q, 0.0, 0.0, F, G);
  CHECK(F.rho == doctest::Approx(1.0));
  CHECK(F.rho_u == doctest::Approx(2.0));
  CHECK(F.rho_v == doctest::Approx(0.0));
  CHECK(F.E == doctest::Approx(4.0));
}

TEST_CASE("grid velocity equal to fluid velocity removes mass flux") {
  GasModel gas;
  State q = cons_from_prim(gas, 1.3, 0.7, -0.4, 2.0);
  State F, G;
  inviscid_flux(gas, q, 0.7, -0.4, F, G);
  CHECK(F.rho == doctest::Approx(0.0).scale(1.0));
  CHECK(G.rho == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("stationary fluid carries pressure-only flux") {
  GasModel gas;
  State q = cons_from_prim(gas, 2.0, 0.0, 0.0, 3.7);
  State F, G;
  inviscid_flux(gas, q, 0.0, 0.0, F, G);
  CHECK(F.rho == doctest::Approx(0.0));
  CHECK(F.rho_u == doctest::Approx(3.7));
  CHECK(F.rho_v == doctest::Approx(0.0));
  CHECK(F.E == doctest::Approx(0.0));
  CHECK(G.rho_u == doctest::Approx(0.0));
  CHECK(G.rho_v == doctest::Approx(3.7));
}

TEST_CASE("ALE flux reduces to the static flux at zero grid velocity") {
  GasModel gas;
  State q = cons_from_prim(gas, 0.9, 1.4, -0.3, 2.2);
  State F0, G0, F1, G1;
  inviscid_flux(gas, q, 0.0, 0.0, F0, G0);
  inviscid_flux(gas, q, 0.3, 0.8, F1, G1);
  for (int k = 0; k < 4; ++k) {
    CHECK(F1[k] == doctest::Approx(F0[k] - 0.3 * q[k]).epsilon(1e-13));
    CHECK(G1[k] == doctest::Approx(G0[k] - 0.8 * q[k]).epsilon(1e-13));
  }
}

TEST_CASE("non-physical states are rejected") {
  GasModel gas;
  State F, G;
  State bad_rho{-1.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(inviscid_flux(gas, bad_rho, 0, 0, F, G), NonPhysicalState);
  State bad_p{1.0, 10.0, 0.0, 1.0};  // kinetic energy exceeds E
  CHECK_THROWS_AS(inviscid_flux(gas, bad_p, 0, 0, F, G), NonPhysicalState);
}

TEST_CASE("zero gradients give zero viscous flux") {
  GasModel gas;
  gas.mu = 0.3;
  State q = cons_from_prim(gas, 1.0, 0.5, -0.2, 1.0);
  State Fv, Gv;
  viscous_flux(gas, q, StateGrad{}, Fv, Gv);
  for (int k = 0; k < 4; ++k) {
    CHECK(Fv[k] == doctest::Approx(0.0).scale(1.0));
    CHECK(Gv[k] == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("pure shear reproduces the Couette stress") {
  GasModel gas;
  gas.mu = 0.25;
  const double dudy = 1.7;
  // rho, T constant; u = u(y), v = 0: d(rho u)/dy = rho du/dy
  State q = cons_from_prim(gas, 1.2, 0.6, 0.0, 2.0);
  StateGrad grad{};
  grad.dy.rho_u = 1.2 * dudy;
  // E = p/(g-1) + rho u^2/2: dE/dy = rho u du/dy keeps p and T constant
  grad.dy.E = 1.2 * 0.6 * dudy;
  State Fv, Gv;
  viscous_flux(gas, q, grad, Fv, Gv);
  CHECK(Fv.rho_v == doctest::Approx(-gas.mu * dudy).epsilon(1e-12));
  CHECK(Gv.rho_u == doctest::Approx(-gas.mu * dudy).epsilon(1e-12));
  CHECK(Fv.rho_u == doctest::Approx(0.0).scale(1.0));
  CHECK(Gv.rho_v == doctest::Approx(0.0).scale(1.0));
  // energy row: u*txy + k*Ty with Ty = 0
  CHECK(Gv.E == doctest::Approx(-0.6 * gas.mu * dudy).epsilon(1e-12));
}

TEST_CASE("chain-rule gradients match a finite-difference oracle") {
  GasModel gas;
  gas.mu = 0.1;
  // smooth analytic field
  auto field = [&](double x, double y) {
    double rho = 1.0 + 0.2 * std::sin(x) * std::cos(y);
    double u = 0.5 + 0.3 * std::cos(x + 0.4 * y);
    double v = -0.2 + 0.25 * std::sin(0.7 * x - y);
    double p = 1.0 + 0.15 * std::cos(1.3 * x) * std::sin(0.8 * y);
    return cons_from_prim(gas, rho, u, v, p);
  };
  const double x0 = 0.37, y0 = -0.61, h = 1e-5;
  StateGrad grad;
  for (int k = 0; k < 4; ++k) {
    grad.dx[k] = (field(x0 + h, y0)[k] - field(x0 - h, y0)[k]) / (2 * h);
    grad.dy[k] = (field(x0, y0 + h)[k] - field(x0, y0 - h)[k]) / (2 * h);
  }
  State q = field(x0, y0);
  State Fv, Gv;
  viscous_flux(gas, q, grad, Fv, Gv);

  // oracle: differentiate the primitives directly
  auto prim = [&](double x, double y, int which) {
    State s = field(x, y);
    double iu = s.rho_u / s.rho, iv = s.rho_v / s.rho;
    if (which == 0) return iu;
    if (which == 1) return iv;
    return temperature(gas, s);
  };
  double ux = (prim(x0 + h, y0, 0) - prim(x0 - h, y0, 0)) / (2 * h);
  double uy = (prim(x0, y0 + h, 0) - prim(x0, y0 - h, 0)) / (2 * h);
  double vx = (prim(x0 + h, y0, 1) - prim(x0 - h, y0, 1)) / (2 * h);
  double vy = (prim(x0, y0 + h, 1) - prim(x0, y0 - h, 1)) / (2 * h);
  double Tx = (prim(x0 + h, y0, 2) - prim(x0 - h, y0, 2)) / (2 * h);
  double u = q.rho_u / q.rho, v = q.rho_v / q.rho;
  double div = ux + vy;
  double txx = 2 * gas.mu * ux - 2.0 / 3.0 * gas.mu * div;
  double txy = gas.mu * (uy + vx);
  CHECK(Fv.rho_u == doctest::Approx(-txx).epsilon(1e-6));
  CHECK(Fv.rho_v == doctest::Approx(-txy).epsilon(1e-6));
  CHECK(Fv.E ==
        doctest::Approx(-(u * txx + v * txy + gas.conductivity() * Tx))
            .epsilon(1e-6));
}

TEST_CASE("viscous flux is linear in the gradients") {
  GasModel gas;
  gas.mu = 0.4;
  State q = cons_from_prim(gas, 1.1, 0.3, -0.7, 1.9);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  StateGrad g1, g2, gsum;
  for (int k = 0; k < 4; ++k) {
    g1.dx[k] = dist(gen);
    g1.dy[k] = dist(gen);
    g2.dx[k] = dist(gen);
    g2.dy[k] = dist(gen);
    gsum.dx[k] = g1.dx[k] + 2.0 * g2.dx[k];
    gsum.dy[k] = g1.dy[k] + 2.0 * g2.dy[k];
  }
  State F1, G1, F2, G2, Fs, Gs;
  viscous_flux(gas, q, g1, F1, G1);
  viscous_flux(gas, q, g2, F2, G2);
  viscous_flux(gas, q, gsum, Fs, Gs);
  for (int k = 0; k < 4; ++k) {
    CHECK(Fs[k] == doctest::Approx(F1[k] + 2.0 * F2[k]).epsilon(1e-12));
    CHECK(Gs[k] == doctest::Approx(G1[k] + 2.0 * G2[k]).epsilon(1e-12));
  }
}

TEST_CASE("rusanov consistency, antisymmetry, and the sod-state example") {
  GasModel gas;
  State q = cons_from_prim(gas, 1.1, 0.4, 0.2, 1.3);
  State f = rusanov_flux(gas, q, q, 0.6, 0.8, 0.1);
  State fn = normal_flux(gas, q, 0.6, 0.8, 0.1);
  for (int k = 0; k < 4; ++k) {
    CHECK(f[k] == doctest::Approx(fn[k]).epsilon(1e-13));
  }

  State qL = cons_from_prim(gas, 1.0, 0.3, -0.2, 1.0);
  State qR = cons_from_prim(gas, 0.8, -0.1, 0.5, 1.2);
  State fwd = rusanov_flux(gas, qL, qR, 0.6, 0.8, 0.05);
  State rev = rusanov_flux(gas, qR, qL, -0.6, -0.8, -0.05);
  for (int k = 0; k < 4; ++k) {
    CHECK(fwd[k] == doctest::Approx(-rev[k]).epsilon(1e-13));
  }

  State sodL{1.0, 0.0, 0.0, 2.5};
  State sodR{0.125, 0.0, 0.0, 0.25};
  State fs = rusanov_flux(gas, sodL, sodR, 1.0, 0.0, 0.0);
  CHECK(fs.rho ==
        doctest::Approx(0.5 * std::sqrt(1.4) * (1.0 - 0.125)).epsilon(1e-13));
  CHECK(fs.rho == doctest::Approx(0.517657).epsilon(1e-5));
}

TEST_CASE("temperature recovery round trip") {
  GasModel gas;
  gas.R = 0.7143;
  for (double T : {0.8, 1.0, 3.5}) {
    for (double rho : {0.5, 1.0, 2.0}) {
      State q = cons_from_prim(gas, rho, 0.4, -0.9, rho * gas.R * T);
      CHECK(temperature(gas, q) == doctest::Approx(T).epsilon(1e-13));
    }
  }
}

TEST_CASE("wave speed estimate") {
  GasModel gas;
  State q = cons_from_prim(gas, 1.0, 3.0, 4.0, 1.0);
  CHECK(max_wave_speed(gas, q, 0.0, 0.0) ==
        doctest::Approx(5.0 + std::sqrt(1.4)).epsilon(1e-13));
  CHECK(max_wave_speed(gas, q, 3.0, 4.0) ==
        doctest::Approx(std::sqrt(1.4)).epsilon(1e-13));
}
