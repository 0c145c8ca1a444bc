#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <vector>

#include "ssd/basis.hpp"
#include "ssd/flow.hpp"
#include "ssd/geometry.hpp"
#include "ssd/mesh.hpp"
#include "ssd/mortar.hpp"

using namespace ssd;

namespace {

constexpr double kPi = 3.14159265358979323846;

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

// trace point t of face f sits at face_point(f, SP_t): the solution-point
// positions are symmetric about 1/2, so the walk direction does not move them
void trace_coords(int face, double sp, double& xi, double& eta) {
  face_point(face, sp, xi, eta);
}

struct Fixture {
  MeshTopology mesh;
  GeometryCache geo;
  GasModel gas;
  SlidingMortar mortar;
  int N, nf;

  explicit Fixture(int order, int nt = 12, int nr = 4)
      : mesh(make_annulus_mesh(1.0, 2.0, nt, nr, 1.5)),
        geo(mesh, order),
        gas{1.4, 1.0, 0.0, 0.72},
        mortar(mesh, geo, gas),
        N(order),
        nf(static_cast<int>(mesh.ring_rot.size())) {}

  // sample a smooth field at every ring-face trace point of one side
  template <typename F>
  std::vector<double> sample(const std::vector<RingFace>& ring, F field) {
    std::vector<double> out(size_t(nf) * N * 4);
    const auto& sp = geo.ops().pts.solution_pts;
    for (int r = 0; r < nf; ++r)
      for (int t = 0; t < N; ++t) {
        double xi, eta;
        trace_coords(ring[r].face, sp[t], xi, eta);
        // rotating cells are posed: sample at the posed position
        Vec2 p = map_cell(mesh, ring[r].cell, xi, eta);
        if (mesh.cells[ring[r].cell].rotating) {
          const double c = std::cos(geo.theta()), s = std::sin(geo.theta());
          p = {c * p.x - s * p.y, s * p.x + c * p.y};
        }
        State q = field(p);
        for (int k = 0; k < 4; ++k) out[(r * N + t) * 4 + k] = q[k];
      }
    return out;
  }
};

}  // namespace

TEST_CASE("conforming projection operators are the exact identity") {
  for (int order : {3, 4}) {
    const auto sp = make_point_set(order).solution_pts;
    ProjOps p = make_projection(sp, 0.0, 1.0);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        CHECK(p.to_mortar[i * order + j] == (i == j ? 1.0 : 0.0));
        CHECK(p.back[i * order + j] == (i == j ? 1.0 : 0.0));
      }
  }
}

TEST_CASE("projection restricts exactly and round-trips polynomial data") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> wd(0.05, 0.95), cd(-1.0, 1.0);
  for (int order : {3, 4, 5}) {
    const auto sp = make_point_set(order).solution_pts;
    for (int trial = 0; trial < 30; ++trial) {
      const double w = wd(gen);
      ProjOps a = make_projection(sp, 0.0, 1.0 - w);
      ProjOps b = make_projection(sp, 1.0 - w, w);
      std::vector<double> c(order);
      for (auto& x : c) x = cd(gen);
      std::vector<double> q(order), qa(order), qb(order), back(order);
      for (int j = 0; j < order; ++j) q[j] = poly_eval(c, sp[j]);
      for (int i = 0; i < order; ++i) {
        double va = 0, vb = 0;
        for (int j = 0; j < order; ++j) {
          va += a.to_mortar[i * order + j] * q[j];
          vb += b.to_mortar[i * order + j] * q[j];
        }
        qa[i] = va;
        qb[i] = vb;
        CHECK(va == doctest::Approx(poly_eval(c, (1.0 - w) * sp[i]))
                        .scale(1.0).epsilon(1e-12));
        CHECK(vb == doctest::Approx(poly_eval(c, 1.0 - w + w * sp[i]))
                        .scale(1.0).epsilon(1e-12));
      }
      for (int j = 0; j < order; ++j) {
        double v = 0;
        for (int i = 0; i < order; ++i)
          v += a.back[j * order + i] * qa[i] + b.back[j * order + i] * qb[i];
        back[j] = v;
        CHECK(v == doctest::Approx(q[j]).scale(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("back projection conserves integrals for arbitrary mortar data") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> wd(1e-6, 1.0 - 1e-6), dd(-2.0, 2.0);
  for (int order : {3, 4}) {
    const Operators ops = make_operators(order);
    const auto& sp = ops.pts.solution_pts;
    for (int trial = 0; trial < 100; ++trial) {
      const double w = wd(gen);
      ProjOps a = make_projection(sp, 0.0, 1.0 - w);
      ProjOps b = make_projection(sp, 1.0 - w, w);
      std::vector<double> fa(order), fb(order), face(order, 0.0);
      for (auto& x : fa) x = dd(gen);
      for (auto& x : fb) x = dd(gen);
      for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i)
          face[j] += a.back[j * order + i] * fa[i] +
                     b.back[j * order + i] * fb[i];
      double face_int = 0, mortar_int = 0;
      for (int j = 0; j < order; ++j) face_int += ops.sp_weights[j] * face[j];
      for (int i = 0; i < order; ++i)
        mortar_int += ops.sp_weights[i] * ((1.0 - w) * fa[i] + w * fb[i]);
      CHECK(face_int == doctest::Approx(mortar_int).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic basis-product integrals match Gauss quadrature") {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> wd(0.05, 0.95);
  for (int order : {3, 4, 5}) {
    const auto sp = make_point_set(order).solution_pts;
    // order-point Gauss rule: interior flux points of the next order up
    const auto fp = make_point_set(order + 1).flux_pts;
    std::vector<double> gx(fp.begin() + 1, fp.end() - 1);
    REQUIRE(int(gx.size()) == order);
    // weights from the moment equations sum w x^k = 1/(k+1)
    std::vector<double> A(size_t(order) * order), rhs(order), gw(order);
    for (int k = 0; k < order; ++k) {
      rhs[k] = 1.0 / (k + 1);
      for (int p = 0; p < order; ++p) A[k * order + p] = std::pow(gx[p], k);
    }
    for (int col = 0; col < order; ++col) {  // tiny dense solve with pivoting
      int piv = col;
      for (int r2 = col + 1; r2 < order; ++r2)
        if (std::abs(A[r2 * order + col]) > std::abs(A[piv * order + col]))
          piv = r2;
      for (int c2 = 0; c2 < order; ++c2)
        std::swap(A[col * order + c2], A[piv * order + c2]);
      std::swap(rhs[col], rhs[piv]);
      for (int r2 = col + 1; r2 < order; ++r2) {
        const double f = A[r2 * order + col] / A[col * order + col];
        for (int c2 = col; c2 < order; ++c2)
          A[r2 * order + c2] -= f * A[col * order + c2];
        rhs[r2] -= f * rhs[col];
      }
    }
    for (int r2 = order - 1; r2 >= 0; --r2) {
      double s = rhs[r2];
      for (int c2 = r2 + 1; c2 < order; ++c2) s -= A[r2 * order + c2] * gw[c2];
      gw[r2] = s / A[r2 * order + r2];
    }
    for (int trial = 0; trial < 20; ++trial) {
      const double o = wd(gen) * 0.5, s = wd(gen);
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) {
          double quad = 0.0;
          for (int p = 0; p < order; ++p)
            quad += gw[p] * eval_basis(sp, i, o + s * gx[p]) *
                    eval_basis(sp, j, gx[p]);
          const double exact = integrate_basis_product(sp, i, sp, j, o, s);
          CHECK(exact == doctest::Approx(quad).scale(1.0).epsilon(1e-14));
        }
    }
  }
}

TEST_CASE("interface tiling: pieces partition both rings at any angle") {
  Fixture fx(4);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> ad(-20.0, 20.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double th = ad(gen);
    fx.geo.set_motion(th, 1.0);
    fx.mortar.update();
    const auto& pieces = fx.mortar.pieces();
    REQUIRE((int(pieces.size()) == fx.nf || int(pieces.size()) == 2 * fx.nf));
    std::vector<double> rot_span(fx.nf, 0.0), sta_span(fx.nf, 0.0);
    std::set<std::pair<double, double>> combos;
    double total_len = 0.0;
    for (const auto& p : pieces) {
      rot_span[p.rot] += p.s_rot;
      sta_span[p.sta] += p.s_sta;
      combos.insert({p.o_rot, p.s_rot});
      combos.insert({p.o_sta, p.s_sta});
      total_len += p.len;
      CHECK(p.s_rot > 0.0);
      CHECK(p.s_sta > 0.0);
      CHECK(p.o_rot >= 0.0);
      CHECK(p.o_sta + p.s_sta <= 1.0 + 1e-14);
      // the mortar is the same angular interval seen from either ring
      CHECK(p.len * fx.nf == doctest::Approx(p.s_rot).epsilon(1e-9));
      CHECK(p.len * fx.nf == doctest::Approx(p.s_sta).epsilon(1e-9));
    }
    CHECK(combos.size() <= 4);  // bit-identical operator reuse across faces
    CHECK(total_len == doctest::Approx(1.0).epsilon(1e-9));
    for (int r = 0; r < fx.nf; ++r) {
      CHECK(rot_span[r] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(sta_span[r] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("connectivity is a pure function of the pose") {
  Fixture fx(3);
  fx.geo.set_motion(0.37, 2.0);
  fx.mortar.update();
  auto before = fx.mortar.pieces();
  fx.geo.set_motion(-1.12, 2.0);
  fx.mortar.update();
  fx.geo.set_motion(0.37, 2.0);
  fx.mortar.update();
  const auto& after = fx.mortar.pieces();
  REQUIRE(before.size() == after.size());
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i].rot == after[i].rot);
    CHECK(before[i].sta == after[i].sta);
    CHECK(before[i].o_rot == after[i].o_rot);  // bitwise
    CHECK(before[i].s_rot == after[i].s_rot);
    CHECK(before[i].o_sta == after[i].o_sta);
    CHECK(before[i].s_sta == after[i].s_sta);
  }
}

TEST_CASE("tiny slivers snap to the aligned configuration") {
  Fixture fx(3);
  const double rev = 1.0 / fx.nf;  // rotate by exactly one face span
  fx.geo.set_motion(2.0 * kPi * (rev + 1e-13), 1.0);
  fx.mortar.update();
  CHECK(int(fx.mortar.pieces().size()) == fx.nf);
  CHECK(fx.mortar.pieces()[0].sta == 1);  // partner shifted by one face
  fx.geo.set_motion(2.0 * kPi * (rev - 1e-13), 1.0);
  fx.mortar.update();
  CHECK(int(fx.mortar.pieces().size()) == fx.nf);
  CHECK(fx.mortar.pieces()[0].sta == 1);
}

TEST_CASE("uniform flow crosses the interface exactly at any angle") {
  GasModel gas{1.4, 1.0, 0.0, 0.72};
  for (int order : {3, 4}) {
    Fixture fx(order, 24, 8);
    const State qinf = cons_from_prim(gas, 1.0, 0.8, -0.35, 7.9);
    State Finf, Ginf;
    inviscid_flux(gas, qinf, 0.0, 0.0, Finf, Ginf);
    std::mt19937 gen(29);
    std::uniform_real_distribution<double> ad(-8.0, 8.0);
    const int N = fx.N;
    std::vector<double> q_rot(size_t(fx.nf) * N * 4), q_sta(q_rot.size());
    std::vector<double> out_rot(q_rot.size()), out_sta(q_rot.size());
    for (size_t i = 0; i < q_rot.size(); ++i)
      q_rot[i] = q_sta[i] = qinf[i % 4];
    const double om = 2.0;
    for (int trial = 0; trial < 40; ++trial) {
      fx.geo.set_motion(ad(gen), om);
      fx.mortar.update();
      fx.mortar.convective_flux(q_rot.data(), q_sta.data(), out_rot.data(),
                                out_sta.data());
      double worst = 0.0;
      for (int r = 0; r < fx.nf; ++r) {
        const CellGeometry& gr = fx.geo.cell(fx.mesh.ring_rot[r].cell);
        const CellGeometry& gs = fx.geo.cell(fx.mesh.ring_sta[r].cell);
        for (int t = 0; t < N; ++t) {
          // rotating side: face 1, outward normal +a1, grid flux om*gcl
          int idx = t * (N + 1) + N;
          for (int k = 0; k < 4; ++k) {
            const double expect = gr.a1x_xf[idx] * Finf[k] +
                                  gr.a1y_xf[idx] * Ginf[k] -
                                  om * gr.gcl_xf[idx] * qinf[k];
            worst = std::max(worst,
                             std::abs(out_rot[(r * N + t) * 4 + k] - expect));
          }
          // stationary side: face 3, outward normal -a1, no grid motion
          idx = (N - 1 - t) * (N + 1);
          for (int k = 0; k < 4; ++k) {
            const double expect =
                -gs.a1x_xf[idx] * Finf[k] - gs.a1y_xf[idx] * Ginf[k];
            worst = std::max(worst,
                             std::abs(out_sta[(r * N + t) * 4 + k] - expect));
          }
        }
      }
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("aligned interface reproduces the conforming face flux") {
  for (int order : {3, 4}) {
    Fixture fx(order, 12, 4);
    const double om = 2.0;
    fx.geo.set_motion(0.0, om);
    fx.mortar.update();
    REQUIRE(int(fx.mortar.pieces().size()) == fx.nf);
    auto field = [&](Vec2 p) {
      const double u = 0.3 + 0.1 * std::sin(p.x) * std::cos(p.y);
      const double v = -0.2 + 0.08 * std::cos(p.x + 0.4 * p.y);
      const double rho = 1.0 + 0.05 * std::sin(0.7 * p.x - p.y);
      const double pr = 8.0 + 0.3 * std::cos(p.x) * std::cos(p.y);
      return cons_from_prim(fx.gas, rho, u, v, pr);
    };
    auto q_rot = fx.sample(fx.mesh.ring_rot, field);
    auto q_sta = fx.sample(fx.mesh.ring_sta, field);
    std::vector<double> out_rot(q_rot.size()), out_sta(q_rot.size());
    fx.mortar.convective_flux(q_rot.data(), q_sta.data(), out_rot.data(),
                              out_sta.data());
    // both traces sample one smooth field at identical points: zero jump, so
    // the common flux must equal each side's own central flux
    const int N = fx.N;
    double worst = 0.0;
    for (int r = 0; r < fx.nf; ++r) {
      const CellGeometry& gr = fx.geo.cell(fx.mesh.ring_rot[r].cell);
      const CellGeometry& gs = fx.geo.cell(fx.mesh.ring_sta[r].cell);
      for (int t = 0; t < N; ++t) {
        State q;
        for (int k = 0; k < 4; ++k) q[k] = q_rot[(r * N + t) * 4 + k];
        State F, G;
        inviscid_flux(fx.gas, q, 0.0, 0.0, F, G);
        int idx = t * (N + 1) + N;
        for (int k = 0; k < 4; ++k) {
          const double expect = gr.a1x_xf[idx] * F[k] + gr.a1y_xf[idx] * G[k] -
                                om * gr.gcl_xf[idx] * q[k];
          worst = std::max(worst,
                           std::abs(out_rot[(r * N + t) * 4 + k] - expect));
        }
        for (int k = 0; k < 4; ++k) q[k] = q_sta[(r * N + t) * 4 + k];
        inviscid_flux(fx.gas, q, 0.0, 0.0, F, G);
        idx = (N - 1 - t) * (N + 1);
        for (int k = 0; k < 4; ++k) {
          const double expect = -gs.a1x_xf[idx] * F[k] - gs.a1y_xf[idx] * G[k];
          worst = std::max(worst,
                           std::abs(out_sta[(r * N + t) * 4 + k] - expect));
        }
      }
    }
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("aligned common solution averages matched trace points") {
  Fixture fx(4, 12, 4);
  fx.geo.set_motion(0.0, 1.0);
  fx.mortar.update();
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> dd(0.5, 2.0);
  const int N = fx.N;
  std::vector<double> q_rot(size_t(fx.nf) * N * 4), q_sta(q_rot.size());
  for (auto& x : q_rot) x = dd(gen);
  for (auto& x : q_sta) x = dd(gen);
  std::vector<double> out_rot(q_rot.size()), out_sta(q_rot.size());
  fx.mortar.common_solution(q_rot.data(), q_sta.data(), out_rot.data(),
                            out_sta.data());
  // matched physical points: rot trace t <-> sta trace N-1-t on the partner
  for (int r = 0; r < fx.nf; ++r)
    for (int t = 0; t < N; ++t)
      for (int k = 0; k < 4; ++k) {
        const double avg = 0.5 * (q_rot[(r * N + t) * 4 + k] +
                                  q_sta[(r * N + (N - 1 - t)) * 4 + k]);
        CHECK(out_rot[(r * N + t) * 4 + k] ==
              doctest::Approx(avg).epsilon(1e-13));
        CHECK(out_sta[(r * N + (N - 1 - t)) * 4 + k] ==
              doctest::Approx(avg).epsilon(1e-13));
      }
}

TEST_CASE("nonconforming common solution preserves constants") {
  Fixture fx(4, 24, 8);
  fx.geo.set_motion(0.31, 1.0);
  fx.mortar.update();
  const int N = fx.N;
  const double vals[4] = {1.2, -0.4, 0.9, 8.3};
  std::vector<double> q(size_t(fx.nf) * N * 4);
  for (size_t i = 0; i < q.size(); ++i) q[i] = vals[i % 4];
  std::vector<double> out_rot(q.size()), out_sta(q.size());
  fx.mortar.common_solution(q.data(), q.data(), out_rot.data(),
                            out_sta.data());
  for (size_t i = 0; i < q.size(); ++i) {
    CHECK(out_rot[i] == doctest::Approx(vals[i % 4]).epsilon(1e-13));
    CHECK(out_sta[i] == doctest::Approx(vals[i % 4]).epsilon(1e-13));
  }
}

TEST_CASE("viscous exchange averages the two sides") {
  Fixture fx(3, 12, 4);
  fx.geo.set_motion(0.0, 0.0);  // aligned, identity projections
  fx.mortar.update();
  const int N = fx.N;
  std::mt19937 gen(41);
  std::uniform_real_distribution<double> dd(-1.0, 1.0);
  std::vector<double> fr(size_t(fx.nf) * N * 4), gr(fr.size()), fs(fr.size()),
      gs(fr.size());
  for (auto* v : {&fr, &gr, &fs, &gs})
    for (auto& x : *v) x = dd(gen);
  std::vector<double> out_rot(fr.size(), 0.0), out_sta(fr.size(), 0.0);
  fx.mortar.viscous_flux(fr.data(), gr.data(), fs.data(), gs.data(),
                         out_rot.data(), out_sta.data());
  double worst = 0.0;
  for (int r = 0; r < fx.nf; ++r) {
    const CellGeometry& g1 = fx.geo.cell(fx.mesh.ring_rot[r].cell);
    const CellGeometry& g3 = fx.geo.cell(fx.mesh.ring_sta[r].cell);
    for (int t = 0; t < N; ++t) {
      // matched points as in the aligned common-solution test
      const int ts = N - 1 - t;
      for (int k = 0; k < 4; ++k) {
        const double Fbar = 0.5 * (fr[(r * N + t) * 4 + k] +
                                   fs[(r * N + ts) * 4 + k]);
        const double Gbar = 0.5 * (gr[(r * N + t) * 4 + k] +
                                   gs[(r * N + ts) * 4 + k]);
        int idx = t * (N + 1) + N;
        worst = std::max(worst, std::abs(out_rot[(r * N + t) * 4 + k] -
                                         (g1.a1x_xf[idx] * Fbar +
                                          g1.a1y_xf[idx] * Gbar)));
        idx = t * (N + 1);  // eta index of sta trace ts is t
        worst = std::max(worst, std::abs(out_sta[(r * N + ts) * 4 + k] -
                                         (-g3.a1x_xf[idx] * Fbar -
                                          g3.a1y_xf[idx] * Gbar)));
      }
    }
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("interface timing accumulates and resets") {
  Fixture fx(3);
  CHECK(fx.mortar.comm_seconds() > 0.0);  // constructor ran update()
  fx.mortar.reset_comm_time();
  CHECK(fx.mortar.comm_seconds() == 0.0);
  fx.geo.set_motion(0.2, 1.0);
  fx.mortar.update();
  CHECK(fx.mortar.comm_seconds() > 0.0);
}

TEST_CASE("meshes without an interface build an inactive exchanger") {
  MeshTopology empty;
  empty.nodes.push_back({0, 0});
  GasModel gas;
  // geometry over an empty cell list is fine; the exchanger must be inert
  GeometryCache geo(empty, 3);
  SlidingMortar m(empty, geo, gas);
  CHECK(!m.active());
  m.update();
  m.common_solution(nullptr, nullptr, nullptr, nullptr);
  m.convective_flux(nullptr, nullptr, nullptr, nullptr);
  CHECK(m.pieces().empty());
}
