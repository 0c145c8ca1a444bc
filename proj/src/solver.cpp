#include "ssd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ssd {

namespace {

// outward normal = sign * (a1 or a2); the outward common flux lands in the
// face flux slot with the same sign
constexpr double kFaceSign[4] = {-1.0, +1.0, +1.0, -1.0};

bool face_is_xi(int face) { return face == 1 || face == 3; }
int face_fp(int face, int n) { return (face == 1 || face == 2) ? n : 0; }
int face_row(int face, int n, int t) {
  return (face == 0 || face == 1) ? t : n - 1 - t;
}

// physical fluxes without the physicality check: flux-point states are
// interpolants of solution-point states validated each evaluation
inline void fast_flux(double gamma, const double* q, double* F, double* G) {
  const double inv_rho = 1.0 / q[0];
  const double u = q[1] * inv_rho, v = q[2] * inv_rho;
  const double p =
      (gamma - 1.0) * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) * inv_rho);
  F[0] = q[1];
  F[1] = q[1] * u + p;
  F[2] = q[2] * u;
  F[3] = (q[3] + p) * u;
  G[0] = q[2];
  G[1] = q[1] * v;
  G[2] = q[2] * v + p;
  G[3] = (q[3] + p) * v;
}

State load_state(const double* q) { return {q[0], q[1], q[2], q[3]}; }

}  // namespace

SdDiscretization::SdDiscretization(const MeshTopology& mesh, int order,
                                   const GasModel& gas,
                                   std::vector<BoundaryCondition> bcs)
    : mesh_(&mesh),
      gas_(gas),
      n_(order),
      geo_(mesh, order),
      mortar_(mesh, geo_, gas),
      bcs_(std::move(bcs)),
      viscous_(gas.mu > 0.0) {
  if (int(bcs_.size()) != mesh.n_bc_tags)
    throw std::invalid_argument("expected " + std::to_string(mesh.n_bc_tags) +
                                " boundary conditions, got " +
                                std::to_string(bcs_.size()));
  for (const auto& bc : bcs_)
    if (bc.kind == BoundaryCondition::Kind::exact_state && !bc.state)
      throw std::invalid_argument("exact_state boundary needs a state field");
  const size_t nc = mesh.cells.size();
  const size_t sp = nc * n_ * n_ * 4;
  const size_t fp = nc * n_ * (n_ + 1) * 4;
  qsp_.assign(sp, 0.0);
  uxf_.assign(fp, 0.0);
  uyf_.assign(fp, 0.0);
  fxf_.assign(fp, 0.0);
  fyf_.assign(fp, 0.0);
  tq_.assign(nc * 4 * n_ * 4, 0.0);
  bghost_.assign(mesh.boundary_faces.size() * n_ * 4, 0.0);
  if (viscous_) {
    gxsp_.assign(sp, 0.0);
    gysp_.assign(sp, 0.0);
    gx_xf_.assign(fp, 0.0);
    gy_xf_.assign(fp, 0.0);
    gx_yf_.assign(fp, 0.0);
    gy_yf_.assign(fp, 0.0);
  }
  const size_t ring = mesh.ring_rot.size() * n_ * 4;
  for (int s = 0; s < 2; ++s) {
    mq_[s].assign(ring, 0.0);
    mc_[s].assign(ring, 0.0);
    mf_[s].assign(ring, 0.0);
    if (viscous_) {
      mfv_[s].assign(ring, 0.0);
      mgv_[s].assign(ring, 0.0);
    }
  }
}

void SdDiscretization::set_pose(double theta, double omega) {
  geo_.set_motion(theta, omega);
  mortar_.update();
}

void SdDiscretization::residual(const std::vector<double>& qt, double time,
                                std::vector<double>& out) {
  if (int(qt.size()) != dof())
    throw std::invalid_argument("state vector size mismatch");
  fill_solution_points(qt);
  extrapolate_to_flux_points();
  extract_traces();
  compute_boundary_ghosts(time);
  if (viscous_) {
    apply_common_solution();
    compute_gradients();
  }
  interior_point_fluxes();
  common_face_fluxes();
  assemble_divergence(out);
}

void SdDiscretization::fill_solution_points(const std::vector<double>& qt) {
  const int n = n_;
  const double gm1 = gas_.gamma - 1.0;
  for (int c = 0; c < n_cells(); ++c) {
    const CellGeometry& g = geo_.cell(c);
    for (int p = 0; p < n * n; ++p) {
      const size_t at = (size_t(c) * n * n + p) * 4;
      const double inv_j = 1.0 / g.jac_sp[p];
      double q[4];
      for (int k = 0; k < 4; ++k) q[k] = qt[at + k] * inv_j;
      const double pr =
          gm1 * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0]);
      if (!(q[0] > 0.0) || !(pr > 0.0) || !std::isfinite(q[3]))
        throw NonPhysicalState(
            "cell " + std::to_string(c) + " point (" +
            std::to_string(p % n) + "," + std::to_string(p / n) +
            "): rho=" + std::to_string(q[0]) + " p=" + std::to_string(pr));
      for (int k = 0; k < 4; ++k) qsp_[at + k] = q[k];
    }
  }
}

void SdDiscretization::extrapolate_to_flux_points() {
  const int n = n_;
  const auto& E = geo_.ops().sp_to_fp;  // E[f*n + s]
  for (int c = 0; c < n_cells(); ++c) {
    const double* q = &qsp_[size_t(c) * n * n * 4];
    double* ux = &uxf_[size_t(c) * n * (n + 1) * 4];
    double* uy = &uyf_[size_t(c) * n * (n + 1) * 4];
    for (int j = 0; j < n; ++j)
      for (int f = 0; f <= n; ++f) {
        double acc[4] = {0, 0, 0, 0};
        for (int i = 0; i < n; ++i) {
          const double e = E[f * n + i];
          const double* s = q + (size_t(j) * n + i) * 4;
          for (int k = 0; k < 4; ++k) acc[k] += e * s[k];
        }
        double* d = ux + (size_t(j) * (n + 1) + f) * 4;
        for (int k = 0; k < 4; ++k) d[k] = acc[k];
      }
    for (int i = 0; i < n; ++i)
      for (int f = 0; f <= n; ++f) {
        double acc[4] = {0, 0, 0, 0};
        for (int j = 0; j < n; ++j) {
          const double e = E[f * n + j];
          const double* s = q + (size_t(j) * n + i) * 4;
          for (int k = 0; k < 4; ++k) acc[k] += e * s[k];
        }
        double* d = uy + (size_t(i) * (n + 1) + f) * 4;
        for (int k = 0; k < 4; ++k) d[k] = acc[k];
      }
  }
}

void SdDiscretization::extract_traces() {
  const int n = n_;
  for (int c = 0; c < n_cells(); ++c)
    for (int face = 0; face < 4; ++face) {
      const int f = face_fp(face, n);
      const auto& arr = face_is_xi(face) ? uxf_ : uyf_;
      for (int t = 0; t < n; ++t) {
        const int row = face_row(face, n, t);
        const double* s = &arr[((size_t(c) * n + row) * (n + 1) + f) * 4];
        double* d = &tq_[((size_t(c) * 4 + face) * n + t) * 4];
        for (int k = 0; k < 4; ++k) d[k] = s[k];
      }
    }
}

void SdDiscretization::compute_boundary_ghosts(double time) {
  const int n = n_;
  for (size_t b = 0; b < mesh_->boundary_faces.size(); ++b) {
    const BoundaryFace& bf = mesh_->boundary_faces[b];
    const BoundaryCondition& bc = bcs_[bf.bc];
    const CellGeometry& g = geo_.cell(bf.cell);
    const double sgn = kFaceSign[bf.face];
    const int f = face_fp(bf.face, n);
    const bool xi = face_is_xi(bf.face);
    for (int t = 0; t < n; ++t) {
      const int row = face_row(bf.face, n, t);
      const int tbl = row * (n + 1) + f;
      const double nx = sgn * (xi ? g.a1x_xf[tbl] : g.a2x_yf[tbl]);
      const double ny = sgn * (xi ? g.a1y_xf[tbl] : g.a2y_yf[tbl]);
      const double nmag = std::hypot(nx, ny);
      const double nxh = nx / nmag, nyh = ny / nmag;
      const Vec2 pos{xi ? g.x_xf[tbl] : g.x_yf[tbl],
                     xi ? g.y_xf[tbl] : g.y_yf[tbl]};
      const double ugx = xi ? g.ugx_xf[tbl] : g.ugx_yf[tbl];
      const double ugy = xi ? g.ugy_xf[tbl] : g.ugy_yf[tbl];
      const State qi = load_state(&tq_[((size_t(bf.cell) * 4 + bf.face) * n + t) * 4]);
      const double inv_rho = 1.0 / qi.rho;
      const double ui = qi.rho_u * inv_rho, vi = qi.rho_v * inv_rho;
      const double pi = pressure(gas_, qi);
      State qg;
      switch (bc.kind) {
        case BoundaryCondition::Kind::exact_state:
          qg = bc.state(pos, time);
          break;
        case BoundaryCondition::Kind::slip_wall: {
          const double urn = (ui - ugx) * nxh + (vi - ugy) * nyh;
          qg = cons_from_prim(gas_, qi.rho, ui - 2.0 * urn * nxh,
                              vi - 2.0 * urn * nyh, pi);
          break;
        }
        case BoundaryCondition::Kind::noslip_isothermal: {
          const double Ti = temperature(gas_, qi);
          const double Tg = 2.0 * bc.wall_temperature - Ti;
          if (!(Tg > 0.0))
            throw NonPhysicalState("isothermal wall ghost: T=" +
                                   std::to_string(Tg) + " at cell " +
                                   std::to_string(bf.cell));
          qg = cons_from_prim(gas_, pi / (gas_.R * Tg), 2.0 * ugx - ui,
                              2.0 * ugy - vi, pi);
          break;
        }
        case BoundaryCondition::Kind::noslip_adiabatic:
          qg = cons_from_prim(gas_, qi.rho, 2.0 * ugx - ui, 2.0 * ugy - vi,
                              pi);
          break;
        case BoundaryCondition::Kind::pressure_outlet:
          qg = cons_from_prim(gas_, qi.rho, ui, vi, bc.outlet_pressure);
          break;
      }
      double* d = &bghost_[(b * n + t) * 4];
      for (int k = 0; k < 4; ++k) d[k] = qg[k];
    }
  }
}

void SdDiscretization::apply_common_solution() {
  const int n = n_;
  auto set_face_value = [&](int c, int face, int t, const double* v) {
    const int row = face_row(face, n, t);
    const int f = face_fp(face, n);
    auto& arr = face_is_xi(face) ? uxf_ : uyf_;
    double* d = &arr[((size_t(c) * n + row) * (n + 1) + f) * 4];
    for (int k = 0; k < 4; ++k) d[k] = v[k];
  };
  for (const InteriorFace& fc : mesh_->interior_faces)
    for (int t = 0; t < n; ++t) {
      const double* ql = &tq_[((size_t(fc.cell_l) * 4 + fc.face_l) * n + t) * 4];
      const double* qr =
          &tq_[((size_t(fc.cell_r) * 4 + fc.face_r) * n + (n - 1 - t)) * 4];
      double avg[4];
      for (int k = 0; k < 4; ++k) avg[k] = 0.5 * (ql[k] + qr[k]);
      set_face_value(fc.cell_l, fc.face_l, t, avg);
      set_face_value(fc.cell_r, fc.face_r, n - 1 - t, avg);
    }
  for (size_t b = 0; b < mesh_->boundary_faces.size(); ++b) {
    const BoundaryFace& bf = mesh_->boundary_faces[b];
    for (int t = 0; t < n; ++t) {
      const double* qi = &tq_[((size_t(bf.cell) * 4 + bf.face) * n + t) * 4];
      const double* qg = &bghost_[(b * n + t) * 4];
      double avg[4];
      for (int k = 0; k < 4; ++k) avg[k] = 0.5 * (qi[k] + qg[k]);
      set_face_value(bf.cell, bf.face, t, avg);
    }
  }
  if (mortar_.active()) {
    const int nr = mortar_.face_count();
    for (int s = 0; s < 2; ++s) {
      const auto& ring = s == 0 ? mesh_->ring_rot : mesh_->ring_sta;
      for (int r = 0; r < nr; ++r)
        for (int t = 0; t < n; ++t)
          for (int k = 0; k < 4; ++k)
            mq_[s][(size_t(r) * n + t) * 4 + k] =
                tq_[((size_t(ring[r].cell) * 4 + ring[r].face) * n + t) * 4 + k];
    }
    mortar_.common_solution(mq_[0].data(), mq_[1].data(), mc_[0].data(),
                            mc_[1].data());
    for (int s = 0; s < 2; ++s) {
      const auto& ring = s == 0 ? mesh_->ring_rot : mesh_->ring_sta;
      for (int r = 0; r < nr; ++r)
        for (int t = 0; t < n; ++t)
          set_face_value(ring[r].cell, ring[r].face, t,
                         &mc_[s][(size_t(r) * n + t) * 4]);
    }
  }
}

void SdDiscretization::compute_gradients() {
  const int n = n_;
  const auto& D = geo_.ops().fp_deriv_at_sp;  // D[i*(n+1) + f]
  const auto& E = geo_.ops().sp_to_fp;
  for (int c = 0; c < n_cells(); ++c) {
    const CellGeometry& g = geo_.cell(c);
    const double* ux = &uxf_[size_t(c) * n * (n + 1) * 4];
    const double* uy = &uyf_[size_t(c) * n * (n + 1) * 4];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double dxi[4] = {0, 0, 0, 0}, deta[4] = {0, 0, 0, 0};
        for (int f = 0; f <= n; ++f) {
          const double di = D[i * (n + 1) + f], dj = D[j * (n + 1) + f];
          const double* sx = ux + (size_t(j) * (n + 1) + f) * 4;
          const double* sy = uy + (size_t(i) * (n + 1) + f) * 4;
          for (int k = 0; k < 4; ++k) {
            dxi[k] += di * sx[k];
            deta[k] += dj * sy[k];
          }
        }
        const int p = j * n + i;
        const double inv_j = 1.0 / g.jac_sp[p];
        const size_t at = (size_t(c) * n * n + p) * 4;
        for (int k = 0; k < 4; ++k) {
          gxsp_[at + k] =
              (g.a1x_sp[p] * dxi[k] + g.a2x_sp[p] * deta[k]) * inv_j;
          gysp_[at + k] =
              (g.a1y_sp[p] * dxi[k] + g.a2y_sp[p] * deta[k]) * inv_j;
        }
      }
    // gradients to the flux points, both families
    const double* gx = &gxsp_[size_t(c) * n * n * 4];
    const double* gy = &gysp_[size_t(c) * n * n * 4];
    double* dgx[2] = {&gx_xf_[size_t(c) * n * (n + 1) * 4],
                      &gx_yf_[size_t(c) * n * (n + 1) * 4]};
    double* dgy[2] = {&gy_xf_[size_t(c) * n * (n + 1) * 4],
                      &gy_yf_[size_t(c) * n * (n + 1) * 4]};
    for (int j = 0; j < n; ++j)
      for (int f = 0; f <= n; ++f) {
        double ax[4] = {0, 0, 0, 0}, ay[4] = {0, 0, 0, 0};
        for (int i = 0; i < n; ++i) {
          const double e = E[f * n + i];
          for (int k = 0; k < 4; ++k) {
            ax[k] += e * gx[(size_t(j) * n + i) * 4 + k];
            ay[k] += e * gy[(size_t(j) * n + i) * 4 + k];
          }
        }
        for (int k = 0; k < 4; ++k) {
          dgx[0][(size_t(j) * (n + 1) + f) * 4 + k] = ax[k];
          dgy[0][(size_t(j) * (n + 1) + f) * 4 + k] = ay[k];
        }
      }
    for (int i = 0; i < n; ++i)
      for (int f = 0; f <= n; ++f) {
        double ax[4] = {0, 0, 0, 0}, ay[4] = {0, 0, 0, 0};
        for (int j = 0; j < n; ++j) {
          const double e = E[f * n + j];
          for (int k = 0; k < 4; ++k) {
            ax[k] += e * gx[(size_t(j) * n + i) * 4 + k];
            ay[k] += e * gy[(size_t(j) * n + i) * 4 + k];
          }
        }
        for (int k = 0; k < 4; ++k) {
          dgx[1][(size_t(i) * (n + 1) + f) * 4 + k] = ax[k];
          dgy[1][(size_t(i) * (n + 1) + f) * 4 + k] = ay[k];
        }
      }
  }
}

void SdDiscretization::interior_point_fluxes() {
  const int n = n_;
  const double om = geo_.omega();
  const double gamma = gas_.gamma;
  for (int c = 0; c < n_cells(); ++c) {
    const CellGeometry& g = geo_.cell(c);
    const size_t base = size_t(c) * n * (n + 1) * 4;
    for (int j = 0; j < n; ++j)
      for (int f = 1; f < n; ++f) {
        const int tbl = j * (n + 1) + f;
        const double* q = &uxf_[base + size_t(tbl) * 4];
        double F[4], G[4];
        fast_flux(gamma, q, F, G);
        double* d = &fxf_[base + size_t(tbl) * 4];
        for (int k = 0; k < 4; ++k)
          d[k] = g.a1x_xf[tbl] * F[k] + g.a1y_xf[tbl] * G[k] -
                 om * g.gcl_xf[tbl] * q[k];
        if (viscous_) {
          StateGrad gr{load_state(&gx_xf_[base + size_t(tbl) * 4]),
                       load_state(&gy_xf_[base + size_t(tbl) * 4])};
          State Fv, Gv;
          viscous_flux(gas_, load_state(q), gr, Fv, Gv);
          for (int k = 0; k < 4; ++k)
            d[k] += g.a1x_xf[tbl] * Fv[k] + g.a1y_xf[tbl] * Gv[k];
        }
      }
    for (int i = 0; i < n; ++i)
      for (int f = 1; f < n; ++f) {
        const int tbl = i * (n + 1) + f;
        const double* q = &uyf_[base + size_t(tbl) * 4];
        double F[4], G[4];
        fast_flux(gamma, q, F, G);
        double* d = &fyf_[base + size_t(tbl) * 4];
        for (int k = 0; k < 4; ++k)
          d[k] = g.a2x_yf[tbl] * F[k] + g.a2y_yf[tbl] * G[k] -
                 om * g.gcl_yf[tbl] * q[k];
        if (viscous_) {
          StateGrad gr{load_state(&gx_yf_[base + size_t(tbl) * 4]),
                       load_state(&gy_yf_[base + size_t(tbl) * 4])};
          State Fv, Gv;
          viscous_flux(gas_, load_state(q), gr, Fv, Gv);
          for (int k = 0; k < 4; ++k)
            d[k] += g.a2x_yf[tbl] * Fv[k] + g.a2y_yf[tbl] * Gv[k];
        }
      }
  }
}

void SdDiscretization::common_face_fluxes() {
  const int n = n_;
  const double om = geo_.omega();
  // face-point slot writer: slot value = face sign * outward flux
  auto write_flux = [&](int c, int face, int t, const double* phi) {
    const int row = face_row(face, n, t);
    const int f = face_fp(face, n);
    auto& arr = face_is_xi(face) ? fxf_ : fyf_;
    double* d = &arr[((size_t(c) * n + row) * (n + 1) + f) * 4];
    const double sgn = kFaceSign[face];
    for (int k = 0; k < 4; ++k) d[k] = sgn * phi[k];
  };
  struct FaceTables {
    double nx, ny, nmag, gout, vgn;
    int tbl;
  };
  auto tables_at = [&](int c, int face, int t) -> FaceTables {
    const CellGeometry& g = geo_.cell(c);
    const double sgn = kFaceSign[face];
    const int f = face_fp(face, n);
    const int row = face_row(face, n, t);
    const int tbl = row * (n + 1) + f;
    const bool xi = face_is_xi(face);
    FaceTables ft;
    ft.tbl = tbl;
    ft.nx = sgn * (xi ? g.a1x_xf[tbl] : g.a2x_yf[tbl]);
    ft.ny = sgn * (xi ? g.a1y_xf[tbl] : g.a2y_yf[tbl]);
    ft.nmag = std::hypot(ft.nx, ft.ny);
    ft.gout = sgn * om * (xi ? g.gcl_xf[tbl] : g.gcl_yf[tbl]);
    const double ugx = xi ? g.ugx_xf[tbl] : g.ugx_yf[tbl];
    const double ugy = xi ? g.ugy_xf[tbl] : g.ugy_yf[tbl];
    ft.vgn = (ugx * ft.nx + ugy * ft.ny) / ft.nmag;
    return ft;
  };
  auto common_inviscid = [&](const State& ql, const State& qr,
                             const FaceTables& ft, double* phi) {
    State Fl, Gl, Fr, Gr;
    inviscid_flux(gas_, ql, 0.0, 0.0, Fl, Gl);
    inviscid_flux(gas_, qr, 0.0, 0.0, Fr, Gr);
    const double nxh = ft.nx / ft.nmag, nyh = ft.ny / ft.nmag;
    const double unl = (ql.rho_u * nxh + ql.rho_v * nyh) / ql.rho;
    const double unr = (qr.rho_u * nxh + qr.rho_v * nyh) / qr.rho;
    const double lam =
        std::max(std::abs(unl - ft.vgn) + sound_speed(gas_, ql),
                 std::abs(unr - ft.vgn) + sound_speed(gas_, qr));
    for (int k = 0; k < 4; ++k)
      phi[k] = ft.nx * 0.5 * (Fl[k] + Fr[k]) + ft.ny * 0.5 * (Gl[k] + Gr[k]) -
               ft.gout * 0.5 * (ql[k] + qr[k]) -
               0.5 * lam * ft.nmag * (qr[k] - ql[k]);
  };
  // gradient of one side at its face point, from the corrected FP arrays
  auto grad_at = [&](int c, int face, int t) -> StateGrad {
    const int row = face_row(face, n, t);
    const int f = face_fp(face, n);
    const size_t at = ((size_t(c) * n + row) * (n + 1) + f) * 4;
    if (face_is_xi(face))
      return {load_state(&gx_xf_[at]), load_state(&gy_xf_[at])};
    return {load_state(&gx_yf_[at]), load_state(&gy_yf_[at])};
  };
  auto common_value_at = [&](int c, int face, int t) -> State {
    const int row = face_row(face, n, t);
    const int f = face_fp(face, n);
    const size_t at = ((size_t(c) * n + row) * (n + 1) + f) * 4;
    return load_state(face_is_xi(face) ? &uxf_[at] : &uyf_[at]);
  };

  for (const InteriorFace& fc : mesh_->interior_faces)
    for (int t = 0; t < n; ++t) {
      const int tr = n - 1 - t;
      const State ql =
          load_state(&tq_[((size_t(fc.cell_l) * 4 + fc.face_l) * n + t) * 4]);
      const State qr =
          load_state(&tq_[((size_t(fc.cell_r) * 4 + fc.face_r) * n + tr) * 4]);
      const FaceTables ft = tables_at(fc.cell_l, fc.face_l, t);
      double phi[4];
      common_inviscid(ql, qr, ft, phi);
      if (viscous_) {
        const State qc = common_value_at(fc.cell_l, fc.face_l, t);
        State Fl, Gl, Fr, Gr;
        viscous_flux(gas_, qc, grad_at(fc.cell_l, fc.face_l, t), Fl, Gl);
        viscous_flux(gas_, qc, grad_at(fc.cell_r, fc.face_r, tr), Fr, Gr);
        for (int k = 0; k < 4; ++k)
          phi[k] += ft.nx * 0.5 * (Fl[k] + Fr[k]) +
                    ft.ny * 0.5 * (Gl[k] + Gr[k]);
      }
      write_flux(fc.cell_l, fc.face_l, t, phi);
      double neg[4];
      for (int k = 0; k < 4; ++k) neg[k] = -phi[k];
      write_flux(fc.cell_r, fc.face_r, tr, neg);
    }

  for (size_t b = 0; b < mesh_->boundary_faces.size(); ++b) {
    const BoundaryFace& bf = mesh_->boundary_faces[b];
    const BoundaryCondition& bc = bcs_[bf.bc];
    for (int t = 0; t < n; ++t) {
      const State qi =
          load_state(&tq_[((size_t(bf.cell) * 4 + bf.face) * n + t) * 4]);
      const State qg = load_state(&bghost_[(b * n + t) * 4]);
      const FaceTables ft = tables_at(bf.cell, bf.face, t);
      double phi[4];
      common_inviscid(qi, qg, ft, phi);
      if (viscous_ && bc.kind != BoundaryCondition::Kind::slip_wall) {
        const State qc = common_value_at(bf.cell, bf.face, t);
        const StateGrad gr = grad_at(bf.cell, bf.face, t);
        State Fv, Gv;
        viscous_flux(gas_, qc, gr, Fv, Gv);
        if (bc.kind == BoundaryCondition::Kind::noslip_adiabatic) {
          // remove the normal heat flux
          double Tx, Ty;
          temperature_gradient(gas_, qc, gr, Tx, Ty);
          const double nxh = ft.nx / ft.nmag, nyh = ft.ny / ft.nmag;
          const double tn = Tx * nxh + Ty * nyh;
          const double kc = gas_.conductivity();
          Fv.E += kc * tn * nxh;
          Gv.E += kc * tn * nyh;
        }
        for (int k = 0; k < 4; ++k)
          phi[k] += ft.nx * Fv[k] + ft.ny * Gv[k];
      }
      write_flux(bf.cell, bf.face, t, phi);
    }
  }

  if (mortar_.active()) {
    const int nr = mortar_.face_count();
    for (int s = 0; s < 2; ++s) {
      const auto& ring = s == 0 ? mesh_->ring_rot : mesh_->ring_sta;
      for (int r = 0; r < nr; ++r)
        for (int t = 0; t < n; ++t)
          for (int k = 0; k < 4; ++k)
            mq_[s][(size_t(r) * n + t) * 4 + k] =
                tq_[((size_t(ring[r].cell) * 4 + ring[r].face) * n + t) * 4 +
                    k];
    }
    mortar_.convective_flux(mq_[0].data(), mq_[1].data(), mf_[0].data(),
                            mf_[1].data());
    if (viscous_) {
      for (int s = 0; s < 2; ++s) {
        const auto& ring = s == 0 ? mesh_->ring_rot : mesh_->ring_sta;
        for (int r = 0; r < nr; ++r)
          for (int t = 0; t < n; ++t) {
            const State qc = load_state(&mc_[s][(size_t(r) * n + t) * 4]);
            State Fv, Gv;
            viscous_flux(gas_, qc, grad_at(ring[r].cell, ring[r].face, t), Fv,
                         Gv);
            for (int k = 0; k < 4; ++k) {
              mfv_[s][(size_t(r) * n + t) * 4 + k] = Fv[k];
              mgv_[s][(size_t(r) * n + t) * 4 + k] = Gv[k];
            }
          }
      }
      mortar_.viscous_flux(mfv_[0].data(), mgv_[0].data(), mfv_[1].data(),
                           mgv_[1].data(), mf_[0].data(), mf_[1].data());
    }
    for (int s = 0; s < 2; ++s) {
      const auto& ring = s == 0 ? mesh_->ring_rot : mesh_->ring_sta;
      for (int r = 0; r < nr; ++r)
        for (int t = 0; t < n; ++t)
          write_flux(ring[r].cell, ring[r].face, t,
                     &mf_[s][(size_t(r) * n + t) * 4]);
    }
  }
}

void SdDiscretization::assemble_divergence(std::vector<double>& out) {
  const int n = n_;
  out.resize(dof());
  const auto& D = geo_.ops().fp_deriv_at_sp;
  for (int c = 0; c < n_cells(); ++c) {
    const double* fx = &fxf_[size_t(c) * n * (n + 1) * 4];
    const double* fy = &fyf_[size_t(c) * n * (n + 1) * 4];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double acc[4] = {0, 0, 0, 0};
        for (int f = 0; f <= n; ++f) {
          const double di = D[i * (n + 1) + f], dj = D[j * (n + 1) + f];
          const double* sx = fx + (size_t(j) * (n + 1) + f) * 4;
          const double* sy = fy + (size_t(i) * (n + 1) + f) * 4;
          for (int k = 0; k < 4; ++k) acc[k] += di * sx[k] + dj * sy[k];
        }
        double* d = &out[((size_t(c) * n + j) * n + i) * 4];
        for (int k = 0; k < 4; ++k) d[k] = -acc[k];
      }
  }
}

std::vector<double> SdDiscretization::init_field(
    const std::function<State(Vec2)>& field) const {
  const int n = n_;
  std::vector<double> qt(dof());
  for (int c = 0; c < n_cells(); ++c) {
    const CellGeometry& g = geo_.cell(c);
    for (int p = 0; p < n * n; ++p) {
      const State q = field({g.x_sp[p], g.y_sp[p]});
      for (int k = 0; k < 4; ++k)
        qt[(size_t(c) * n * n + p) * 4 + k] = g.jac_sp[p] * q[k];
    }
  }
  return qt;
}

State SdDiscretization::state_at(const std::vector<double>& qt, int cell,
                                 int i, int j) const {
  const size_t at = ((size_t(cell) * n_ + j) * n_ + i) * 4;
  const double inv_j = 1.0 / geo_.cell(cell).jac_sp[j * n_ + i];
  return {qt[at] * inv_j, qt[at + 1] * inv_j, qt[at + 2] * inv_j,
          qt[at + 3] * inv_j};
}

double SdDiscretization::stable_dt(const std::vector<double>& qt) const {
  const int n = n_;
  double worst = 0.0;
  const double visc_fac = viscous_
                              ? std::max(4.0 / 3.0, gas_.gamma / gas_.prandtl)
                              : 0.0;
  for (int c = 0; c < n_cells(); ++c) {
    const CellGeometry& g = geo_.cell(c);
    for (int p = 0; p < n * n; ++p) {
      const double inv_j = 1.0 / g.jac_sp[p];
      const size_t at = (size_t(c) * n * n + p) * 4;
      const State q{qt[at] * inv_j, qt[at + 1] * inv_j, qt[at + 2] * inv_j,
                    qt[at + 3] * inv_j};
      const double u = q.rho_u / q.rho - g.ugx_sp[p];
      const double v = q.rho_v / q.rho - g.ugy_sp[p];
      const double cs = sound_speed(gas_, q);
      const double m1 = std::hypot(g.a1x_sp[p], g.a1y_sp[p]);
      const double m2 = std::hypot(g.a2x_sp[p], g.a2y_sp[p]);
      const double s1 = std::abs(g.a1x_sp[p] * u + g.a1y_sp[p] * v) + cs * m1;
      const double s2 = std::abs(g.a2x_sp[p] * u + g.a2y_sp[p] * v) + cs * m2;
      double inv_dt = (n + 1) * (s1 + s2) * inv_j;
      if (viscous_) {
        const double nu = gas_.mu / q.rho * visc_fac;
        inv_dt += 2.0 * (n + 1) * (n + 1) * nu * (m1 * m1 + m2 * m2) * inv_j *
                  inv_j;
      }
      worst = std::max(worst, inv_dt);
    }
  }
  return 1.0 / worst;
}

WallLoads SdDiscretization::wall_loads(const std::vector<double>& qt,
                                       double time,
                                       const std::vector<int>& tags) {
  const int n = n_;
  fill_solution_points(qt);
  extrapolate_to_flux_points();
  extract_traces();
  compute_boundary_ghosts(time);
  if (viscous_) {
    apply_common_solution();
    compute_gradients();
  }
  const auto& w = geo_.ops().sp_weights;
  const Vec2 c0 = geo_.center();
  WallLoads loads;
  for (size_t b = 0; b < mesh_->boundary_faces.size(); ++b) {
    const BoundaryFace& bf = mesh_->boundary_faces[b];
    if (std::find(tags.begin(), tags.end(), bf.bc) == tags.end()) continue;
    const BoundaryCondition& bc = bcs_[bf.bc];
    const CellGeometry& g = geo_.cell(bf.cell);
    const double sgn = kFaceSign[bf.face];
    const int f = face_fp(bf.face, n);
    const bool xi = face_is_xi(bf.face);
    for (int t = 0; t < n; ++t) {
      const int row = face_row(bf.face, n, t);
      const int tbl = row * (n + 1) + f;
      // unnormalized outward normal; its magnitude carries the arc length
      const double nx = sgn * (xi ? g.a1x_xf[tbl] : g.a2x_yf[tbl]);
      const double ny = sgn * (xi ? g.a1y_xf[tbl] : g.a2y_yf[tbl]);
      const State qi =
          load_state(&tq_[((size_t(bf.cell) * 4 + bf.face) * n + t) * 4]);
      const State qg = load_state(&bghost_[(b * n + t) * 4]);
      State qc;
      for (int k = 0; k < 4; ++k) qc[k] = 0.5 * (qi[k] + qg[k]);
      const double p = pressure(gas_, qc);
      // traction on the wall = (p I - tau) . n; the flux tensors hold -tau
      double sx = p * nx, sy = p * ny;
      if (viscous_ && bc.kind != BoundaryCondition::Kind::slip_wall) {
        const size_t at = ((size_t(bf.cell) * n + row) * (n + 1) + f) * 4;
        const StateGrad gr =
            xi ? StateGrad{load_state(&gx_xf_[at]), load_state(&gy_xf_[at])}
               : StateGrad{load_state(&gx_yf_[at]), load_state(&gy_yf_[at])};
        State Fv, Gv;
        viscous_flux(gas_, qc, gr, Fv, Gv);
        sx += Fv.rho_u * nx + Gv.rho_u * ny;
        sy += Fv.rho_v * nx + Gv.rho_v * ny;
      }
      const double wt = w[row];
      const double x = (xi ? g.x_xf[tbl] : g.x_yf[tbl]) - c0.x;
      const double y = (xi ? g.y_xf[tbl] : g.y_yf[tbl]) - c0.y;
      loads.fx += wt * sx;
      loads.fy += wt * sy;
      loads.torque += wt * (x * sy - y * sx);
    }
  }
  return loads;
}

}  // namespace ssd
