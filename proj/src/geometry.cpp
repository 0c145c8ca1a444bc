#include "ssd/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ssd {

namespace {

struct MapEval {
  Vec2 x, dxi, deta;
};

MapEval eval_map(const MeshTopology& mesh, int c, double xi, double eta) {
  double N[12], dN1[12], dN2[12];
  shape_values(xi, eta, N);
  shape_derivs(xi, eta, dN1, dN2);
  MapEval e;
  for (int k = 0; k < 12; ++k) {
    const Vec2& v = mesh.nodes[mesh.cells[c].n[k]];
    e.x.x += N[k] * v.x;
    e.x.y += N[k] * v.y;
    e.dxi.x += dN1[k] * v.x;
    e.dxi.y += dN1[k] * v.y;
    e.deta.x += dN2[k] * v.x;
    e.deta.y += dN2[k] * v.y;
  }
  return e;
}

}  // namespace

GeometryCache::GeometryCache(const MeshTopology& mesh, int order)
    : ops_(make_operators(order)), center_(mesh.center) {
  const int nc = static_cast<int>(mesh.cells.size());
  ref_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    build_cell(mesh, c, ref_[c]);
    if (mesh.cells[c].rotating) rotating_.push_back(c);
  }
  cur_ = ref_;
  set_motion(0.0, 0.0);
}

void GeometryCache::build_cell(const MeshTopology& mesh, int c,
                               CellGeometry& g) const {
  const int n = ops_.order;
  const auto& sp = ops_.pts.solution_pts;
  const auto& fp = ops_.pts.flux_pts;

  auto fill = [&](double xi, double eta, int idx, std::vector<double>& X,
                  std::vector<double>& Y, std::vector<double>& JAC,
                  std::vector<double>& A1X, std::vector<double>& A1Y,
                  std::vector<double>& A2X, std::vector<double>& A2Y) {
    const MapEval e = eval_map(mesh, c, xi, eta);
    const double jac = e.dxi.x * e.deta.y - e.deta.x * e.dxi.y;
    if (!(jac > 0.0))
      throw std::runtime_error("nonpositive Jacobian in cell " +
                               std::to_string(c));
    X[idx] = e.x.x;
    Y[idx] = e.x.y;
    JAC[idx] = jac;
    A1X[idx] = e.deta.y;
    A1Y[idx] = -e.deta.x;
    A2X[idx] = -e.dxi.y;
    A2Y[idx] = e.dxi.x;
  };

  auto size_all = [&](int count, std::vector<double>* arrays[7]) {
    for (int k = 0; k < 7; ++k) arrays[k]->assign(count, 0.0);
  };
  std::vector<double>* asp[7] = {&g.x_sp, &g.y_sp, &g.jac_sp, &g.a1x_sp,
                                 &g.a1y_sp, &g.a2x_sp, &g.a2y_sp};
  std::vector<double>* axf[7] = {&g.x_xf, &g.y_xf, &g.jac_xf, &g.a1x_xf,
                                 &g.a1y_xf, &g.a2x_xf, &g.a2y_xf};
  std::vector<double>* ayf[7] = {&g.x_yf, &g.y_yf, &g.jac_yf, &g.a1x_yf,
                                 &g.a1y_yf, &g.a2x_yf, &g.a2y_yf};
  size_all(n * n, asp);
  size_all(n * (n + 1), axf);
  size_all(n * (n + 1), ayf);
  g.ugx_sp.assign(n * n, 0.0);
  g.ugy_sp.assign(n * n, 0.0);
  g.ugx_xf.assign(n * (n + 1), 0.0);
  g.ugy_xf.assign(n * (n + 1), 0.0);
  g.ugx_yf.assign(n * (n + 1), 0.0);
  g.ugy_yf.assign(n * (n + 1), 0.0);
  g.gcl_xf.assign(n * (n + 1), 0.0);
  g.gcl_yf.assign(n * (n + 1), 0.0);

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      fill(sp[i], sp[j], j * n + i, g.x_sp, g.y_sp, g.jac_sp, g.a1x_sp,
           g.a1y_sp, g.a2x_sp, g.a2y_sp);
  for (int j = 0; j < n; ++j)
    for (int f = 0; f <= n; ++f)
      fill(fp[f], sp[j], j * (n + 1) + f, g.x_xf, g.y_xf, g.jac_xf, g.a1x_xf,
           g.a1y_xf, g.a2x_xf, g.a2y_xf);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f <= n; ++f)
      fill(sp[i], fp[f], i * (n + 1) + f, g.x_yf, g.y_yf, g.jac_yf, g.a1x_yf,
           g.a1y_yf, g.a2x_yf, g.a2y_yf);

  if (!mesh.cells[c].rotating) return;

  // Grid-flux scalars from the FPxFP interpolant of P = |x - c|^2:
  //   gcl_xf(f, j) = -1/2 dP~/deta (FP_f, SP_j),
  //   gcl_yf(i, f) = +1/2 dP~/dxi  (SP_i, FP_f).
  std::vector<double> P((n + 1) * (n + 1));
  for (int gidx = 0; gidx <= n; ++gidx)
    for (int f = 0; f <= n; ++f) {
      const MapEval e = eval_map(mesh, c, fp[f], fp[gidx]);
      const double dx = e.x.x - center_.x, dy = e.x.y - center_.y;
      P[gidx * (n + 1) + f] = dx * dx + dy * dy;  // row g = eta node
    }
  // fp_deriv_at_sp[s*(n+1)+f] = l_f'(SP_s) on the FP nodes
  for (int j = 0; j < n; ++j)
    for (int f = 0; f <= n; ++f) {
      double d = 0.0;
      for (int gidx = 0; gidx <= n; ++gidx)
        d += P[gidx * (n + 1) + f] * ops_.fp_deriv_at_sp[j * (n + 1) + gidx];
      g.gcl_xf[j * (n + 1) + f] = -0.5 * d;
    }
  for (int i = 0; i < n; ++i)
    for (int f = 0; f <= n; ++f) {
      double d = 0.0;
      for (int gidx = 0; gidx <= n; ++gidx)
        d += P[f * (n + 1) + gidx] * ops_.fp_deriv_at_sp[i * (n + 1) + gidx];
      g.gcl_yf[i * (n + 1) + f] = 0.5 * d;
    }
}

void GeometryCache::set_motion(double theta, double omega) {
  theta_ = theta;
  omega_ = omega;
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int c : rotating_) {
    const CellGeometry& r = ref_[c];
    CellGeometry& g = cur_[c];
    auto pose = [&](const std::vector<double>& rx, const std::vector<double>& ry,
                    std::vector<double>& x, std::vector<double>& y,
                    std::vector<double>& ugx, std::vector<double>& ugy) {
      const size_t np = rx.size();
      for (size_t p = 0; p < np; ++p) {
        const double dx = rx[p] - center_.x, dy = ry[p] - center_.y;
        const double nx = ct * dx - st * dy, ny = st * dx + ct * dy;
        x[p] = center_.x + nx;
        y[p] = center_.y + ny;
        ugx[p] = -omega * ny;
        ugy[p] = omega * nx;
      }
    };
    auto rot = [&](const std::vector<double>& rx, const std::vector<double>& ry,
                   std::vector<double>& x, std::vector<double>& y) {
      const size_t np = rx.size();
      for (size_t p = 0; p < np; ++p) {
        const double vx = rx[p], vy = ry[p];
        x[p] = ct * vx - st * vy;
        y[p] = st * vx + ct * vy;
      }
    };
    pose(r.x_sp, r.y_sp, g.x_sp, g.y_sp, g.ugx_sp, g.ugy_sp);
    pose(r.x_xf, r.y_xf, g.x_xf, g.y_xf, g.ugx_xf, g.ugy_xf);
    pose(r.x_yf, r.y_yf, g.x_yf, g.y_yf, g.ugx_yf, g.ugy_yf);
    rot(r.a1x_sp, r.a1y_sp, g.a1x_sp, g.a1y_sp);
    rot(r.a2x_sp, r.a2y_sp, g.a2x_sp, g.a2y_sp);
    rot(r.a1x_xf, r.a1y_xf, g.a1x_xf, g.a1y_xf);
    rot(r.a2x_xf, r.a2y_xf, g.a2x_xf, g.a2y_xf);
    rot(r.a1x_yf, r.a1y_yf, g.a1x_yf, g.a1y_yf);
    rot(r.a2x_yf, r.a2y_yf, g.a2x_yf, g.a2y_yf);
  }
}

}  // namespace ssd
