#include "ssd/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace ssd {

namespace {

// Legendre-Gauss roots on [-1,1] for n = 1..9, 17 significant digits.
// Fixed constants keep flux-point layouts bit-reproducible across builds.
constexpr int kMaxInterior = 9;

const double kLegendreRoots1[] = {0.0};
const double kLegendreRoots2[] = {-0.57735026918962573, 0.57735026918962573};
const double kLegendreRoots3[] = {-0.7745966692414834, 0.0,
                                  0.7745966692414834};
const double kLegendreRoots4[] = {-0.86113631159405257, -0.33998104358485626,
                                  0.33998104358485626, 0.86113631159405257};
const double kLegendreRoots5[] = {-0.90617984593866396, -0.53846931010568311,
                                  0.0, 0.53846931010568311,
                                  0.90617984593866396};
const double kLegendreRoots6[] = {-0.93246951420315205, -0.66120938646626448,
                                  -0.23861918608319693, 0.23861918608319693,
                                  0.66120938646626448, 0.93246951420315205};
const double kLegendreRoots7[] = {-0.94910791234275849, -0.74153118559939446,
                                  -0.40584515137739718, 0.0,
                                  0.40584515137739718, 0.74153118559939446,
                                  0.94910791234275849};
const double kLegendreRoots8[] = {-0.96028985649753618, -0.79666647741362673,
                                  -0.52553240991632899, -0.18343464249564978,
                                  0.18343464249564978, 0.52553240991632899,
                                  0.79666647741362673, 0.96028985649753618};
const double kLegendreRoots9[] = {-0.96816023950762609, -0.83603110732663577,
                                  -0.61337143270059036, -0.32425342340380892,
                                  0.0, 0.32425342340380892,
                                  0.61337143270059036, 0.83603110732663577,
                                  0.96816023950762609};

const double* legendre_roots(int n) {
  switch (n) {
    case 1: return kLegendreRoots1;
    case 2: return kLegendreRoots2;
    case 3: return kLegendreRoots3;
    case 4: return kLegendreRoots4;
    case 5: return kLegendreRoots5;
    case 6: return kLegendreRoots6;
    case 7: return kLegendreRoots7;
    case 8: return kLegendreRoots8;
    case 9: return kLegendreRoots9;
    default: return nullptr;
  }
}

}  // namespace

PointSet1D make_point_set(int order) {
  if (order < 1 || order > kMaxInterior + 1) {
    throw std::invalid_argument("make_point_set: order must be in [1,10]");
  }
  PointSet1D p;
  p.order = order;
  p.solution_pts.resize(order);
  const double pi = 3.14159265358979323846;
  for (int s = 1; s <= order; ++s) {
    p.solution_pts[s - 1] = 0.5 * (1.0 - std::cos((2 * s - 1) * pi / (2 * order)));
  }
  p.flux_pts.resize(order + 1);
  p.flux_pts.front() = 0.0;
  if (order >= 2) {
    const double* r = legendre_roots(order - 1);
    for (int k = 0; k < order - 1; ++k) {
      p.flux_pts[k + 1] = 0.5 * (1.0 + r[k]);
    }
  }
  p.flux_pts.back() = 1.0;
  return p;
}

double eval_basis(const std::vector<double>& nodes, int i, double X) {
  const int K = static_cast<int>(nodes.size());
  double v = 1.0;
  for (int m = 0; m < K; ++m) {
    if (m == i) continue;
    v *= (X - nodes[m]) / (nodes[i] - nodes[m]);
  }
  return v;
}

double eval_basis_derivative(const std::vector<double>& nodes, int i,
                             double X) {
  const int K = static_cast<int>(nodes.size());
  double d = 0.0;
  for (int m = 0; m < K; ++m) {
    if (m == i) continue;
    double term = 1.0 / (nodes[i] - nodes[m]);
    for (int s = 0; s < K; ++s) {
      if (s == i || s == m) continue;
      term *= (X - nodes[s]) / (nodes[i] - nodes[s]);
    }
    d += term;
  }
  return d;
}

namespace {

// Compensated (double-double) arithmetic for the coefficient recursion below.
// Monomial coefficients of the factored integrand grow like the inverse
// barycentric weights while the integral stays O(1), so plain doubles lose up
// to 8 digits at order 10.  Carrying a correction term keeps the final result
// accurate to double rounding.
struct DD {
  double hi = 0.0, lo = 0.0;
};

inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DD dd_normalize(double hi, double lo) {
  double s = hi + lo;
  return {s, lo - (s - hi)};
}

inline DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  return dd_normalize(s.hi, s.lo + a.lo + b.lo);
}

inline DD dd_mul_d(DD a, double b) {
  DD p = two_prod(a.hi, b);
  return dd_normalize(p.hi, p.lo + a.lo * b);
}

inline DD dd_div_d(DD a, double b) {
  double q = a.hi / b;
  DD p = two_prod(q, b);
  return dd_normalize(q, ((a.hi - p.hi) - p.lo + a.lo) / b);
}

}  // namespace

double integrate_basis_product(const std::vector<double>& nodesA, int i,
                               const std::vector<double>& nodesB, int j,
                               double o, double s) {
  const int KA = static_cast<int>(nodesA.size());
  const int KB = static_cast<int>(nodesB.size());
  // coeff[k] multiplies z^k; degree grows by one per first-degree factor.
  // Hot path (rebuilt per stage on sliding meshes): fixed stack storage.
  constexpr int kMaxCoeffs = 24;
  if (KA + KB - 1 > kMaxCoeffs)
    throw std::length_error("integrate_basis_product: order too high");
  DD coeff[kMaxCoeffs];
  int nc = 1;
  coeff[0] = DD{1.0, 0.0};
  auto mul_linear = [&coeff, &nc](double c0, double c1) {
    coeff[nc] = DD{};
    for (int k = nc; k >= 1; --k) {
      coeff[k] = dd_add(dd_mul_d(coeff[k], c0), dd_mul_d(coeff[k - 1], c1));
    }
    coeff[0] = dd_mul_d(coeff[0], c0);
    ++nc;
  };
  for (int m = 0; m < KA; ++m) {
    if (m == i) continue;
    const double inv = 1.0 / (nodesA[i] - nodesA[m]);
    mul_linear((o - nodesA[m]) * inv, s * inv);
  }
  for (int n = 0; n < KB; ++n) {
    if (n == j) continue;
    const double inv = 1.0 / (nodesB[j] - nodesB[n]);
    mul_linear(-nodesB[n] * inv, inv);
  }
  DD integral{};
  for (int k = nc - 1; k >= 0; --k) {
    integral = dd_add(integral, dd_div_d(coeff[k], k + 1));
  }
  return integral.hi + integral.lo;
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes)
    : nodes_(std::move(nodes)) {
  const int K = size();
  inv_diff_.assign(static_cast<size_t>(K) * K, 0.0);
  for (int i = 0; i < K; ++i) {
    for (int m = 0; m < K; ++m) {
      if (m != i) inv_diff_[i * K + m] = 1.0 / (nodes_[i] - nodes_[m]);
    }
  }
}

void LagrangeBasis1D::values_at(double X, double* out) const {
  const int K = size();
  for (int i = 0; i < K; ++i) {
    double v = 1.0;
    for (int m = 0; m < K; ++m) {
      if (m == i) continue;
      v *= (X - nodes_[m]) * inv_diff_[i * K + m];
    }
    out[i] = v;
  }
}

void LagrangeBasis1D::derivatives_at(double X, double* out) const {
  const int K = size();
  for (int i = 0; i < K; ++i) {
    double d = 0.0;
    for (int m = 0; m < K; ++m) {
      if (m == i) continue;
      double term = inv_diff_[i * K + m];
      for (int s = 0; s < K; ++s) {
        if (s == i || s == m) continue;
        term *= (X - nodes_[s]) * inv_diff_[i * K + s];
      }
      d += term;
    }
    out[i] = d;
  }
}

Operators make_operators(int order) {
  Operators op;
  op.order = order;
  op.pts = make_point_set(order);
  const int N = order;
  LagrangeBasis1D sp_basis(op.pts.solution_pts);
  LagrangeBasis1D fp_basis(op.pts.flux_pts);

  op.sp_to_fp.resize(static_cast<size_t>(N + 1) * N);
  for (int k = 0; k <= N; ++k) {
    sp_basis.values_at(op.pts.flux_pts[k], op.sp_to_fp.data() + k * N);
  }
  op.fp_deriv_at_sp.resize(static_cast<size_t>(N) * (N + 1));
  for (int i = 0; i < N; ++i) {
    fp_basis.derivatives_at(op.pts.solution_pts[i],
                            op.fp_deriv_at_sp.data() + i * (N + 1));
  }
  op.sp_weights.resize(N);
  for (int i = 0; i < N; ++i) {
    // \int_0^1 h_i = integrate against the constant basis of a single node
    op.sp_weights[i] =
        integrate_basis_product(op.pts.solution_pts, i, {0.5}, 0, 0.0, 1.0);
  }
  return op;
}

std::array<double, 4> cubic_edge_values(double X) {
  // cardinal cubics through {0, 1/3, 2/3, 1}
  const double a = 3.0 * X;
  return {-(a - 1.0) * (a - 2.0) * (a - 3.0) / 6.0,
          X * (a - 2.0) * (a - 3.0) * 1.5,
          -X * (a - 1.0) * (a - 3.0) * 1.5,
          X * (a - 1.0) * (a - 2.0) / 2.0};
}

std::array<double, 4> cubic_edge_derivs(double X) {
  const double x2 = X * X;
  return {-13.5 * x2 + 18.0 * X - 5.5,
          40.5 * x2 - 45.0 * X + 9.0,
          -40.5 * x2 + 36.0 * X - 4.5,
          13.5 * x2 - 9.0 * X + 1.0};
}

}  // namespace ssd
