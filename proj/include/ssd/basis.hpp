#pragma once

#include <array>
#include <vector>

namespace ssd {

// 1D point layout for one coordinate direction of a spectral-difference
// element of order N: N solution points (Chebyshev-Gauss, interior) staggered
// with N+1 flux points (two endpoints plus the N-1 Legendre-Gauss roots).
// All coordinates live on the reference interval [0,1].
struct PointSet1D {
  int order = 0;
  std::vector<double> solution_pts;  // size N, strictly increasing, interior
  std::vector<double> flux_pts;      // size N+1, includes 0 and 1
};

// Throws std::invalid_argument unless 1 <= order <= 10.
PointSet1D make_point_set(int order);

// Value of the Lagrange cardinal polynomial h_i through `nodes` at X.
double eval_basis(const std::vector<double>& nodes, int i, double X);

// d/dX of the same cardinal polynomial.
double eval_basis_derivative(const std::vector<double>& nodes, int i, double X);

// Exact integral  I = \int_0^1 h_i^A(o + s z) * h_j^B(z) dz  where h^A is the
// cardinal polynomial through nodesA and h^B through nodesB.  The integrand is
// a product of first-degree factors in z; its coefficients are accumulated by
// repeated convolution and integrated term by term, so the result is exact to
// rounding for any offset o and scaling s.
double integrate_basis_product(const std::vector<double>& nodesA, int i,
                               const std::vector<double>& nodesB, int j,
                               double o, double s);

// Dense Lagrange basis through an arbitrary node set.  Precomputes barycentric
// weights; eval fills one value (or derivative) per node.
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(std::vector<double> nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }

  void values_at(double X, double* out) const;
  void derivatives_at(double X, double* out) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> inv_diff_;  // 1/(x_i - x_m), row-major K x K, diag 0
};

// Precomputed operator matrices tying solution and flux points together for
// one order.  Row-major storage.
struct Operators {
  int order = 0;
  PointSet1D pts;
  // value of SP cardinal h_j at flux point k:      sp_to_fp[k*N + j]
  std::vector<double> sp_to_fp;
  // d/dX of FP cardinal l_k at solution point i:   fp_deriv_at_sp[i*(N+1) + k]
  std::vector<double> fp_deriv_at_sp;
  // \int_0^1 h_i dX, interpolatory quadrature weights on the SPs
  std::vector<double> sp_weights;
};

Operators make_operators(int order);

// Cubic edge through 4 nodes at parameters {0, 1/3, 2/3, 1}: values and
// parameter derivatives of the cardinal polynomials at X.
std::array<double, 4> cubic_edge_values(double X);
std::array<double, 4> cubic_edge_derivs(double X);

}  // namespace ssd
