#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slb/graph.hpp"
#include "slb/speeds.hpp"

namespace slb {

// Dense symmetric matrix, row-major storage of the full square.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }
  double& operator()(int i, int j) { return data_[index(i, j)]; }

  // Sets (i, j) and (j, i).
  void set(int i, int j, double value) {
    data_[index(i, j)] = value;
    data_[index(j, i)] = value;
  }

  std::vector<double> multiply(std::span<const double> x) const;
  double max_asymmetry() const;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<double> data_;
};

inline constexpr double kDefaultEigenTolerance = 1e-10;

// Laplacian: deg(i) on the diagonal, -1 for every edge.
SymmetricMatrix laplacian(const GraphTopology& g);

// S^(-1/2) L S^(-1/2); similar to L S^(-1), so it has the same spectrum.
SymmetricMatrix symmetrized_generalized_laplacian(const GraphTopology& g,
                                                  const SpeedProfile& sp);

// x^T L x evaluated as the edge sum over (x_i - x_j)^2.
double laplacian_quadratic_form(const GraphTopology& g, std::span<const double> x);

struct EigenDecomposition {
  std::vector<double> values;                 // ascending
  std::vector<std::vector<double>> vectors;   // vectors[k] pairs with values[k]
  std::int64_t rotations = 0;
  double off_diagonal_norm = 0;
};

// Cyclic Jacobi rotations. Stops when the off-diagonal Frobenius norm drops
// below tol; throws NumericalError carrying that norm if 100 * n^2
// rotations are not enough. Deterministic.
EigenDecomposition symmetric_eigen(const SymmetricMatrix& m,
                                   double tol = kDefaultEigenTolerance);

// Second entry of the ascending spectrum. Requires n >= 2 and symmetry
// within tol.
double second_smallest_eigenvalue(const SymmetricMatrix& m,
                                  double tol = kDefaultEigenTolerance);

// <x, y>_S = sum x_i y_i / s_i.
double generalized_dot(std::span<const double> x, std::span<const double> y,
                       const SpeedProfile& sp);

// <x, L S^-1 y>_S computed without forming the matrix.
double generalized_laplacian_form(const GraphTopology& g, const SpeedProfile& sp,
                                  std::span<const double> x);

struct BoundCheck {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

struct SpectralSummary {
  double lambda1 = 0;
  double lambda2 = 0;
  double mu2 = 0;
  double eigen_tolerance = kDefaultEigenTolerance;
  std::vector<BoundCheck> bound_report;

  bool all_hold() const;
  const BoundCheck* find(const std::string& name) const;
};

// Bound rows (each "lhs <= rhs" up to check_tol):
//   lambda1_zero         |lambda1| <= eigen tolerance
//   lambda2_positive     0 < lambda2
//   lambda2_simple       4/n^2 <= lambda2
//   lambda2_fiedler      lambda2 <= n/(n-1) * min degree
//   diameter             4/(n lambda2) <= diam(G)
//   cheeger_lower        i(G)^2/(2 Delta) <= lambda2   (only if n <= cheeger_cap)
//   cheeger_upper        lambda2 <= 2 i(G)             (only if n <= cheeger_cap)
//   interlacing_lower    lambda2/s_max <= mu2
//   interlacing_upper    mu2 <= lambda2/s_min
SpectralSummary spectral_summary(const GraphTopology& g, const SpeedProfile& sp,
                                 double tol = kDefaultEigenTolerance,
                                 double check_tol = 1e-8,
                                 int cheeger_cap = kDefaultIsoperimetricCap);

}  // namespace slb
