#include "slb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "slb/error.hpp"

namespace slb {

std::vector<double> SymmetricMatrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw ConfigError("matrix-vector dimension mismatch");
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double acc = 0;
    for (int j = 0; j < n_; ++j) acc += data_[index(i, j)] * x[j];
    y[i] = acc;
  }
  return y;
}

double SymmetricMatrix::max_asymmetry() const {
  double worst = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      worst = std::max(worst, std::abs(data_[index(i, j)] - data_[index(j, i)]));
  return worst;
}

SymmetricMatrix laplacian(const GraphTopology& g) {
  SymmetricMatrix l(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) l(v, v) = g.degree(v);
  for (const auto& e : g.edges()) l.set(e.u, e.v, -1.0);
  return l;
}

SymmetricMatrix symmetrized_generalized_laplacian(const GraphTopology& g,
                                                  const SpeedProfile& sp) {
  if (sp.size() != g.node_count()) {
    throw ConfigError(fmt::format("speed profile has {} entries for {} nodes", sp.size(),
                                  g.node_count()));
  }
  SymmetricMatrix m(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) m(v, v) = g.degree(v) / sp.speed(v);
  for (const auto& e : g.edges()) {
    m.set(e.u, e.v, -1.0 / std::sqrt(sp.speed(e.u) * sp.speed(e.v)));
  }
  return m;
}

double laplacian_quadratic_form(const GraphTopology& g, std::span<const double> x) {
  if (static_cast<int>(x.size()) != g.node_count()) {
    throw ConfigError("quadratic form dimension mismatch");
  }
  double acc = 0;
  for (const auto& e : g.edges()) {
    double d = x[e.u] - x[e.v];
    acc += d * d;
  }
  return acc;
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, int n) {
  double acc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) acc += 2 * a[i * n + j] * a[i * n + j];
  return std::sqrt(acc);
}

}  // namespace

EigenDecomposition symmetric_eigen(const SymmetricMatrix& m, double tol) {
  const int n = m.size();
  if (n < 1) throw ConfigError("eigen decomposition of an empty matrix");
  if (m.max_asymmetry() > tol) {
    throw ConfigError(fmt::format("matrix is not symmetric within {} (max asymmetry {})", tol,
                                  m.max_asymmetry()));
  }

  std::vector<double> a(static_cast<std::size_t>(n) * n);
  double frobenius = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a[i * n + j] = m(i, j);
      frobenius += m(i, j) * m(i, j);
    }
  frobenius = std::sqrt(frobenius);
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;

  // Below roughly 64 ulps of the matrix norm the rotations only shuffle
  // rounding noise.
  const double threshold =
      std::max(tol, 64 * std::numeric_limits<double>::epsilon() * frobenius);
  const std::int64_t cap = 100 * static_cast<std::int64_t>(n) * n;

  std::int64_t rotations = 0;
  double off = off_diagonal_norm(a, n);
  while (off > threshold) {
    if (rotations >= cap) {
      throw NumericalError(
          fmt::format("Jacobi eigensolver did not converge within {} rotations "
                      "(off-diagonal norm {:.3e})",
                      cap, off),
          off);
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        }
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        const double tau = s / (1 + c);

        a[p * n + p] -= t * apq;
        a[q * n + q] += t * apq;
        a[p * n + q] = 0;
        a[q * n + p] = 0;
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = a[r * n + p];
          const double h = a[r * n + q];
          const double new_rp = g - s * (h + g * tau);
          const double new_rq = h + s * (g - h * tau);
          a[r * n + p] = new_rp;
          a[p * n + r] = new_rp;
          a[r * n + q] = new_rq;
          a[q * n + r] = new_rq;
        }
        for (int r = 0; r < n; ++r) {
          const double g = v[r * n + p];
          const double h = v[r * n + q];
          v[r * n + p] = g - s * (h + g * tau);
          v[r * n + q] = h + s * (g - h * tau);
        }
        ++rotations;
      }
    }
    off = off_diagonal_norm(a, n);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return a[x * n + x] < a[y * n + y]; });

  EigenDecomposition out;
  out.rotations = rotations;
  out.off_diagonal_norm = off;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (int k : order) {
    out.values.push_back(a[k * n + k]);
    std::vector<double> column(n);
    for (int r = 0; r < n; ++r) column[r] = v[r * n + k];
    out.vectors.push_back(std::move(column));
  }
  return out;
}

double second_smallest_eigenvalue(const SymmetricMatrix& m, double tol) {
  if (m.size() < 2) throw ConfigError("second smallest eigenvalue needs n >= 2");
  return symmetric_eigen(m, tol).values[1];
}

double generalized_dot(std::span<const double> x, std::span<const double> y,
                       const SpeedProfile& sp) {
  if (x.size() != y.size() || static_cast<int>(x.size()) != sp.size()) {
    throw ConfigError(fmt::format("generalized dot: dimensions {}, {} and {} speeds differ",
                                  x.size(), y.size(), sp.size()));
  }
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i] / sp.speed(static_cast<int>(i));
  return acc;
}

double generalized_laplacian_form(const GraphTopology& g, const SpeedProfile& sp,
                                  std::span<const double> x) {
  // <x, L S^-1 x>_S = (S^-1 x)^T L (S^-1 x)
  std::vector<double> scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] / sp.speed(static_cast<int>(i));
  return laplacian_quadratic_form(g, scaled);
}

bool SpectralSummary::all_hold() const {
  return std::all_of(bound_report.begin(), bound_report.end(),
                     [](const BoundCheck& b) { return b.holds; });
}

const BoundCheck* SpectralSummary::find(const std::string& name) const {
  for (const auto& b : bound_report)
    if (b.name == name) return &b;
  return nullptr;
}

SpectralSummary spectral_summary(const GraphTopology& g, const SpeedProfile& sp, double tol,
                                 double check_tol, int cheeger_cap) {
  const int n = g.node_count();
  if (n < 2) throw ConfigError("spectral summary needs at least two nodes");

  auto spectrum = symmetric_eigen(laplacian(g), tol);
  SpectralSummary out;
  out.eigen_tolerance = tol;
  out.lambda1 = spectrum.values[0];
  out.lambda2 = spectrum.values[1];
  out.mu2 = second_smallest_eigenvalue(symmetrized_generalized_laplacian(g, sp), tol);

  auto le = [&](std::string name, double lhs, double rhs) {
    out.bound_report.push_back({std::move(name), lhs, rhs, lhs <= rhs + check_tol});
  };
  const double l2 = out.lambda2;
  out.bound_report.push_back(
      {"lambda1_zero", std::abs(out.lambda1), tol, std::abs(out.lambda1) <= std::max(tol, check_tol)});
  out.bound_report.push_back({"lambda2_positive", 0.0, l2, l2 > check_tol});
  le("lambda2_simple", 4.0 / (static_cast<double>(n) * n), l2);
  le("lambda2_fiedler", l2, static_cast<double>(n) / (n - 1) * g.min_degree());
  le("diameter", 4.0 / (n * l2), g.diameter());
  if (n <= cheeger_cap) {
    const double iso = boost::rational_cast<double>(isoperimetric_number(g, cheeger_cap));
    le("cheeger_lower", iso * iso / (2.0 * g.max_degree()), l2);
    le("cheeger_upper", l2, 2 * iso);
  }
  le("interlacing_lower", l2 / sp.s_max(), out.mu2);
  le("interlacing_upper", out.mu2, l2 / sp.s_min());
  return out;
}

}  // namespace slb
