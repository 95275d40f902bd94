#include "slb/potentials.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "slb/error.hpp"
#include "slb/spectral.hpp"

namespace slb {

double phi(const SpeedProfile& sp, const LoadState& x, double r) {
  double acc = 0;
  for (int i = 0; i < x.node_count(); ++i) {
    const double w = x.node_weight(i);
    acc += w * (w + r) / sp.speed(i);
  }
  return acc;
}

namespace {

void cross_check(const char* what, double lhs, double rhs, double scale) {
  const double tol = 1e-9 * std::max(1.0, scale);
  if (std::abs(lhs - rhs) > tol) {
    throw NumericalError(
        fmt::format("potential cross-check '{}' failed: {:.17g} vs {:.17g}", what, lhs, rhs),
        std::abs(lhs - rhs));
  }
}

void check_le(const char* what, double lhs, double rhs, double scale) {
  const double tol = 1e-9 * std::max(1.0, scale);
  if (lhs > rhs + tol) {
    throw NumericalError(
        fmt::format("potential invariant '{}' failed: {:.17g} > {:.17g}", what, lhs, rhs),
        lhs - rhs);
  }
}

}  // namespace

PotentialSnapshot snapshot(const SpeedProfile& sp, const LoadState& x, std::int64_t round) {
  if (sp.size() != x.node_count()) {
    throw ConfigError("snapshot: speed profile and state disagree on the node count");
  }
  const int n = x.node_count();
  const auto e = deviations(x, sp);

  PotentialSnapshot s;
  s.round = round;
  s.phi0 = phi(sp, x, 0);
  s.phi1 = phi(sp, x, 1);
  double sum_e_over_s = 0, shifted = 0;
  for (int i = 0; i < n; ++i) {
    const double si = sp.speed(i);
    s.psi0 += e[i] * e[i] / si;
    sum_e_over_s += e[i] / si;
    shifted += (e[i] + 0.5) * (e[i] + 0.5) / si;
    s.l_delta = std::max(s.l_delta, std::abs(e[i] / si));
  }
  const double mean_term = 0.25 * n * (1 / sp.harmonic_mean() - 1 / sp.arithmetic_mean());
  s.psi1 = s.psi0 + sum_e_over_s + mean_term;

  const double w = x.total_weight();
  const double cap = sp.total_capacity();
  cross_check("psi0 = phi0 - W^2/S", s.phi0 - w * w / cap, s.psi0, s.phi0);
  cross_check("psi1 definition", s.phi1 - w * w / cap - w * n / cap + mean_term, s.psi1,
              s.phi1);
  cross_check("psi1 shifted-square form", shifted - n / (4 * sp.arithmetic_mean()), s.psi1,
              s.phi1);
  check_le("psi1 >= 0", 0.0, s.psi1, s.phi1);
  check_le("l_delta^2 <= psi0", s.l_delta * s.l_delta, s.psi0, s.psi0);
  check_le("psi0 <= S l_delta^2", s.psi0, cap * s.l_delta * s.l_delta, s.psi0);
  return s;
}

std::string snapshot_csv_row(const PotentialSnapshot& s, std::int64_t moves) {
  return fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}", s.round, s.phi0, s.phi1,
                     s.psi0, s.psi1, s.l_delta, moves);
}

double lambda_term(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                   const ProtocolParams& params, NodeId i, NodeId j, int r) {
  const double f = expected_flow(g, sp, x, params, i, j);
  const double inv = 1 / sp.speed(i) + 1 / sp.speed(j);
  return (2 * params.alpha - 2) * pair_degree(g, i, j) * inv * f + r / sp.speed(i) -
         r / sp.speed(j);
}

NodeMoments node_change_moments(const GraphTopology& g, const SpeedProfile& sp,
                                const LoadState& x, const ProtocolParams& params) {
  const int n = g.node_count();
  if (x.node_count() != n || sp.size() != n) {
    throw ConfigError("graph, speeds and state disagree on the node count");
  }
  NodeMoments out;
  out.mean.assign(n, 0.0);
  out.variance.assign(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    if (x.node_weight(i) <= 0) continue;
    const double deg = g.degree(i);
    double leave = 0;
    for (NodeId j : g.neighbors(i)) {
      const double q = migration_probability(g, sp, x, params, i, j) / deg;
      if (q <= 0) continue;
      leave += q;
      out.mean[j] += q * x.node_weight(i);
      out.variance[j] += q * (1 - q) * x.node_weight_squares(i);
    }
    out.mean[i] -= leave * x.node_weight(i);
    out.variance[i] += leave * (1 - leave) * x.node_weight_squares(i);
  }
  return out;
}

double exact_expected_psi0_drop(const GraphTopology& g, const SpeedProfile& sp,
                                const LoadState& x, const ProtocolParams& params) {
  const auto m = node_change_moments(g, sp, x, params);
  const auto e = deviations(x, sp);
  // e^2 - E[(e + D)^2] = -2 e mu - mu^2 - sigma^2, summed without forming Psi0'.
  double drop = 0;
  for (int k = 0; k < g.node_count(); ++k) {
    drop += (-2 * e[k] * m.mean[k] - m.mean[k] * m.mean[k] - m.variance[k]) / sp.speed(k);
  }
  return drop;
}

double exact_expected_psi1_drop(const GraphTopology& g, const SpeedProfile& sp,
                                const LoadState& x, const ProtocolParams& params) {
  const auto m = node_change_moments(g, sp, x, params);
  const auto e = deviations(x, sp);
  double drop = 0;
  for (int k = 0; k < g.node_count(); ++k) {
    drop += (-2 * e[k] * m.mean[k] - m.mean[k] * m.mean[k] - m.variance[k] - m.mean[k]) /
            sp.speed(k);
  }
  return drop;
}

double exact_variance_sum(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                          const ProtocolParams& params) {
  const auto m = node_change_moments(g, sp, x, params);
  double acc = 0;
  for (int k = 0; k < g.node_count(); ++k) acc += m.variance[k] / sp.speed(k);
  return acc;
}

double variance_bound(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                      const ProtocolParams& params) {
  double acc = 0;
  for (const auto& d : non_nash_edges(g, sp, x)) {
    acc += expected_flow(g, sp, x, params, d.from, d.to) *
           (1 / sp.speed(d.from) + 1 / sp.speed(d.to));
  }
  return acc;
}

double quadratic_drop_bound(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                            const ProtocolParams& params) {
  const double a = params.alpha;
  double acc = 0;
  for (const auto& e : g.edges()) {
    const double diff = load_difference(x, sp, e.u, e.v);
    const double inv = 1 / sp.speed(e.u) + 1 / sp.speed(e.v);
    acc += (1 - 2 / a) * diff * diff / (a * pair_degree(g, e.u, e.v) * inv);
  }
  return acc - g.node_count() / a;
}

double spectral_drop_bound(const GraphTopology& g, const SpeedProfile& sp, double lambda2,
                           double psi0) {
  const double smax = sp.s_max();
  return lambda2 / (16.0 * g.max_degree() * smax * smax) * psi0 - g.node_count() / (4 * smax);
}

double nash_step_drop_bound(const GraphTopology& g, const SpeedProfile& sp) {
  const double eps = sp.epsilon();
  const double smax = sp.s_max();
  return eps * eps / (8.0 * g.max_degree() * smax * smax * smax);
}

double flow_drop_bound(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                       const ProtocolParams& params, int r, bool weighted_slack) {
  double acc = 0;
  for (const auto& d : non_nash_edges(g, sp, x)) {
    const double f = expected_flow(g, sp, x, params, d.from, d.to);
    const double slack =
        weighted_slack ? 2.0 : 1 / sp.speed(d.from) + 1 / sp.speed(d.to);
    acc += f * (lambda_term(g, sp, x, params, d.from, d.to, r) - slack);
  }
  return acc;
}

double psi1_upper_bound(const SpeedProfile& sp, double psi0) {
  const double n = sp.size();
  const double sh = sp.harmonic_mean();
  return psi0 + std::sqrt(psi0 * n / sh) + 0.25 * n * (1 / sh - 1 / sp.arithmetic_mean());
}

double critical_value(const GraphTopology& g, const SpeedProfile& sp, double lambda2,
                      double constant) {
  if (!(lambda2 > 0)) throw ConfigError("critical value needs lambda2 > 0");
  if (constant != 8 && constant != 16) {
    throw ConfigError(fmt::format("critical value constant must be 8 or 16, got {}", constant));
  }
  return constant * g.node_count() * g.max_degree() * sp.s_max() / lambda2;
}

double critical_value(const GraphTopology& g, const SpeedProfile& sp) {
  return critical_value(g, sp, second_smallest_eigenvalue(laplacian(g)));
}

double gamma_factor(const GraphTopology& g, const SpeedProfile& sp, double lambda2) {
  if (!(lambda2 > 0)) throw ConfigError("gamma needs lambda2 > 0");
  const double smax = sp.s_max();
  return 32.0 * g.max_degree() * smax * smax / (sp.s_min() * lambda2);
}

}  // namespace slb
