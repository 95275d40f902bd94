#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slb/graph.hpp"
#include "slb/protocol.hpp"
#include "slb/speeds.hpp"

namespace slb {

struct PotentialSnapshot {
  std::int64_t round = 0;
  double phi0 = 0;
  double phi1 = 0;
  double psi0 = 0;
  double psi1 = 0;
  double l_delta = 0;
};

// Phi_r = sum_i W_i (W_i + r) / s_i
double phi(const SpeedProfile& sp, const LoadState& x, double r);

// psi0 is evaluated as sum e_i^2 / s_i and psi1 as psi0 + sum e_i / s_i +
// (n/4)(1/s_h - 1/s_a). Cross-checks against the Phi-based forms, psi1 >= 0
// and the L_Delta sandwich are applied at 1e-9 relative to the magnitudes
// involved; a failure throws NumericalError.
PotentialSnapshot snapshot(const SpeedProfile& sp, const LoadState& x, std::int64_t round = 0);

inline constexpr const char* kSnapshotCsvHeader = "round,phi0,phi1,psi0,psi1,l_delta,moves";
std::string snapshot_csv_row(const PotentialSnapshot& s, std::int64_t moves);

// (2 alpha - 2) d_ij (1/s_i + 1/s_j) f_ij + r/s_i - r/s_j
double lambda_term(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                   const ProtocolParams& params, NodeId i, NodeId j, int r);

// Mean and variance of the net weight change W_k' - W_k over one round.
// Tasks act independently, so with q_ik = p_ik / deg(i) and Q_k = sum_j q_kj:
//   mean_k     = sum_i q_ik W_i - Q_k W_k
//   variance_k = sum_i q_ik (1 - q_ik) SQ_i + Q_k (1 - Q_k) SQ_k
// where SQ_i is the sum of squared task weights at i.
struct NodeMoments {
  std::vector<double> mean;
  std::vector<double> variance;
};

NodeMoments node_change_moments(const GraphTopology& g, const SpeedProfile& sp,
                                const LoadState& x, const ProtocolParams& params);

// Psi0(x) - E[Psi0(X')], closed form.
double exact_expected_psi0_drop(const GraphTopology& g, const SpeedProfile& sp,
                                const LoadState& x, const ProtocolParams& params);
// Psi1(x) - E[Psi1(X')] = the Phi1 drop.
double exact_expected_psi1_drop(const GraphTopology& g, const SpeedProfile& sp,
                                const LoadState& x, const ProtocolParams& params);
// sum_i Var[W_i'] / s_i
double exact_variance_sum(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                          const ProtocolParams& params);

// Right-hand sides of the drop and variance bounds.
//
// variance: sum over directed non-Nash edges of f_ij (1/s_i + 1/s_j)
double variance_bound(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                      const ProtocolParams& params);
// sum over edges of (1 - 2/alpha)(l_i - l_j)^2 / (alpha d_ij (1/s_i + 1/s_j)) - n/alpha
double quadratic_drop_bound(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                            const ProtocolParams& params);
// lambda2 / (16 Delta s_max^2) * psi0 - n / (4 s_max)
double spectral_drop_bound(const GraphTopology& g, const SpeedProfile& sp, double lambda2,
                           double psi0);
// eps^2 / (8 Delta s_max^3)
double nash_step_drop_bound(const GraphTopology& g, const SpeedProfile& sp);
// sum over directed non-Nash edges of f_ij (Lambda^r_ij - slack_ij), where
// slack_ij = 1/s_i + 1/s_j, or 2 when `weighted_slack` is set.
double flow_drop_bound(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                       const ProtocolParams& params, int r, bool weighted_slack = false);
// psi0 + sqrt(psi0 n / s_h) + (n/4)(1/s_h - 1/s_a)
double psi1_upper_bound(const SpeedProfile& sp, double psi0);

// psi_c = constant * n * Delta * s_max / lambda2 (constant 8 or 16).
double critical_value(const GraphTopology& g, const SpeedProfile& sp, double lambda2,
                      double constant = 8);
// Same with constant 8 and lambda2 computed from g.
double critical_value(const GraphTopology& g, const SpeedProfile& sp);

// gamma = 32 Delta s_max^2 / (s_min lambda2)
double gamma_factor(const GraphTopology& g, const SpeedProfile& sp, double lambda2);

}  // namespace slb
