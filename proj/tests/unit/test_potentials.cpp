#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>

#include "generators.hpp"
#include "slb/error.hpp"
#include "slb/potentials.hpp"
#include "slb/spectral.hpp"

using namespace slb;
using Exact = boost::multiprecision::cpp_rational;

namespace {

ProtocolParams with_alpha(double alpha) {
  ProtocolParams p;
  p.alpha = alpha;
  return p;
}

struct Moments {
  double psi0_drop = 0;
  double psi1_drop = 0;
  double variance_sum = 0;
};

// Enumerates every joint outcome of a uniform-task round: each task at i
// stays, or picks neighbour j (probability 1/deg(i)) and moves with p_ij.
Moments enumerate_round(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                        const ProtocolParams& params) {
  const int n = g.node_count();
  std::vector<int> owner;
  for (int i = 0; i < n; ++i)
    for (std::int64_t t = 0; t < x.count(i); ++t) owner.push_back(i);

  std::vector<std::vector<std::pair<int, double>>> choices(n);
  for (int i = 0; i < n; ++i) {
    double stay = 1;
    for (NodeId j : g.neighbors(i)) {
      double q = migration_probability(g, sp, x, params, i, j) / g.degree(i);
      if (q > 0) choices[i].push_back({j, q});
      stay -= q;
    }
    choices[i].push_back({i, stay});
  }

  std::vector<double> w(n, 0.0);
  double e_psi0 = 0, e_psi1 = 0;
  std::vector<double> e_w(n, 0.0), e_w2(n, 0.0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t t, double prob) {
    if (t == owner.size()) {
      auto y = LoadState::uniform(std::vector<std::int64_t>(w.begin(), w.end()));
      auto s = snapshot(sp, y);
      e_psi0 += prob * s.psi0;
      e_psi1 += prob * s.psi1;
      for (int i = 0; i < n; ++i) {
        e_w[i] += prob * w[i];
        e_w2[i] += prob * w[i] * w[i];
      }
      return;
    }
    for (auto [dest, q] : choices[owner[t]]) {
      w[dest] += 1;
      rec(t + 1, prob * q);
      w[dest] -= 1;
    }
  };
  rec(0, 1.0);

  auto s = snapshot(sp, x);
  Moments m;
  m.psi0_drop = s.psi0 - e_psi0;
  m.psi1_drop = s.psi1 - e_psi1;
  for (int i = 0; i < n; ++i) m.variance_sum += (e_w2[i] - e_w[i] * e_w[i]) / sp.speed(i);
  return m;
}

Exact exact_of(const Ratio& r) { return Exact(r.numerator(), r.denominator()); }

}  // namespace

TEST_CASE("snapshot examples") {
  auto u2 = SpeedProfile::uniform(2);
  auto s = snapshot(u2, LoadState::uniform({4, 0}), 5);
  CHECK(s.round == 5);
  CHECK(s.phi0 == 16);
  CHECK(s.phi1 == 20);
  CHECK(s.psi0 == 8);
  CHECK(s.psi1 == doctest::Approx(8));
  CHECK(s.l_delta == 2);
  CHECK(snapshot_csv_row(snapshot(u2, LoadState::uniform({4, 0})), 0) == "0,16,20,8,8,2,0");

  auto sp = SpeedProfile::from_integers(std::vector<std::int64_t>{1, 2, 3});
  auto bal = snapshot(sp, LoadState::uniform({2, 4, 6}));
  CHECK(bal.psi0 == doctest::Approx(0).scale(1));
  CHECK(bal.l_delta == doctest::Approx(0).scale(1));
  CHECK(phi(sp, LoadState::uniform({2, 4, 6}), 0) == doctest::Approx(4 + 8 + 12));
  CHECK(std::string(kSnapshotCsvHeader) == "round,phi0,phi1,psi0,psi1,l_delta,moves");
}

TEST_CASE("lambda term examples") {
  auto k2 = make_complete(2);
  auto u2 = SpeedProfile::uniform(2);
  auto x = LoadState::uniform({2, 0});
  CHECK(lambda_term(k2, u2, x, with_alpha(4), 0, 1, 0) == doctest::Approx(3));
  CHECK(lambda_term(k2, u2, x, with_alpha(4), 0, 1, 1) == doctest::Approx(3));
  CHECK(lambda_term(k2, u2, LoadState::uniform({1, 1}), with_alpha(4), 0, 1, 0) == 0);
}

TEST_CASE("K2 golden drop value") {
  auto k2 = make_complete(2);
  auto u2 = SpeedProfile::uniform(2);
  auto x = LoadState::uniform({2, 0});
  auto p = with_alpha(4);
  CHECK(exact_expected_psi0_drop(k2, u2, x, p) == doctest::Approx(7.0 / 16).epsilon(1e-14));
  CHECK(enumerate_round(k2, u2, x, p).psi0_drop == doctest::Approx(7.0 / 16).epsilon(1e-14));

  auto m = node_change_moments(k2, u2, x, p);
  CHECK(m.mean[0] == doctest::Approx(-0.25));
  CHECK(m.mean[1] == doctest::Approx(0.25));
  CHECK(m.variance[0] == doctest::Approx(7.0 / 32));

  CHECK(exact_variance_sum(k2, u2, x, p) == doctest::Approx(7.0 / 16));
  CHECK(variance_bound(k2, u2, x, p) == doctest::Approx(0.5));
  CHECK(exact_variance_sum(k2, u2, x, p) <= variance_bound(k2, u2, x, p));

  auto nash = LoadState::uniform({1, 1});
  CHECK(exact_expected_psi0_drop(k2, u2, nash, p) == 0);
  CHECK(exact_expected_psi1_drop(k2, u2, nash, p) == 0);
  CHECK(exact_variance_sum(k2, u2, nash, p) == 0);
  CHECK(variance_bound(k2, u2, nash, p) == 0);
}

TEST_CASE("critical value and gamma") {
  auto k4 = make_complete(4);
  CHECK(critical_value(k4, SpeedProfile::uniform(4)) == doctest::Approx(24));
  CHECK(critical_value(k4, SpeedProfile::uniform(4), 4.0, 16.0) == doctest::Approx(48));
  CHECK(critical_value(make_complete(2), SpeedProfile::uniform(2)) == doctest::Approx(8));
  CHECK(gamma_factor(k4, SpeedProfile::uniform(4), 4.0) == doctest::Approx(24));
  // C4: Delta = 2, lambda2 = 2, so 32 * 2 / 2.
  CHECK(gamma_factor(make_cycle(4), SpeedProfile::uniform(4), 2.0) == doctest::Approx(32));
  auto sp = SpeedProfile::from_integers(std::vector<std::int64_t>{1, 3, 1, 1});
  CHECK(gamma_factor(make_cycle(4), sp, 2.0) == doctest::Approx(32.0 * 2 * 9 / 2));

  auto g = make_cycle(5);
  auto a = SpeedProfile::from_integers(std::vector<std::int64_t>{1, 2, 1, 1, 1});
  auto b = SpeedProfile::from_integers(std::vector<std::int64_t>{1, 4, 1, 1, 1});
  CHECK(critical_value(g, b, 1.5) == doctest::Approx(2 * critical_value(g, a, 1.5)));
}

TEST_CASE("closed-form moments agree with full enumeration") {
  gen::Rng rng(41);
  int checked = 0;
  while (checked < 150) {
    const int n = gen::uniform_int(rng, 2, 4);
    auto g = gen::connected_graph(rng, n, 0.5);
    auto sp = gen::rational_speeds(rng, n, 3);
    auto x = gen::uniform_state(rng, n, 4);
    if (x.total_count() == 0 || x.total_count() > 8) continue;
    auto p = checked % 2 ? ProtocolParams::exact_equilibrium(sp) : ProtocolParams::standard(sp);
    auto oracle = enumerate_round(g, sp, x, p);
    CAPTURE(checked);
    CHECK(std::abs(exact_expected_psi0_drop(g, sp, x, p) - oracle.psi0_drop) <= 1e-12);
    CHECK(std::abs(exact_expected_psi1_drop(g, sp, x, p) - oracle.psi1_drop) <= 1e-12);
    CHECK(std::abs(exact_variance_sum(g, sp, x, p) - oracle.variance_sum) <= 1e-12);
    ++checked;
  }
}

TEST_CASE("closed-form drop agrees with Monte Carlo") {
  gen::Rng rng(43);
  for (int t = 0; t < 6; ++t) {
    const int n = gen::uniform_int(rng, 2, 6);
    auto g = gen::connected_graph(rng, n, 0.4);
    auto sp = gen::integer_speeds(rng, n);
    const bool weighted = t % 2 == 1;
    auto x = weighted ? gen::weighted_state(rng, n, 12) : gen::uniform_state(rng, n, 25);
    auto p = ProtocolParams::standard(sp, weighted ? Variant::algorithm2 : Variant::algorithm1);
    p.rng_seed = 1000 + t;
    p.sampler = t % 3 ? Sampler::aggregated : Sampler::per_task;
    const double psi0 = snapshot(sp, x).psi0;
    const int rounds = 20000;
    double sum = 0, sumsq = 0;
    for (int r = 0; r < rounds; ++r) {
      double d = psi0 - snapshot(sp, step_round(g, sp, x, p, r).state).psi0;
      sum += d;
      sumsq += d * d;
    }
    const double mean = sum / rounds;
    const double se = std::sqrt(std::max(0.0, sumsq / rounds - mean * mean) / rounds);
    CAPTURE(t);
    CHECK(std::abs(mean - exact_expected_psi0_drop(g, sp, x, p)) <= 4 * se + 1e-12);
  }
}

TEST_CASE("potential identities on random states") {
  gen::Rng rng(47);
  for (int t = 0; t < 1000; ++t) {
    const int n = gen::uniform_int(rng, 1, 10);
    auto sp = gen::rational_speeds(rng, n);
    auto x = gen::uniform_state(rng, n, 30);
    auto s = snapshot(sp, x);

    // Exact deviations and potentials.
    Exact total(0), cap(0);
    for (int i = 0; i < n; ++i) {
      total += x.count(i);
      cap += exact_of(sp.exact(i));
    }
    Exact psi0(0), l_delta(0), sum_e_over_s(0);
    for (int i = 0; i < n; ++i) {
      Exact si = exact_of(sp.exact(i));
      Exact e = Exact(x.count(i)) - total / cap * si;
      psi0 += e * e / si;
      sum_e_over_s += e / si;
      Exact a = abs(e / si);
      if (a > l_delta) l_delta = a;
    }
    CAPTURE(t);
    CHECK(l_delta * l_delta <= psi0);
    CHECK(psi0 <= cap * l_delta * l_delta);
    const double psi0_d = static_cast<double>(psi0);
    CHECK(std::abs(s.psi0 - psi0_d) <= 1e-9 * std::max(1.0, psi0_d));
    CHECK(std::abs(s.l_delta - static_cast<double>(l_delta)) <= 1e-9 * std::max(1.0, s.l_delta));
    CHECK(s.psi1 >= -1e-9);
    CHECK(s.psi1 <= psi1_upper_bound(sp, s.psi0) + 1e-9 * std::max(1.0, s.psi0));
    // Psi1 - Psi0 is the Phi1 - Phi0 gap shifted by a constant.
    const double shift = n / 4.0 * (1 / sp.harmonic_mean() - 1 / sp.arithmetic_mean());
    CHECK(std::abs(s.psi1 - (s.psi0 + static_cast<double>(sum_e_over_s) + shift)) <=
          1e-9 * std::max(1.0, s.psi1));
  }
}

TEST_CASE("drop bounds hold on random states") {
  gen::Rng rng(53);
  for (int t = 0; t < 300; ++t) {
    const int n = gen::uniform_int(rng, 2, 8);
    auto g = gen::connected_graph(rng, n, 0.3);
    auto sp = gen::rational_speeds(rng, n);
    auto x = gen::uniform_state(rng, n, 40);
    auto p = ProtocolParams::standard(sp);
    const double lambda2 = second_smallest_eigenvalue(laplacian(g));
    const double drop = exact_expected_psi0_drop(g, sp, x, p);
    const double tol = 1e-9 * std::max(1.0, std::abs(drop));
    CAPTURE(t);
    CHECK(drop >= quadratic_drop_bound(g, sp, x, p) - tol);
    CHECK(drop >= spectral_drop_bound(g, sp, lambda2, snapshot(sp, x).psi0) - tol);
    CHECK(drop >= flow_drop_bound(g, sp, x, p, 0) - tol);
    CHECK(exact_expected_psi1_drop(g, sp, x, p) >= flow_drop_bound(g, sp, x, p, 1) - tol);
    CHECK(exact_variance_sum(g, sp, x, p) <= variance_bound(g, sp, x, p) + tol);

    auto pe = ProtocolParams::exact_equilibrium(sp);
    if (!is_nash(g, sp, x)) {
      CHECK(exact_expected_psi1_drop(g, sp, x, pe) >= nash_step_drop_bound(g, sp) - tol);
    }
  }
}
