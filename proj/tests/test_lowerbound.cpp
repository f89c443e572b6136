#include "doctest.h"
#include "test_support.hpp"

#include "eblab/lowerbound.hpp"
#include "eblab/quadrature.hpp"

#include <cmath>

using namespace eblab;

namespace {

// G and H of the arcsine-gap construction as naive long-double mixtures.
std::pair<testing::LdMixture, testing::LdMixture> ld_pair(int m, double tau) {
  const QuadraturePrior arc = QuadraturePrior::arcsine();
  const QuadratureRule rule = chebyshev_rule(m);
  std::vector<long double> ga{0.0L}, gw{1.0L - tau}, ha{0.0L}, hw{1.0L - tau};
  for (std::size_t i = 0; i < arc.rule().size(); ++i) {
    ga.push_back(arc.rule().nodes[i]);
    gw.push_back(static_cast<long double>(tau) * arc.rule().weights[i]);
  }
  for (std::size_t i = 0; i < rule.size(); ++i) {
    ha.push_back(rule.nodes[i]);
    hw.push_back(static_cast<long double>(tau) * rule.weights[i]);
  }
  return {testing::LdMixture(ga, gw), testing::LdMixture(ha, hw)};
}

}  // namespace

TEST_SUITE("lowerbound_lab") {

TEST_CASE("instance quantities obey the moment bounds") {
  for (int m = 2; m <= 8; ++m) {
    const LowerBoundInstance inst = build_lowerbound_instance(m);
    CHECK(inst.tau_m == doctest::Approx(inst.alpha_m * inst.alpha_m).epsilon(1e-14));
    CHECK(inst.eps_sq > 0.0);
    CHECK(inst.eps_sq <= 4.0 * inst.tau_m * inst.tau_m * inst.alpha_m * (1.0 + 1e-9));
    CHECK(inst.eps_sq <= 4.0 * std::pow(inst.alpha_m, 5) * (1.0 + 1e-9));
    CHECK(inst.delta >= 2.0 * inst.eps_sq * (1.0 - 1e-9));
    CHECK(inst.delta <= 4.0 * inst.eps_sq * (1.0 + 1e-9));
    CHECK(inst.regret_val > 0.0);
    const double scaled = inst.regret_val / (inst.tau_m * inst.tau_m * inst.beta_m);
    CHECK(scaled >= 1e-3);
    CHECK(scaled <= 1e3);
  }
  CHECK_THROWS(build_lowerbound_instance(1));
  CHECK_THROWS(build_lowerbound_instance(13));
}

TEST_CASE("m = 2 instance matches a long-double brute force") {
  const LowerBoundInstance inst = build_lowerbound_instance(2);
  const auto [G, H] = ld_pair(2, inst.tau_m);
  const long double R = 14.0L;
  const int n = 20000;
  const long double eps = testing::riemann(
      [&](long double y) {
        const long double d = std::sqrt(G.density(y)) - std::sqrt(H.density(y));
        return d * d;
      },
      -R, R, n);
  const long double reg = testing::riemann(
      [&](long double y) {
        const long double d = H.mean(y) - G.mean(y);
        return d * d * G.density(y);
      },
      -R, R, n);
  // Differences are O(τ) against O(1) densities; long double keeps ~4 extra digits.
  CHECK(testing::rel_err(inst.eps_sq, static_cast<double>(eps)) <= 1e-6);
  CHECK(testing::rel_err(inst.regret_val, static_cast<double>(reg)) <= 1e-6);
}

TEST_CASE("pair density stays above half the null density") {
  for (int m : {2, 4, 6}) {
    const ArcsineGapPair pair(m, build_lowerbound_instance(m).tau_m);
    for (double y = -10.0; y <= 10.0; y += 0.25) {
      CHECK(pair.G().density(y) >= 0.5 * std_normal_pdf(y));
      CHECK(pair.H().density(y) >= 0.5 * std_normal_pdf(y));
    }
  }
}

TEST_CASE("sweep ratios are positive and bounded below") {
  const ExperimentReport r = lowerbound_ratio_sweep(2, 8);
  REQUIRE(r.rows.size() == 7);
  const auto ratio = r.column("ratio");
  const auto alpha = r.column("alpha");
  double mn = INFINITY;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    CHECK(ratio[i] > 0.0);
    mn = std::min(mn, ratio[i]);
    if (i > 0) CHECK(alpha[i] < alpha[i - 1]);
  }
  CHECK(mn >= 0.5 * ratio[0]);
  CHECK(r.metadata["min_ratio"].get<double>() == doctest::Approx(mn));
}

TEST_CASE("ratio function") {
  const double e2 = 1e-6, e = 1e-3;
  const double expect = 0.01 / (e2 * std::log(1 / e) / std::log(std::log(1 / e)));
  CHECK(regret_hellinger_ratio(0.01, e2) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(std::isnan(regret_hellinger_ratio(1.0, 0.5)));
  CHECK(std::isnan(regret_hellinger_ratio(1.0, 0.0)));
}

TEST_CASE("moment family lower bound and hellinger envelope") {
  for (double p : {2.0, 4.0}) {
    for (double b : {4.0, 6.0, 8.0, 10.0}) {
      const MomentFamilyInstance inst = build_moment_family_instance(p, b);
      CHECK(inst.eta == doctest::Approx(std::pow(b, -p)).epsilon(1e-15));
      CHECK(inst.regret_val >= inst.regret_lb - 1e-10);
      CHECK(inst.eps_sq <= 2.0 * inst.eta);
      CHECK(inst.eps_sq > 0.0);
    }
  }
  const ExperimentReport r = moment_family_sweep(2.0, {4.0, 6.0, 8.0});
  CHECK(r.rows.size() == 3);
  CHECK(r.columns == std::vector<std::string>{"b", "eta", "eps_sq", "regret", "regret_lb", "two_eta"});
}

TEST_CASE("loglog slope") {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(3.0 * std::pow(i, 1.7));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK_THROWS(loglog_slope({1.0}, {1.0}));
}

TEST_CASE("regularization demo") {
  const ExperimentReport r = regularization_necessity_demo(2.0, 8.0, {1e-300, 1e-3});
  REQUIRE(r.rows.size() == 3);
  const auto reg = r.column("regret");
  const auto regr = r.column("regret_rho");
  CHECK(testing::rel_err(regr[0], reg[0]) <= 1e-9);
  // The unregularized regret sits above the ρ = ε one.
  CHECK(r.metadata["ratio_at_eps"].get<double>() >= 1.0);
}

}  // TEST_SUITE
