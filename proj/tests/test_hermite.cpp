#include "doctest.h"
#include "test_support.hpp"

#include "eblab/hermite.hpp"
#include "eblab/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace eblab;

namespace {

// ∫ (g - p_k)² φ in long double, g = (f_G - f_H)/φ = Σ w e^{u y - u²/2} (G minus H).
long double parseval_lhs(const DiscretePrior& g, const DiscretePrior& h, int k) {
  std::vector<long double> c(static_cast<std::size_t>(k) + 1, 0.0L);
  long double fact = 1.0L;
  for (int j = 1; j <= k; ++j) {
    fact *= j;
    long double mg = 0.0L, mh = 0.0L;
    for (std::size_t i = 0; i < g.size(); ++i) mg += g.weights()[i] * std::pow((long double)g.atoms()[i], j);
    for (std::size_t i = 0; i < h.size(); ++i) mh += h.weights()[i] * std::pow((long double)h.atoms()[i], j);
    c[j] = (mg - mh) / fact;
  }
  auto gfun = [&](long double y) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const long double u = g.atoms()[i];
      s += g.weights()[i] * std::exp(u * y - 0.5L * u * u);
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
      const long double u = h.atoms()[i];
      s -= h.weights()[i] * std::exp(u * y - 0.5L * u * u);
    }
    return s;
  };
  auto pk = [&](long double y) {
    long double acc = 0.0L, prev = 0.0L, cur = 1.0L;
    for (int j = 0; j <= k; ++j) {
      acc += c[j] * cur;
      const long double next = y * cur - j * prev;
      prev = cur;
      cur = next;
    }
    return acc;
  };
  const long double R = std::max(g.support_radius(), h.support_radius()) + 16.0L;
  return testing::composite_gl(
      [&](long double y) {
        const long double d = gfun(y) - pk(y);
        return d * d * testing::ld_phi(y);
      },
      -R, R, 400);
}

}  // namespace

TEST_SUITE("hermite_lab") {

TEST_CASE("hermite polynomial values") {
  for (double y : {-1.5, 0.0, 2.0}) {
    CHECK(hermite_eval(0, y) == 1.0);
    CHECK(hermite_eval(1, y) == y);
  }
  CHECK(hermite_eval(2, 3.0) == 8.0);
  CHECK(hermite_eval(4, 2.0) == doctest::Approx(16.0 - 24.0 + 3.0));
  CHECK_THROWS(hermite_eval(401, 0.0));
  CHECK_THROWS(hermite_eval(-1, 0.0));
}

TEST_CASE("hermite derivative identity by finite differences") {
  const double h = 1e-6;
  const double fd = (hermite_eval(5, 1.3 + h) - hermite_eval(5, 1.3 - h)) / (2 * h);
  CHECK(std::abs(fd - 5.0 * hermite_eval(4, 1.3)) < 1e-6);
}

TEST_CASE("hermite orthogonality under the normal measure") {
  // Tolerances scale with ‖He_i‖ ‖He_j‖ = √(i! j!).
  IntegrationSpec spec;
  spec.truncation_radius = 14.0;
  for (int i = 0; i <= 15; ++i) {
    for (int j = 0; j <= 15; ++j) {
      const double scale = std::sqrt(std::tgamma(i + 1.0) * std::tgamma(j + 1.0));
      spec.abs_tol = 1e-12 * scale;
      const double v = integrate_line(
          [&](double y) { return hermite_eval(i, y) * hermite_eval(j, y) * std_normal_pdf(y); }, spec);
      const double expect = i == j ? std::tgamma(i + 1.0) : 0.0;
      CHECK(std::abs(v - expect) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("scaled hermite sequence matches He_j / j!") {
  for (double y : {-3.0, 0.4, 5.0}) {
    const auto h = hermite_scaled_sequence(30, y);
    for (int j = 0; j <= 30; ++j)
      CHECK(std::abs(h[j] - hermite_eval(j, y) / std::tgamma(j + 1.0)) <= 1e-12 * std::max(1.0, std::abs(h[j])));
  }
  const auto big = hermite_scaled_sequence(400, 8.0);
  for (double v : big) CHECK(std::isfinite(v));
}

TEST_CASE("prior moments") {
  const DiscretePrior one = DiscretePrior::point_mass(1.0);
  const DiscretePrior sym({-1.0, 1.0}, {0.5, 0.5});
  for (int j = 0; j <= 12; ++j) {
    CHECK(prior_moment(one, j) == 1.0);
    CHECK(prior_moment(sym, j) == (j % 2 == 0 ? 1.0 : 0.0));
  }
  CHECK(std::abs(prior_moment(QuadraturePrior::arcsine(), 4) - 3.0 / 8.0) <= 1e-12);
  CHECK_THROWS(prior_moment(one, -1));
}

TEST_CASE("expansion coefficients") {
  const DiscretePrior sym({-1.0, 1.0}, {0.5, 0.5});
  const DiscretePrior d0 = DiscretePrior::point_mass(0.0);
  const HermiteSeries same = expansion_coefficients(sym, sym, 10);
  for (double c : same.coefficients) CHECK(c == 0.0);
  const HermiteSeries s = expansion_coefficients(sym, d0, 12);
  REQUIRE(s.coefficients.size() == 13);
  CHECK(s.coefficients[0] == 0.0);
  for (int j = 1; j <= 12; ++j) {
    const double expect = j % 2 == 0 ? 1.0 / std::tgamma(j + 1.0) : 0.0;
    CHECK(std::abs(s.coefficients[j] - expect) <= 1e-15);
  }
  Xoshiro256 rng(5);
  for (int t = 0; t < 10; ++t) {
    const double M = 0.5 + 2.0 * rng.uniform();
    const DiscretePrior G = testing::random_prior(rng, 3, M);
    const DiscretePrior H = testing::random_prior(rng, 4, M);
    const HermiteSeries e = expansion_coefficients(G, H, 40);
    for (int j = 0; j <= 40; ++j) CHECK(std::abs(e.coefficients[j]) <= 2.0 * std::pow(M, j) / std::tgamma(j + 1.0) * (1 + 1e-12));
  }
}

TEST_CASE("series evaluation reproduces g for a fast-converging pair") {
  const DiscretePrior G({-0.5, 0.3}, {0.4, 0.6});
  const DiscretePrior H = DiscretePrior::point_mass(0.1);
  const HermiteSeries s = expansion_coefficients(G, H, 60);
  for (double y : {-2.0, 0.0, 1.0, 2.5}) {
    double g = 0.0, gp = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      const double u = G.atoms()[i], e = G.weights()[i] * std::exp(u * y - 0.5 * u * u);
      g += e;
      gp += u * e;
    }
    const double u = 0.1, e = std::exp(u * y - 0.5 * u * u);
    g -= e;
    gp -= u * e;
    CHECK(std::abs(s.evaluate(y) - g) < 1e-13);
    CHECK(std::abs(s.derivative(y) - gp) < 1e-12);
  }
}

TEST_CASE("truncation error") {
  const DiscretePrior G({-1.0, 1.0}, {0.5, 0.5});
  const TruncationError zero = truncation_error(G, G, 5);
  CHECK(zero.err_g == 0.0);
  CHECK(zero.err_gprime == 0.0);
  Xoshiro256 rng(6);
  for (int t = 0; t < 20; ++t) {
    const double M = 0.3 + 1.5 * rng.uniform();
    const DiscretePrior a = testing::random_prior_spanning(rng, 3, M);
    const DiscretePrior b = testing::random_prior(rng, 3, M);
    for (int k : {5, 10, 20, 40}) {
      const TruncationError te = truncation_error(a, b, k);
      CHECK(te.err_g <= te.err_gprime);
      // Σ_{j>k} 4M^{2j}/(j-1)! ≤ 4M² (M²)^k/k! / (1 - M²/(k+1)), and k! ≥ (k/e)^k.
      const double q = std::exp(1.0) * M * M / k;
      if (k >= 2.0 * std::exp(1.0) * M * M)
        CHECK(te.err_gprime <= 4.0 * M * M * std::pow(q, k) / (1.0 - M * M / (k + 1.0)));
    }
  }
}

TEST_CASE("parseval consistency at k = 40") {
  // Supports reach M in [3, 4.5], where the tail beyond degree 40 is large enough to
  // be resolved by a long-double quadrature of g - p_k.
  Xoshiro256 rng(7);
  for (int t = 0; t < 6; ++t) {
    const double M = 3.0 + 1.5 * rng.uniform();
    const DiscretePrior G = testing::random_prior_spanning(rng, 3, M);
    const DiscretePrior H = testing::random_prior(rng, 3, M);
    const double lhs = static_cast<double>(parseval_lhs(G, H, 40));
    const double rhs = truncation_error(G, H, 40).err_g;
    CHECK(testing::rel_err(lhs, rhs) <= 1e-8);
  }
}

TEST_CASE("moment gap table") {
  const MomentGapTable t = moment_gap_table(3, 200);
  CHECK(t.gaps[6] == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
  for (int m = 1; m <= 12; ++m) {
    const MomentGapTable tm = moment_gap_table(m, 200);
    for (int j = 0; j < 2 * m; ++j) CHECK(std::abs(tm.gaps[j]) <= 1e-12);
    for (double g : tm.gaps) CHECK(std::abs(g) <= 2.0);
    CHECK(testing::rel_err(tm.gaps[2 * m], std::ldexp(1.0, 1 - 2 * m)) <= 1e-12);
    CHECK(tm.alpha_m > 0.0);
    CHECK(tm.beta_m > 0.0);
    CHECK(tm.j_max() == 200);
    CHECK(std::exp(tm.log_remainder_bound) < 1e-300);
  }
  CHECK_THROWS(moment_gap_table(0, 10));
  CHECK_THROWS(moment_gap_table(21, 100));
  CHECK_THROWS(moment_gap_table(5, 9));
  CHECK_THROWS(moment_gap_table(5, 401));
}

TEST_CASE("exact moment gaps agree with the node-sum difference") {
  for (int m = 1; m <= 12; ++m)
    for (int j = 0; j <= 60; ++j)
      CHECK(std::abs(moment_gap(m, j) - moment_gap_direct(m, j)) <= 1e-14);
}

TEST_CASE("moment gap table csv layout") {
  const MomentGapTable t = moment_gap_table(2, 10);
  CHECK(t.csv_columns() == std::vector<std::string>{"m", "j", "gap", "alpha_m", "beta_m"});
  const auto rows = t.csv_rows();
  CHECK(rows.size() == 11);
  CHECK(rows[4][2] == doctest::Approx(0.125));
}

TEST_CASE("alpha and beta bounds") {
  const auto checks = alpha_beta_checks(1, 12);
  for (const auto& c : checks) {
    CHECK(c.beta_ok);
    if (c.m >= 4) CHECK(c.alpha_ok);
  }
  const int first = smallest_valid_m(checks);
  MESSAGE("smallest m from which both bounds hold: " << first);
  CHECK(first >= 1);
  CHECK(first <= 4);
}

TEST_CASE("prior tail split") {
  const DiscretePrior inside({-1.0, 0.5}, {0.5, 0.5});
  auto [b1, t1] = split_prior_tail(inside, 2.0);
  CHECK(t1.mass() == 0.0);
  CHECK(b1.mass() == doctest::Approx(1.0));
  auto [b2, t2] = split_prior_tail(DiscretePrior::point_mass(4.0), 2.0);
  CHECK(t2.mass() == 1.0);
  CHECK(b2.mass() == 0.0);
  CHECK_THROWS(split_prior_tail(inside, 0.0));

  const DiscretePrior G({-3.0, -0.5, 0.2, 2.6}, {0.1, 0.4, 0.3, 0.2});
  const DiscretePrior H({-2.4, 0.0, 3.5}, {0.15, 0.7, 0.15});
  auto [gb, gt] = split_prior_tail(G, 2.0);
  CHECK(gb.mass() + gt.mass() == doctest::Approx(1.0).epsilon(1e-15));
  const TailNorms n = tail_component_norms(G, H, 2.0);
  CHECK(n.g_tail_sq > 0.0);
  CHECK(n.g_tail_sq <= n.g_bound);
  CHECK(n.gprime_tail_sq <= n.gprime_bound);
  CHECK(n.g_bound == doctest::Approx(4.0 * 0.3 + 4.0 * 0.3));
}

}  // TEST_SUITE
