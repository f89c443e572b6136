#include "eblab/hermite.hpp"

#include "eblab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eblab {

namespace {

constexpr int kMaxDegree = 400;

void check_degree(int j, const char* where) {
  if (j < 0 || j > kMaxDegree)
    throw std::invalid_argument(std::string(where) + ": degree must be in [0, 400]");
}

double moment_difference(const DiscretePrior& G, const DiscretePrior& H, int j) {
  return G.moment(j) - H.moment(j);
}

double sub_density(const SubMeasure& s, double y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.atoms.size(); ++i) acc += s.weights[i] * std_normal_pdf(y - s.atoms[i]);
  return acc;
}

double sub_first(const SubMeasure& s, double y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.atoms.size(); ++i)
    acc += s.weights[i] * s.atoms[i] * std_normal_pdf(y - s.atoms[i]);
  return acc;
}

}  // namespace

double hermite_eval(int j, double y) {
  check_degree(j, "hermite_eval");
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = y;
  for (int i = 1; i < j; ++i) {
    const double next = y * cur - i * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_scaled_sequence(int n, double y) {
  check_degree(n, "hermite_scaled_sequence");
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  h[0] = 1.0;
  if (n >= 1) h[1] = y;
  for (int j = 1; j < n; ++j) h[j + 1] = (y * h[j] - h[j - 1]) / (j + 1);
  return h;
}

double log_factorial(int j) {
  if (j < 0) throw std::invalid_argument("log_factorial: negative argument");
  return std::lgamma(static_cast<double>(j) + 1.0);
}

double prior_moment(const DiscretePrior& prior, int j) {
  if (j < 0) throw std::invalid_argument("prior_moment: negative order");
  return prior.moment(j);
}

double prior_moment(const QuadraturePrior& prior, int j) {
  if (j < 0) throw std::invalid_argument("prior_moment: negative order");
  return prior.moment(j);
}

double HermiteSeries::evaluate(double y) const {
  double acc = 0.0;
  double prev = 0.0;
  double cur = 1.0;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    acc += coefficients[j] * cur;
    const double next = y * cur - static_cast<double>(j) * prev;
    prev = cur;
    cur = next;
  }
  return acc;
}

double HermiteSeries::derivative(double y) const {
  double acc = 0.0;
  double prev = 0.0;
  double cur = 1.0;  // He_{j-1}
  for (std::size_t j = 1; j < coefficients.size(); ++j) {
    acc += coefficients[j] * static_cast<double>(j) * cur;
    const double next = y * cur - static_cast<double>(j - 1) * prev;
    prev = cur;
    cur = next;
  }
  return acc;
}

HermiteSeries expansion_coefficients(const DiscretePrior& G, const DiscretePrior& H, int k) {
  check_degree(k, "expansion_coefficients");
  HermiteSeries s;
  s.truncation_degree = k;
  s.coefficients.resize(static_cast<std::size_t>(k) + 1);
  s.coefficients[0] = 0.0;
  for (int j = 1; j <= k; ++j)
    s.coefficients[j] = moment_difference(G, H, j) / std::exp(log_factorial(j));
  return s;
}

TruncationError truncation_error(const DiscretePrior& G, const DiscretePrior& H, int k) {
  if (k < 0) throw std::invalid_argument("truncation_error: negative degree");
  const double M = std::max(G.support_radius(), H.support_radius());
  const double log_floor = std::log(1e-30);
  TruncationError out;
  out.last_degree = k;
  for (int j = k + 1; j <= kMaxDegree; ++j) {
    out.last_degree = j;
    const double d = moment_difference(G, H, j);
    if (d != 0.0) {
      const double log_d2 = 2.0 * std::log(std::abs(d));
      out.err_g += std::exp(log_d2 - log_factorial(j));
      out.err_gprime += std::exp(log_d2 - log_factorial(j - 1));
    }
    // Terms are bounded by 4 M^{2j}/(j-1)!, decreasing once j > M²; stop when that
    // envelope for the next degree is negligible.
    const double log_env = std::log(4.0) + 2.0 * (j + 1) * std::log(std::max(M, 1e-300)) -
                           log_factorial(j);
    if (M == 0.0 || (j + 1 > M * M && log_env < log_floor)) break;
  }
  return out;
}

std::vector<std::string> MomentGapTable::csv_columns() const {
  return {"m", "j", "gap", "alpha_m", "beta_m"};
}

std::vector<std::vector<double>> MomentGapTable::csv_rows() const {
  std::vector<std::vector<double>> rows;
  rows.reserve(gaps.size());
  for (std::size_t j = 0; j < gaps.size(); ++j)
    rows.push_back({static_cast<double>(m), static_cast<double>(j), gaps[j], alpha_m, beta_m});
  return rows;
}

double moment_gap(int m, int j) {
  if (m < 1) throw std::invalid_argument("moment_gap: m must be positive");
  check_degree(j, "moment_gap");
  // Row j of Pascal's triangle scaled by 2^{-j}: entries C(j, r) 2^{-j}, all ≤ 1.
  std::vector<double> row{1.0};
  for (int i = 1; i <= j; ++i) {
    std::vector<double> next(static_cast<std::size_t>(i) + 1);
    next[0] = 0.5 * row[0];
    next[i] = 0.5 * row[i - 1];
    for (int r = 1; r < i; ++r) next[r] = 0.5 * (row[r - 1] + row[r]);
    row = std::move(next);
  }
  double acc = 0.0;
  for (int r = 0; r <= j; ++r) {
    const int n = j - 2 * r;
    if (n == 0 || n % (2 * m) != 0) continue;
    const int q = n / (2 * m);
    acc += (q % 2 == 0) ? row[r] : -row[r];
  }
  return -acc;
}

double moment_gap_direct(int m, int j) {
  if (m < 1) throw std::invalid_argument("moment_gap_direct: m must be positive");
  const QuadratureRule rule = chebyshev_rule(m);
  return arcsine_moment(j) - rule.apply([j](double x) { return std::pow(x, j); });
}

MomentGapTable moment_gap_table(int m, int j_max) {
  if (m < 1 || m > 20) throw std::invalid_argument("moment_gap_table: m must be in [1, 20]");
  if (j_max < 2 * m || j_max > kMaxDegree)
    throw std::invalid_argument("moment_gap_table: J_max must be in [2m, 400]");
  MomentGapTable t;
  t.m = m;
  t.gaps.resize(static_cast<std::size_t>(j_max) + 1);
  for (int j = 0; j <= j_max; ++j) t.gaps[j] = j < 2 * m ? 0.0 : moment_gap(m, j);
  for (int j = 2 * m; j <= j_max; ++j) {
    const double g = t.gaps[j];
    if (g == 0.0) continue;
    const double log_g2 = 2.0 * std::log(std::abs(g));
    t.alpha_m += 0.25 * std::exp(log_g2 - log_factorial(j));
    t.beta_m += 0.25 * std::exp(log_g2 - log_factorial(j - 1));
  }
  // Σ_{j > J} 4/(j-1)! ≤ 4/J! · (1 + 1/(J+1) + ...) ≤ 8/J!.
  t.log_remainder_bound = std::log(8.0) - log_factorial(j_max);
  return t;
}

std::vector<AlphaBetaCheck> alpha_beta_checks(int m_lo, int m_hi, int j_max) {
  std::vector<AlphaBetaCheck> out;
  for (int m = m_lo; m <= m_hi; ++m) {
    const MomentGapTable t = moment_gap_table(m, j_max);
    AlphaBetaCheck c;
    c.m = m;
    c.alpha = t.alpha_m;
    c.beta = t.beta_m;
    const double log_fact = log_factorial(2 * m);
    c.alpha_lower = std::exp(-4.0 * m * std::log(2.0) - log_fact);
    c.alpha_upper = std::exp(std::log(2.0) - log_fact);
    c.beta_ok = c.beta >= 2.0 * m * c.alpha;
    c.alpha_ok = c.alpha_lower <= c.alpha && c.alpha <= c.alpha_upper;
    out.push_back(c);
  }
  return out;
}

int smallest_valid_m(const std::vector<AlphaBetaCheck>& checks) {
  int first = -1;
  for (const auto& c : checks) {
    if (c.beta_ok && c.alpha_ok) {
      if (first < 0) first = c.m;
    } else {
      first = -1;
    }
  }
  return first;
}

double SubMeasure::mass() const {
  double acc = 0.0;
  for (double w : weights) acc += w;
  return acc;
}

double SubMeasure::second_moment() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) acc += weights[i] * atoms[i] * atoms[i];
  return acc;
}

std::pair<SubMeasure, SubMeasure> split_prior_tail(const DiscretePrior& prior, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("split_prior_tail: L must be positive");
  SubMeasure bulk;
  SubMeasure tail;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    SubMeasure& dst = std::abs(prior.atoms()[i]) <= L ? bulk : tail;
    dst.atoms.push_back(prior.atoms()[i]);
    dst.weights.push_back(prior.weights()[i]);
  }
  return {bulk, tail};
}

TailNorms tail_component_norms(const DiscretePrior& G, const DiscretePrior& H, double L,
                               const IntegrationSpec& spec) {
  const auto [g_bulk, g_tail] = split_prior_tail(G, L);
  const auto [h_bulk, h_tail] = split_prior_tail(H, L);
  const MarginalModel fG(G);
  const MarginalModel fH(H);

  IntegrationSpec s = spec;
  s.truncation_radius = metric_window(std::max(G.support_radius(), H.support_radius()));

  TailNorms out;
  // g_{>L} = (f_{G>L} - f_{H>L}) / φ, so g_{>L}^2 w = (f_{G>L} - f_{H>L})^2 / f, and
  // g'_{>L} φ = Σ w u φ(y - u) over tail atoms.
  out.g_tail_sq = integrate_line_relative(
      [&](double y) {
        const double d = sub_density(g_tail, y) - sub_density(h_tail, y);
        const double f = 0.5 * (fG.density(y) + fH.density(y));
        return d * d / f;
      },
      s);
  out.gprime_tail_sq = integrate_line_relative(
      [&](double y) {
        const double d = sub_first(g_tail, y) - sub_first(h_tail, y);
        const double f = 0.5 * (fG.density(y) + fH.density(y));
        return d * d / f;
      },
      s);
  out.g_bound = 4.0 * g_tail.mass() + 4.0 * h_tail.mass();
  out.gprime_bound = 4.0 * g_tail.second_moment() + 4.0 * h_tail.second_moment();
  return out;
}

}  // namespace eblab
