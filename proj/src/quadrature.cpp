#include "eblab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

namespace eblab {

namespace {

// Kronrod 15-point abscissae and weights, with the embedded 7-point Gauss weights
// (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod_panel(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

constexpr int kInitialPanels = 16;

}  // namespace

void IntegrationSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw std::invalid_argument("IntegrationSpec: tolerances must be positive");
  if (!(truncation_radius > 0.0))
    throw std::invalid_argument("IntegrationSpec: truncation_radius must be positive");
  if (max_panels < kInitialPanels)
    throw std::invalid_argument("IntegrationSpec: max_panels too small");
}

ToleranceNotMet::ToleranceNotMet(double estimate_, double error_, int panels_)
    : std::runtime_error("ToleranceNotMet: adaptive quadrature exhausted " +
                         std::to_string(panels_) + " panels (estimate " +
                         std::to_string(estimate_) + ", error " + std::to_string(error_) + ")"),
      estimate(estimate_),
      error(error_),
      panels(panels_) {}

double std_normal_pdf(double y) {
  return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_log_pdf(double y) {
  return -0.5 * y * y - 0.5 * std::log(2.0 * std::numbers::pi);
}

double std_normal_upper_tail(double a) { return 0.5 * std::erfc(a / std::numbers::sqrt2); }

QuadratureRule chebyshev_rule(int m) {
  if (m < 1) throw std::invalid_argument("chebyshev_rule: m must be >= 1");
  QuadratureRule rule;
  rule.kind = RuleKind::gauss_chebyshev;
  rule.nodes.resize(m);
  rule.weights.assign(m, 1.0 / m);
  // j = m..1 gives ascending order. Nodes are mirrored so the rule is exactly
  // symmetric; the middle node of an odd rule is exactly 0.
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - i;
    const double x = std::cos((2 * j - 1) * std::numbers::pi / (2.0 * m));
    rule.nodes[i] = x;
    rule.nodes[m - 1 - i] = -x;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_hermite_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_rule: n must be >= 1");
  QuadratureRule rule;
  rule.kind = RuleKind::gauss_hermite;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(static_cast<double>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  // Orthonormal Hermite values q_0..q_{n} at x; returns sum_{j<n} q_j^2.
  auto evaluate = [n](double x, double& qn, double& qn1) {
    double prev = 0.0;
    double cur = 1.0;
    double christoffel = 1.0;
    for (int j = 0; j < n; ++j) {
      const double next = (x * cur - std::sqrt(static_cast<double>(j)) * prev) /
                          std::sqrt(static_cast<double>(j + 1));
      prev = cur;
      cur = next;
      if (j + 1 < n) christoffel += cur * cur;
    }
    qn = cur;
    qn1 = prev;
    return christoffel;
  };

  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()[i];
    double qn = 0.0;
    double qn1 = 0.0;
    for (int it = 0; it < 3; ++it) {
      evaluate(x, qn, qn1);
      x -= qn / (std::sqrt(static_cast<double>(n)) * qn1);
    }
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / evaluate(x, qn, qn1);
  }
  // Symmetrize: the rule is exactly symmetric about zero.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double arcsine_moment(int j) {
  if (j < 0) throw std::invalid_argument("arcsine_moment: j must be >= 0");
  if (j % 2 == 1) return 0.0;
  const int r = j / 2;
  // binom(2r, r) / 4^r in log space; exact for small r.
  return std::exp(std::lgamma(2.0 * r + 1.0) - 2.0 * std::lgamma(r + 1.0) -
                  2.0 * r * std::numbers::ln2);
}

IntegrationResult integrate_adaptive(const Integrand& f, double a, double b,
                                     const IntegrationSpec& spec) {
  spec.validate();
  std::priority_queue<Panel> heap;
  const double width = (b - a) / kInitialPanels;
  double total = 0.0;
  double total_err = 0.0;
  for (int i = 0; i < kInitialPanels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == kInitialPanels) ? b : lo + width;
    Panel p = kronrod_panel(f, lo, hi);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  int panels = kInitialPanels;
  auto done = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
  while (!done() && panels < spec.max_panels) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = kronrod_panel(f, worst.a, mid);
    Panel right = kronrod_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the drift of the running updates.
  IntegrationResult result;
  result.panels = panels;
  while (!heap.empty()) {
    result.value += heap.top().value;
    result.error += heap.top().error;
    heap.pop();
  }
  return result;
}

double integrate_interval(const Integrand& f, double a, double b, const IntegrationSpec& spec) {
  const IntegrationResult r = integrate_adaptive(f, a, b, spec);
  if (r.error > std::max(spec.abs_tol, spec.rel_tol * std::abs(r.value)))
    throw ToleranceNotMet(r.value, r.error, r.panels);
  return r.value;
}

double integrate_line(const Integrand& f, const IntegrationSpec& spec) {
  return integrate_interval(f, -spec.truncation_radius, spec.truncation_radius, spec);
}

double integrate_line_relative(const Integrand& f, const IntegrationSpec& spec) {
  const double pilot = integrate_line(f, spec);
  const double scale = std::abs(pilot);
  if (scale == 0.0 || spec.rel_tol * scale >= spec.abs_tol) return pilot;
  IntegrationSpec tight = spec;
  tight.abs_tol = 1e-2 * spec.rel_tol * scale;
  return integrate_line(f, tight);
}

double gaussian_tail_mass(double radius, double support_radius_sq) {
  const double M = std::sqrt(std::max(0.0, support_radius_sq));
  const double a = std::max(0.0, radius - M);
  const double q = std_normal_upper_tail(a);
  const double p = std_normal_pdf(a);
  // Two tails of  ∫_a^∞ (1 + (t + M)^2) φ(t) dt.
  return 2.0 * ((2.0 + M * M) * q + (2.0 * M + a) * p);
}

double gaussian_tail_radius(double second_moment_bound, double target_tail_mass) {
  if (!(target_tail_mass > 0.0 && target_tail_mass < 1.0))
    throw std::invalid_argument("gaussian_tail_radius: target must lie in (0, 1)");
  if (!(second_moment_bound >= 0.0))
    throw std::invalid_argument("gaussian_tail_radius: bound must be nonnegative");
  const double M = std::sqrt(second_moment_bound);
  double lo = M;
  double hi = M + 1.0;
  while (gaussian_tail_mass(hi, second_moment_bound) > target_tail_mass) hi = M + 2.0 * (hi - M);
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_tail_mass(mid, second_moment_bound) > target_tail_mass)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace eblab
