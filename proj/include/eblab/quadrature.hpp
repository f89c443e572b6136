#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eblab {

enum class RuleKind { gauss_hermite, gauss_chebyshev, adaptive_panel };

/// Fixed quadrature rule: strictly increasing nodes with positive weights.
/// Probability-measure rules (Gauss-Chebyshev for the arcsine law, Gauss-Hermite
/// for N(0,1)) have weights summing to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  RuleKind kind = RuleKind::adaptive_panel;

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double apply(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

struct IntegrationSpec {
  double abs_tol = 1e-11;
  double rel_tol = 1e-9;
  double truncation_radius = 12.0;
  int max_panels = 20000;

  void validate() const;
};

class ToleranceNotMet : public std::runtime_error {
 public:
  ToleranceNotMet(double estimate, double error, int panels);
  double estimate;
  double error;
  int panels;
};

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

using Integrand = std::function<double(double)>;

/// Gauss rule for the arcsine law on [-1, 1]: Chebyshev nodes, equal weights 1/m.
QuadratureRule chebyshev_rule(int m);

/// n-point Gauss rule for the standard normal measure (probabilists' Hermite).
/// Nodes from the Jacobi matrix eigenvalues, polished by Newton; weights from the
/// Christoffel function so that tiny tail weights stay strictly positive.
QuadratureRule gauss_hermite_rule(int n);

/// j-th moment of the arcsine law: 0 for odd j, binom(2r, r) / 4^r for j = 2r.
double arcsine_moment(int j);

/// Globally adaptive Gauss-Kronrod (7/15) integration on [a, b].
/// Never throws; callers inspect `error` themselves.
IntegrationResult integrate_adaptive(const Integrand& f, double a, double b,
                                     const IntegrationSpec& spec);

/// Adaptive integration on [a, b]; throws ToleranceNotMet when max_panels runs out.
double integrate_interval(const Integrand& f, double a, double b, const IntegrationSpec& spec);

/// Adaptive integration over [-R, R] with R = spec.truncation_radius.
double integrate_line(const Integrand& f, const IntegrationSpec& spec);

/// Like integrate_line, but tightens abs_tol so that rel_tol governs even when
/// the integral is far below abs_tol.
double integrate_line_relative(const Integrand& f, const IntegrationSpec& spec);

/// Upper bound on  ∫_{|y|>R} (1 + y^2) f(y) dy  for f = F * N(0,1) with F supported
/// in [-M, M], M = sqrt(support_radius_sq).
double gaussian_tail_mass(double radius, double support_radius_sq);

/// Smallest R (to bisection accuracy) with gaussian_tail_mass(R, bound) <= target.
double gaussian_tail_radius(double second_moment_bound, double target_tail_mass);

/// Standard normal density and upper tail.
double std_normal_pdf(double y);
double std_normal_log_pdf(double y);
double std_normal_upper_tail(double a);

}  // namespace eblab
