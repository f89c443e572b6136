#pragma once

#include "eblab/quadrature.hpp"

#include "json.hpp"

#include <span>
#include <vector>

namespace eblab {

/// Finitely supported probability measure. Atoms are kept sorted and distinct;
/// weights are nonnegative and sum to one within 1e-12.
class DiscretePrior {
 public:
  DiscretePrior(std::vector<double> atoms, std::vector<double> weights);

  static DiscretePrior point_mass(double atom);
  /// Builds a prior from possibly repeated atoms by summing their weights.
  static DiscretePrior merged(std::vector<double> atoms, std::vector<double> weights);
  /// (1 - t) * a + t * b.
  static DiscretePrior mixture(const DiscretePrior& a, const DiscretePrior& b, double t);

  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }

  double moment(int j) const;
  double mean() const { return moment(1); }
  double second_moment() const { return moment(2); }
  /// max |u| over atoms with positive weight.
  double support_radius() const;
  DiscretePrior shifted(double mu) const;

  nlohmann::json to_json() const;
  static DiscretePrior from_json(const nlohmann::json& j);

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

/// Continuous prior carried by a quadrature rule whose weights form a probability
/// vector, e.g. the arcsine law through a high-order Chebyshev rule.
class QuadraturePrior {
 public:
  explicit QuadraturePrior(QuadratureRule rule);
  /// Arcsine law on [-1, 1]; 256 nodes are exact to polynomial degree 511.
  static QuadraturePrior arcsine(int nodes = 256);

  const QuadratureRule& rule() const { return rule_; }
  double moment(int j) const;
  DiscretePrior as_discrete() const;

 private:
  QuadratureRule rule_;
};

/// Evaluator bundle for the Gaussian location mixture f_F = F * N(0, 1).
/// Immutable after construction; all members are safe to call concurrently.
class MarginalModel {
 public:
  explicit MarginalModel(const DiscretePrior& prior);
  explicit MarginalModel(const QuadraturePrior& prior);

  const DiscretePrior& prior() const { return prior_; }
  double support_bound() const { return support_bound_; }
  double second_moment() const { return second_moment_; }

  double density(double y) const;
  double log_density(double y) const;
  /// f'(y) as the direct atom sum  Σ w_i (u_i - y) φ(y - u_i).
  double density_derivative(double y) const;
  /// E[U | Y = y] as a weight-normalized average of atoms (Tweedie).
  double posterior_mean(double y) const;
  double posterior_variance(double y) const;
  /// f'(y) / f(y) = posterior_mean(y) - y.
  double score(double y) const;
  /// y + f'(y) / max(f(y), rho).
  double regularized_rule(double rho, double y) const;

  /// log f(y), Σ w u φ(y-u) / f(y) and Σ w u² φ(y-u) / f(y) in one pass.
  struct Moments {
    double log_density;
    double mean;
    double second;
  };
  Moments posterior_moments(double y) const;

 private:
  DiscretePrior prior_;
  std::vector<double> log_weights_;
  double support_bound_ = 0.0;
  double second_moment_ = 0.0;
};

/// w(y) = φ(y)^2 / f(y) with f = (f_G + f_H) / 2.
double weight_w(const MarginalModel& G, const MarginalModel& H, double y);

/// Σ_i w_i exp((|u_i| / sigma)^alpha).
double class_moment(const DiscretePrior& prior, double alpha, double sigma);
/// Membership in G_alpha(sigma): class_moment <= 2 (up to a 1e-12 relative rounding slack).
bool check_class_membership(const DiscretePrior& prior, double alpha, double sigma);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace eblab
