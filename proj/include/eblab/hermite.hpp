#pragma once

#include "eblab/mixture.hpp"

#include <string>
#include <utility>
#include <vector>

namespace eblab {

/// Probabilists' Hermite polynomial He_j(y), j ≤ 400, by the three-term recurrence.
double hermite_eval(int j, double y);

/// h_0(y), ..., h_n(y) with h_j = He_j / j!, via (j+1) h_{j+1} = y h_j - h_{j-1}.
/// Stays finite for degrees where He_j or j! alone would overflow.
std::vector<double> hermite_scaled_sequence(int n, double y);

/// log(j!).
double log_factorial(int j);

double prior_moment(const DiscretePrior& prior, int j);
double prior_moment(const QuadraturePrior& prior, int j);

/// g(y) = Σ_{j ≤ k} c_j He_j(y) with c_j = (m_j(G) - m_j(H)) / j!.
struct HermiteSeries {
  std::vector<double> coefficients;
  int truncation_degree = 0;

  double evaluate(double y) const;
  /// Σ c_j j He_{j-1}(y).
  double derivative(double y) const;
};

HermiteSeries expansion_coefficients(const DiscretePrior& G, const DiscretePrior& H, int k);

/// Tail sums past degree k.
struct TruncationError {
  double err_g = 0.0;       ///< Σ_{j>k} Δm_j^2 / j!
  double err_gprime = 0.0;  ///< Σ_{j>k} Δm_j^2 / (j-1)!
  int last_degree = 0;      ///< largest degree summed
};

/// Sums until the envelope 4 M^{2j} / (j-1)! of every remaining term is below 1e-30
/// (individual terms may vanish by symmetry, so a single tiny term does not stop the
/// sum), or degree 400.
TruncationError truncation_error(const DiscretePrior& G, const DiscretePrior& H, int k);

/// Moment gaps Δ_{m,j} between the arcsine law and its m-point Chebyshev rule.
struct MomentGapTable {
  int m = 0;
  std::vector<double> gaps;  ///< j = 0..J_max
  double alpha_m = 0.0;      ///< ¼ Σ_{2m ≤ j ≤ J_max} Δ_{m,j}^2 / j!
  double beta_m = 0.0;       ///< ¼ Σ_{2m ≤ j ≤ J_max} Δ_{m,j}^2 / (j-1)!
  /// log of Σ_{j > J_max} 4 / (j-1)!, which bounds both omitted tails.
  double log_remainder_bound = 0.0;

  int j_max() const { return static_cast<int>(gaps.size()) - 1; }
  std::vector<std::string> csv_columns() const;
  std::vector<std::vector<double>> csv_rows() const;
};

/// Δ_{m,j} from the cosine expansion of x^j = cos^j θ: the arcsine law integrates
/// cos(nθ) to 1{n = 0} and the rule integrates it to (-1)^{n/2m} 1{2m | n}.
/// Exact up to rounding of the binomial weights, unlike a difference of two O(1) moments.
double moment_gap(int m, int j);

/// arcsine_moment(j) minus the j-th moment of chebyshev_rule(m), summed over nodes.
double moment_gap_direct(int m, int j);

MomentGapTable moment_gap_table(int m, int j_max = 200);

/// β_m ≥ 2m α_m and 2^{-4m}/(2m)! ≤ α_m ≤ 2/(2m)! for one m.
struct AlphaBetaCheck {
  int m = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  bool beta_ok = false;
  bool alpha_ok = false;
};

std::vector<AlphaBetaCheck> alpha_beta_checks(int m_lo, int m_hi, int j_max = 200);

/// Smallest m in the list from which every later entry satisfies both bounds; -1 if none.
int smallest_valid_m(const std::vector<AlphaBetaCheck>& checks);

/// Part of a prior restricted to a set of atoms; weights are not renormalized.
struct SubMeasure {
  std::vector<double> atoms;
  std::vector<double> weights;
  double mass() const;
  double second_moment() const;
};

/// Splits atoms into |u| ≤ L (bulk) and |u| > L (tail).
std::pair<SubMeasure, SubMeasure> split_prior_tail(const DiscretePrior& prior, double L);

/// Norms of the tail parts of g and g' in L²(w), w = φ² / f with f = (f_G + f_H)/2,
/// together with the moment bounds they are compared against.
struct TailNorms {
  double g_tail_sq = 0.0;         ///< ‖g_{>L}‖²
  double gprime_tail_sq = 0.0;    ///< ‖g'_{>L}‖²
  double g_bound = 0.0;           ///< 4 G(|U|>L) + 4 H(|U|>L)
  double gprime_bound = 0.0;      ///< 4 ∫_{|u|>L} u² (G + H)(du)
};

TailNorms tail_component_norms(const DiscretePrior& G, const DiscretePrior& H, double L,
                               const IntegrationSpec& spec = {});

}  // namespace eblab
