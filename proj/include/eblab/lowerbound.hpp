#pragma once

#include "eblab/divergence.hpp"
#include "eblab/hermite.hpp"
#include "eblab/report.hpp"

#include <vector>

namespace eblab {

/// G = (1-τ)δ_0 + τν and H = (1-τ)δ_0 + τν_m, with ν the arcsine law (Chebyshev rule
/// with `nu_nodes` nodes) and ν_m its m-point rule. The densities agree to O(τ), so
/// differences come from the Hermite series of ν - ν_m and are reported in units of τ:
///   (f_G - f_H)/τ         = φ(y) Σ_j Δ_{m,j} h_j(y)
///   (m_G f_G - m_H f_H)/τ = φ(y) Σ_j Δ_{m,j} h_{j-1}(y)
/// with h_j = He_j / j!.
class ArcsineGapPair final : public MixturePair {
 public:
  ArcsineGapPair(int m, double tau, int j_max = 200, int nu_nodes = 256);

  PairSample sample(double y) const override;
  double scale() const override { return tau_; }
  double window() const override { return window_; }

  int m() const { return m_; }
  double tau() const { return tau_; }
  const MarginalModel& G() const { return G_; }
  const MarginalModel& H() const { return H_; }
  const MomentGapTable& gaps() const { return table_; }

 private:
  int m_;
  double tau_;
  MomentGapTable table_;
  MarginalModel G_;
  MarginalModel H_;
  double window_;
};

struct LowerBoundInstance {
  int m = 0;
  double tau_m = 0.0;
  double alpha_m = 0.0;
  double beta_m = 0.0;
  double eps_sq = 0.0;
  double delta = 0.0;
  double regret_val = 0.0;  ///< Regret(H_m || G_m) = ∫ (m_H - m_G)^2 f_G
};

/// τ_m = α_m², ν from a 256-node rule, 2 ≤ m ≤ 12.
LowerBoundInstance build_lowerbound_instance(int m, const IntegrationSpec& spec = {});

/// r = regret / (ε² log(1/ε) / log log(1/ε)), ε = √eps_sq.
double regret_hellinger_ratio(double regret, double eps_sq);

/// One row per m in [m_lo, m_hi]: m, tau, alpha, beta, eps_sq, regret, ratio, followed by
/// delta, the bound 4α⁵, regret/(τ²β) and m / (log(1/α)/log log(1/α)).
/// Metadata records the minimum ratio (empirical c₀).
ExperimentReport lowerbound_ratio_sweep(int m_lo, int m_hi, const IntegrationSpec& spec = {});

struct MomentFamilyInstance {
  double p = 0.0;
  double b = 0.0;
  double eta = 0.0;        ///< b^{-p}
  double eps_sq = 0.0;
  double regret_lb = 0.0;  ///< b²(η(1-η) - e^{-b²/8})
  double regret_val = 0.0;
};

/// H = δ_0, G = (1-η)δ_0 + ηδ_b.
MomentFamilyInstance build_moment_family_instance(double p, double b, const IntegrationSpec& spec = {});

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Rows b, eta, eps_sq, regret, regret_lb, two_eta; metadata holds the fitted
/// exponent of regret against ε² and the target 1 - 1/p.
ExperimentReport moment_family_sweep(double p, const std::vector<double>& b_values,
                                     const IntegrationSpec& spec = {});

/// On the heavy-tail pair: rows rho, regret, regret_rho, ratio, jz_envelope for each
/// ρ given plus ρ = ε. The envelope is ε² max{(log 1/ρ)³, log 1/ε}.
ExperimentReport regularization_necessity_demo(double p, double b, const std::vector<double>& rhos,
                                               const IntegrationSpec& spec = {});

}  // namespace eblab
