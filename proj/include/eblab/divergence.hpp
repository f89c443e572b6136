#pragma once

#include "eblab/mixture.hpp"
#include "eblab/quadrature.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eblab {

/// Pointwise view of a pair of marginals (f_G, f_H). The difference fields are
/// reported in units of `MixturePair::scale()` so that pairs whose densities agree
/// to many digits can supply their differences analytically:
///   diff     = (f_G - f_H) / scale
///   dmf      = (m_G f_G - m_H f_H) / scale
///   mean_gap = (m_G - m_H) / scale
struct PairSample {
  double fG;
  double fH;
  double mG;
  double mH;
  double diff;
  double dmf;
  double mean_gap;
};

class MixturePair {
 public:
  virtual ~MixturePair() = default;
  virtual PairSample sample(double y) const = 0;
  /// Second route to the Δ integrand, g'(y)^2 w(y) / scale^2, when the pair has one.
  virtual std::optional<double> gprime_sq_w(double) const { return std::nullopt; }
  virtual double scale() const { return 1.0; }
  /// Half-width of the integration window.
  virtual double window() const = 0;
};

/// Two explicit marginal models; differences are taken directly.
class DirectPair final : public MixturePair {
 public:
  DirectPair(MarginalModel G, MarginalModel H);

  PairSample sample(double y) const override;
  /// g = (f_G - f_H)/φ differentiated term by term over the atoms, times w = φ²/f.
  std::optional<double> gprime_sq_w(double y) const override;
  double window() const override { return window_; }

  const MarginalModel& G() const { return G_; }
  const MarginalModel& H() const { return H_; }

 private:
  MarginalModel G_;
  MarginalModel H_;
  double window_;
};

class FormMismatch : public std::runtime_error {
 public:
  FormMismatch(double mixture_form, double gprime_form);
  double mixture_form;
  double gprime_form;
};

/// Window half-width for functionals of f_F with supports in [-M, M]:
/// max(M + 12, gaussian_tail_radius(M^2, 1e-14)).
double metric_window(double support_bound);

/// ∫ (√f_G - √f_H)^2, evaluated as ∫ (f_G - f_H)^2 / (√f_G + √f_H)^2.
double hellinger_sq(const MixturePair& pair, const IntegrationSpec& spec = {});
/// 2 ∫ (f_G - f_H)^2 / (f_G + f_H).
double delta_stat(const MixturePair& pair, const IntegrationSpec& spec = {});
/// 2 ∫ (m_G f_G - m_H f_H)^2 / (f_G + f_H); when the pair offers the g' route the
/// two forms are cross-checked and FormMismatch is thrown beyond 1e-7 relative.
double Delta_stat(const MixturePair& pair, const IntegrationSpec& spec = {});
/// Regret(H || G) = ∫ (m_H - m_G)^2 f_G.
double regret(const MixturePair& pair, const IntegrationSpec& spec = {});

double hellinger_sq(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec = {});
double delta_stat(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec = {});
double Delta_stat(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec = {});
double regret(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec = {});

/// Regret in the score-difference form ∫ (f'_G/f_G - f'_H/f_H)^2 f_G, with f' from
/// direct atom sums.
double regret_score_form(const MarginalModel& G, const MarginalModel& H,
                         const IntegrationSpec& spec = {});

/// ∫ (f'_G/(f_G ∨ ρ) - f'_H/(f_H ∨ ρ))^2 f_G.
double regret_regularized(const MarginalModel& G, const MarginalModel& H, double rho,
                          const IntegrationSpec& spec = {});

/// |(f'_G/f_G - f'_H/f_H) - [(m_G+m_H)(f_H-f_G)/(f_G+f_H) + 2(m_G f_G - m_H f_H)/(f_G+f_H)]|.
double decomposition_residual(const MarginalModel& G, const MarginalModel& H, double y);

struct MetricReport {
  double hellinger_sq = 0.0;
  double delta = 0.0;
  double Delta_cap = 0.0;
  double regret = 0.0;
  std::map<double, double> regret_regularized;

  nlohmann::json to_json() const;
  std::vector<std::string> csv_columns() const;
  std::vector<double> csv_row() const;
};

MetricReport metric_report(const MarginalModel& G, const MarginalModel& H,
                           const std::vector<double>& rhos = {}, const IntegrationSpec& spec = {});

}  // namespace eblab
