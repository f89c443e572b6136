#include "eblab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace eblab {

namespace {

double integrate_over(const MixturePair& pair, const IntegrationSpec& spec, const Integrand& f) {
  IntegrationSpec s = spec;
  s.truncation_radius = pair.window();
  return integrate_line_relative(f, s);
}

double integrate_window(double window, const IntegrationSpec& spec, const Integrand& f) {
  IntegrationSpec s = spec;
  s.truncation_radius = window;
  return integrate_line_relative(f, s);
}

double pair_window(const MarginalModel& G, const MarginalModel& H) {
  return metric_window(std::max(G.support_bound(), H.support_bound()));
}

bool forms_agree(double a, double b) {
  return std::abs(a - b) <= 1e-7 * std::max(std::abs(a), std::abs(b)) + 1e-300;
}

}  // namespace

double metric_window(double support_bound) {
  return std::max(support_bound + 12.0, gaussian_tail_radius(support_bound * support_bound, 1e-14));
}

DirectPair::DirectPair(MarginalModel G, MarginalModel H)
    : G_(std::move(G)), H_(std::move(H)), window_(pair_window(G_, H_)) {}

PairSample DirectPair::sample(double y) const {
  const auto g = G_.posterior_moments(y);
  const auto h = H_.posterior_moments(y);
  const double fG = std::exp(g.log_density);
  const double fH = std::exp(h.log_density);
  return {fG, fH, g.mean, h.mean, fG - fH, g.mean * fG - h.mean * fH, g.mean - h.mean};
}

std::optional<double> DirectPair::gprime_sq_w(double y) const {
  auto tilted_first_moment = [y](const DiscretePrior& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double u = p.atoms()[i];
      acc += p.weights()[i] * u * std::exp(u * y - 0.5 * u * u);
    }
    return acc;
  };
  const double gprime = tilted_first_moment(G_.prior()) - tilted_first_moment(H_.prior());
  if (!std::isfinite(gprime)) return std::nullopt;
  return gprime * gprime * weight_w(G_, H_, y);
}

FormMismatch::FormMismatch(double mixture_form_, double gprime_form_)
    : std::runtime_error("FormMismatch: Delta mixture form " + std::to_string(mixture_form_) +
                         " disagrees with g' form " + std::to_string(gprime_form_)),
      mixture_form(mixture_form_),
      gprime_form(gprime_form_) {}

double hellinger_sq(const MixturePair& pair, const IntegrationSpec& spec) {
  const double s = pair.scale();
  return s * s * integrate_over(pair, spec, [&pair](double y) {
           const PairSample p = pair.sample(y);
           const double root = std::sqrt(p.fG) + std::sqrt(p.fH);
           return root > 0.0 ? p.diff * p.diff / (root * root) : 0.0;
         });
}

double delta_stat(const MixturePair& pair, const IntegrationSpec& spec) {
  const double s = pair.scale();
  return s * s * integrate_over(pair, spec, [&pair](double y) {
           const PairSample p = pair.sample(y);
           const double sum = p.fG + p.fH;
           return sum > 0.0 ? 2.0 * p.diff * p.diff / sum : 0.0;
         });
}

double Delta_stat(const MixturePair& pair, const IntegrationSpec& spec) {
  const double s = pair.scale();
  const double mixture_form = s * s * integrate_over(pair, spec, [&pair](double y) {
                                const PairSample p = pair.sample(y);
                                const double sum = p.fG + p.fH;
                                return sum > 0.0 ? 2.0 * p.dmf * p.dmf / sum : 0.0;
                              });
  if (!pair.gprime_sq_w(0.0)) return mixture_form;
  const double gprime_form = s * s * integrate_over(pair, spec, [&pair](double y) {
                               return pair.gprime_sq_w(y).value_or(0.0);
                             });
  if (!forms_agree(mixture_form, gprime_form)) throw FormMismatch(mixture_form, gprime_form);
  return mixture_form;
}

double regret(const MixturePair& pair, const IntegrationSpec& spec) {
  const double s = pair.scale();
  return s * s * integrate_over(pair, spec, [&pair](double y) {
           const PairSample p = pair.sample(y);
           return p.mean_gap * p.mean_gap * p.fG;
         });
}

double hellinger_sq(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec) {
  return hellinger_sq(DirectPair(G, H), spec);
}

double delta_stat(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec) {
  return delta_stat(DirectPair(G, H), spec);
}

double Delta_stat(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec) {
  return Delta_stat(DirectPair(G, H), spec);
}

double regret(const MarginalModel& G, const MarginalModel& H, const IntegrationSpec& spec) {
  return regret(DirectPair(G, H), spec);
}

double regret_score_form(const MarginalModel& G, const MarginalModel& H,
                         const IntegrationSpec& spec) {
  return integrate_window(pair_window(G, H), spec, [&](double y) {
    const double fG = G.density(y);
    const double fH = H.density(y);
    if (fG <= 0.0 || fH <= 0.0) return 0.0;
    const double d = G.density_derivative(y) / fG - H.density_derivative(y) / fH;
    return d * d * fG;
  });
}

double regret_regularized(const MarginalModel& G, const MarginalModel& H, double rho,
                          const IntegrationSpec& spec) {
  if (!(rho > 0.0)) throw std::invalid_argument("regret_regularized: rho must be positive");
  return integrate_window(pair_window(G, H), spec, [&](double y) {
    const double fG = G.density(y);
    const double fH = H.density(y);
    const double d = G.density_derivative(y) / std::max(fG, rho) -
                     H.density_derivative(y) / std::max(fH, rho);
    return d * d * fG;
  });
}

double decomposition_residual(const MarginalModel& G, const MarginalModel& H, double y) {
  const double fG = G.density(y);
  const double fH = H.density(y);
  const double mG = G.posterior_mean(y);
  const double mH = H.posterior_mean(y);
  const double lhs = G.density_derivative(y) / fG - H.density_derivative(y) / fH;
  const double sum = fG + fH;
  const double rhs = (mG + mH) * (fH - fG) / sum + 2.0 * (mG * fG - mH * fH) / sum;
  return std::abs(lhs - rhs);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j{{"hellinger_sq", hellinger_sq},
                   {"delta", delta},
                   {"Delta", Delta_cap},
                   {"regret", regret}};
  const auto cols = csv_columns();
  const auto row = csv_row();
  for (std::size_t i = 4; i < cols.size(); ++i) j[cols[i]] = row[i];
  return j;
}

std::vector<std::string> MetricReport::csv_columns() const {
  std::vector<std::string> cols{"hellinger_sq", "delta", "Delta", "regret"};
  for (const auto& [rho, value] : regret_regularized) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "regret_rho_%.6g", rho);
    cols.emplace_back(buf);
  }
  return cols;
}

std::vector<double> MetricReport::csv_row() const {
  std::vector<double> row{hellinger_sq, delta, Delta_cap, regret};
  for (const auto& [rho, value] : regret_regularized) row.push_back(value);
  return row;
}

MetricReport metric_report(const MarginalModel& G, const MarginalModel& H,
                           const std::vector<double>& rhos, const IntegrationSpec& spec) {
  const DirectPair pair(G, H);
  MetricReport r;
  r.hellinger_sq = hellinger_sq(pair, spec);
  r.delta = delta_stat(pair, spec);
  r.Delta_cap = Delta_stat(pair, spec);
  r.regret = regret(pair, spec);
  for (double rho : rhos) r.regret_regularized[rho] = regret_regularized(G, H, rho, spec);
  return r;
}

}  // namespace eblab
