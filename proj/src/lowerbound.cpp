#include "eblab/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eblab {

namespace {

DiscretePrior contaminated_origin(const QuadratureRule& rule, double tau) {
  std::vector<double> atoms{0.0};
  std::vector<double> weights{1.0 - tau};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    atoms.push_back(rule.nodes[i]);
    weights.push_back(tau * rule.weights[i]);
  }
  return DiscretePrior::merged(std::move(atoms), std::move(weights));
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ArcsineGapPair::ArcsineGapPair(int m, double tau, int j_max, int nu_nodes)
    : m_(m),
      tau_(tau),
      table_(moment_gap_table(m, j_max)),
      G_(contaminated_origin(chebyshev_rule(nu_nodes), tau)),
      H_(contaminated_origin(chebyshev_rule(m), tau)),
      window_(std::max(metric_window(1.0), 2.0 * std::sqrt(2.0 * m) + 8.0)) {
  if (!(tau > 0.0 && tau < 0.5)) throw std::invalid_argument("ArcsineGapPair: tau must lie in (0, 1/2)");
  if (2 * m > nu_nodes) throw std::invalid_argument("ArcsineGapPair: nu rule too coarse for m");
}

PairSample ArcsineGapPair::sample(double y) const {
  const auto g = G_.posterior_moments(y);
  const auto h = H_.posterior_moments(y);
  PairSample s;
  s.fG = std::exp(g.log_density);
  s.fH = std::exp(h.log_density);
  s.mG = g.mean;
  s.mH = h.mean;
  const int J = table_.j_max();
  const std::vector<double> hj = hermite_scaled_sequence(J, y);
  double s0 = 0.0;
  double s1 = 0.0;
  for (int j = 2 * m_; j <= J; ++j) {
    s0 += table_.gaps[j] * hj[j];
    s1 += table_.gaps[j] * hj[j - 1];
  }
  const double phi = std_normal_pdf(y);
  s.diff = phi * s0;
  s.dmf = phi * s1;
  // m_G - m_H = [(m_G f_G - m_H f_H) - m_H (f_G - f_H)] / f_G.
  s.mean_gap = (s.dmf - s.mH * s.diff) / s.fG;
  return s;
}

LowerBoundInstance build_lowerbound_instance(int m, const IntegrationSpec& spec) {
  if (m < 2 || m > 12) throw std::invalid_argument("build_lowerbound_instance: m must be in [2, 12]");
  const MomentGapTable table = moment_gap_table(m);
  LowerBoundInstance inst;
  inst.m = m;
  inst.alpha_m = table.alpha_m;
  inst.beta_m = table.beta_m;
  inst.tau_m = table.alpha_m * table.alpha_m;
  const ArcsineGapPair pair(m, inst.tau_m);
  inst.eps_sq = hellinger_sq(pair, spec);
  inst.delta = delta_stat(pair, spec);
  inst.regret_val = regret(pair, spec);
  return inst;
}

double regret_hellinger_ratio(double regret_value, double eps_sq) {
  if (!(eps_sq > 0.0)) return nan();
  const double log_inv = -0.5 * std::log(eps_sq);
  if (!(log_inv > 1.0)) return nan();
  return regret_value / (eps_sq * log_inv / std::log(log_inv));
}

ExperimentReport lowerbound_ratio_sweep(int m_lo, int m_hi, const IntegrationSpec& spec) {
  if (m_lo < 2 || m_hi > 12 || m_lo > m_hi)
    throw std::invalid_argument("lowerbound_ratio_sweep: range must lie within [2, 12]");
  ExperimentReport rep;
  rep.name = "lowerbound";
  rep.columns = {"m",     "tau",        "alpha",           "beta",          "eps_sq", "regret",
                 "ratio", "delta",      "eps_sq_bound",    "regret_over_tau2beta",  "c0_alpha"};
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int m = m_lo; m <= m_hi; ++m) {
    const LowerBoundInstance inst = build_lowerbound_instance(m, spec);
    const double ratio = regret_hellinger_ratio(inst.regret_val, inst.eps_sq);
    min_ratio = std::min(min_ratio, ratio);
    const double log_inv_alpha = -std::log(inst.alpha_m);
    const double c0 = m / (log_inv_alpha / std::log(log_inv_alpha));
    rep.add_row({static_cast<double>(m), inst.tau_m, inst.alpha_m, inst.beta_m, inst.eps_sq,
                 inst.regret_val, ratio, inst.delta, 4.0 * std::pow(inst.alpha_m, 5),
                 inst.regret_val / (inst.tau_m * inst.tau_m * inst.beta_m), c0});
  }
  rep.metadata["min_ratio"] = min_ratio;
  rep.metadata["m_range"] = {m_lo, m_hi};
  return rep;
}

MomentFamilyInstance build_moment_family_instance(double p, double b, const IntegrationSpec& spec) {
  if (!(p > 0.0)) throw std::invalid_argument("moment family: p must be positive");
  if (!(b > 1.0)) throw std::invalid_argument("moment family: b must exceed 1");
  MomentFamilyInstance inst;
  inst.p = p;
  inst.b = b;
  inst.eta = std::pow(b, -p);
  const MarginalModel G(DiscretePrior({0.0, b}, {1.0 - inst.eta, inst.eta}));
  const MarginalModel H(DiscretePrior::point_mass(0.0));
  const DirectPair pair(G, H);
  inst.eps_sq = hellinger_sq(pair, spec);
  inst.regret_val = regret(pair, spec);
  inst.regret_lb = b * b * (inst.eta * (1.0 - inst.eta) - std::exp(-b * b / 8.0));
  return inst;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need at least two paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExperimentReport moment_family_sweep(double p, const std::vector<double>& b_values,
                                     const IntegrationSpec& spec) {
  if (!(p > 0.0)) throw std::invalid_argument("moment_family_sweep: p must be positive");
  ExperimentReport rep;
  rep.name = "moment";
  rep.columns = {"b", "eta", "eps_sq", "regret", "regret_lb", "two_eta"};
  std::vector<double> eps;
  std::vector<double> reg;
  for (double b : b_values) {
    if (!(b >= 3.0)) throw std::invalid_argument("moment_family_sweep: b values must be >= 3");
    const MomentFamilyInstance inst = build_moment_family_instance(p, b, spec);
    rep.add_row({b, inst.eta, inst.eps_sq, inst.regret_val, inst.regret_lb, 2.0 * inst.eta});
    eps.push_back(inst.eps_sq);
    reg.push_back(inst.regret_val);
  }
  rep.metadata["p"] = p;
  rep.metadata["target_exponent"] = 1.0 - 1.0 / p;
  rep.metadata["fitted_exponent"] = eps.size() >= 2 ? loglog_slope(eps, reg) : nan();
  return rep;
}

ExperimentReport regularization_necessity_demo(double p, double b, const std::vector<double>& rhos,
                                               const IntegrationSpec& spec) {
  if (!(p > 0.0) || !(b >= 4.0))
    throw std::invalid_argument("regularization_necessity_demo: need p > 0 and b >= 4");
  const double eta = std::pow(b, -p);
  const MarginalModel G(DiscretePrior({0.0, b}, {1.0 - eta, eta}));
  const MarginalModel H(DiscretePrior::point_mass(0.0));
  const double eps_sq = hellinger_sq(G, H, spec);
  const double eps = std::sqrt(eps_sq);
  const double reg = regret(G, H, spec);

  std::vector<double> all(rhos);
  all.push_back(eps);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  ExperimentReport rep;
  rep.name = "regularization";
  rep.columns = {"rho", "regret", "regret_rho", "ratio", "jz_envelope", "is_eps"};
  for (double rho : all) {
    const double rr = regret_regularized(G, H, rho, spec);
    const double log_rho = std::log(1.0 / rho);
    const double envelope = eps_sq * std::max(log_rho * log_rho * log_rho, std::log(1.0 / eps));
    rep.add_row({rho, reg, rr, reg / rr, envelope, rho == eps ? 1.0 : 0.0});
  }
  rep.metadata["p"] = p;
  rep.metadata["b"] = b;
  rep.metadata["eps_sq"] = eps_sq;
  rep.metadata["ratio_at_eps"] = reg / regret_regularized(G, H, eps, spec);
  return rep;
}

}  // namespace eblab
