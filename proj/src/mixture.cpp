#include "eblab/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace eblab {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

void sort_by_atom(std::vector<double>& atoms, std::vector<double>& weights) {
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  std::vector<double> a2(atoms.size());
  std::vector<double> w2(atoms.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    a2[i] = atoms[order[i]];
    w2[i] = weights[order[i]];
  }
  atoms = std::move(a2);
  weights = std::move(w2);
}

}  // namespace

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

DiscretePrior::DiscretePrior(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw std::invalid_argument("DiscretePrior: no atoms");
  if (atoms_.size() != weights_.size())
    throw std::invalid_argument("DiscretePrior: atoms and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i]) || !std::isfinite(weights_[i]))
      throw std::invalid_argument("DiscretePrior: non-finite entry");
    if (weights_[i] < 0.0) throw std::invalid_argument("DiscretePrior: negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("DiscretePrior: weights must sum to 1");
  sort_by_atom(atoms_, weights_);
  for (std::size_t i = 1; i < atoms_.size(); ++i)
    if (atoms_[i] == atoms_[i - 1]) throw std::invalid_argument("DiscretePrior: repeated atom");
}

DiscretePrior DiscretePrior::point_mass(double atom) { return DiscretePrior({atom}, {1.0}); }

DiscretePrior DiscretePrior::merged(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size())
    throw std::invalid_argument("DiscretePrior: atoms and weights differ in length");
  sort_by_atom(atoms, weights);
  std::vector<double> a;
  std::vector<double> w;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!a.empty() && a.back() == atoms[i])
      w.back() += weights[i];
    else {
      a.push_back(atoms[i]);
      w.push_back(weights[i]);
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("DiscretePrior: zero total mass");
  for (double& x : w) x /= total;
  return DiscretePrior(std::move(a), std::move(w));
}

DiscretePrior DiscretePrior::mixture(const DiscretePrior& a, const DiscretePrior& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("DiscretePrior::mixture: t not in [0,1]");
  std::vector<double> atoms(a.atoms_.begin(), a.atoms_.end());
  std::vector<double> weights;
  for (double w : a.weights_) weights.push_back((1.0 - t) * w);
  atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
  for (double w : b.weights_) weights.push_back(t * w);
  return merged(std::move(atoms), std::move(weights));
}

double DiscretePrior::moment(int j) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) acc += weights_[i] * std::pow(atoms_[i], j);
  return acc;
}

double DiscretePrior::support_radius() const {
  double r = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (weights_[i] > 0.0) r = std::max(r, std::abs(atoms_[i]));
  return r;
}

DiscretePrior DiscretePrior::shifted(double mu) const {
  std::vector<double> atoms(atoms_);
  for (double& u : atoms) u += mu;
  return merged(std::move(atoms), weights_);
}

nlohmann::json DiscretePrior::to_json() const {
  return nlohmann::json{{"atoms", atoms_}, {"weights", weights_}};
}

DiscretePrior DiscretePrior::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    throw std::invalid_argument("DiscretePrior: expected {\"atoms\": [...], \"weights\": [...]}");
  return DiscretePrior(j.at("atoms").get<std::vector<double>>(),
                       j.at("weights").get<std::vector<double>>());
}

QuadraturePrior::QuadraturePrior(QuadratureRule rule) : rule_(std::move(rule)) {
  const double total = std::accumulate(rule_.weights.begin(), rule_.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("QuadraturePrior: rule weights must sum to 1");
}

QuadraturePrior QuadraturePrior::arcsine(int nodes) { return QuadraturePrior(chebyshev_rule(nodes)); }

double QuadraturePrior::moment(int j) const {
  return rule_.apply([j](double x) { return std::pow(x, j); });
}

DiscretePrior QuadraturePrior::as_discrete() const {
  return DiscretePrior::merged(rule_.nodes, rule_.weights);
}

MarginalModel::MarginalModel(const DiscretePrior& prior) : prior_(prior) {
  log_weights_.reserve(prior_.size());
  for (double w : prior_.weights())
    log_weights_.push_back(w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity());
  support_bound_ = prior_.support_radius();
  second_moment_ = prior_.second_moment();
}

MarginalModel::MarginalModel(const QuadraturePrior& prior) : MarginalModel(prior.as_discrete()) {}

MarginalModel::Moments MarginalModel::posterior_moments(double y) const {
  const auto atoms = prior_.atoms();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double d = y - atoms[i];
    top = std::max(top, log_weights_[i] - 0.5 * d * d);
  }
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double d = y - atoms[i];
    const double e = std::exp(log_weights_[i] - 0.5 * d * d - top);
    s0 += e;
    s1 += e * atoms[i];
    s2 += e * atoms[i] * atoms[i];
  }
  return {top + std::log(s0) - kHalfLog2Pi, s1 / s0, s2 / s0};
}

double MarginalModel::log_density(double y) const { return posterior_moments(y).log_density; }

double MarginalModel::density(double y) const { return std::exp(log_density(y)); }

double MarginalModel::density_derivative(double y) const {
  const auto atoms = prior_.atoms();
  const auto weights = prior_.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    acc += weights[i] * (atoms[i] - y) * std_normal_pdf(y - atoms[i]);
  return acc;
}

double MarginalModel::posterior_mean(double y) const { return posterior_moments(y).mean; }

double MarginalModel::posterior_variance(double y) const {
  const Moments m = posterior_moments(y);
  return std::max(0.0, m.second - m.mean * m.mean);
}

double MarginalModel::score(double y) const { return posterior_mean(y) - y; }

double MarginalModel::regularized_rule(double rho, double y) const {
  if (!(rho > 0.0)) throw std::invalid_argument("regularized_rule: rho must be positive");
  return y + density_derivative(y) / std::max(density(y), rho);
}

double weight_w(const MarginalModel& G, const MarginalModel& H, double y) {
  const double log_f = log_add_exp(G.log_density(y), H.log_density(y)) - std::numbers::ln2;
  return std::exp(2.0 * std_normal_log_pdf(y) - log_f);
}

double class_moment(const DiscretePrior& prior, double alpha, double sigma) {
  if (!(alpha > 0.0 && sigma > 0.0))
    throw std::invalid_argument("class_moment: alpha and sigma must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i)
    acc += prior.weights()[i] * std::exp(std::pow(std::abs(prior.atoms()[i]) / sigma, alpha));
  return acc;
}

bool check_class_membership(const DiscretePrior& prior, double alpha, double sigma) {
  return class_moment(prior, alpha, sigma) <= 2.0 * (1.0 + 1e-12);
}

}  // namespace eblab
