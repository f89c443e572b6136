#include "eblab/npmle.hpp"

#include "eblab/divergence.hpp"
#include "eblab/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eblab {

namespace {

constexpr double kPruneBelow = 1e-12;
// Weights this small cannot matter to the likelihood; flushing them keeps the
// arithmetic out of the (very slow) subnormal range.
constexpr double kFlushBelow = 1e-200;

void flush_tiny(Eigen::VectorXd& w) {
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] < kFlushBelow) w[k] = 0.0;
}

// Row-scaled likelihood matrix: P(i, k) = φ(y_i - u_k) / c_i with c_i = max_k φ(y_i - u_k).
// Scaling rows leaves D(u) unchanged and keeps every row's largest entry at 1.
struct Likelihood {
  Eigen::MatrixXd P;
  double mean_log_scale = 0.0;

  Likelihood(const std::vector<double>& y, const std::vector<double>& grid) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const auto K = static_cast<Eigen::Index>(grid.size());
    P.resize(n, K);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < K; ++k) nearest = std::min(nearest, std::abs(y[i] - grid[k]));
      const double log_c = std_normal_log_pdf(nearest);
      acc += log_c;
      for (Eigen::Index k = 0; k < K; ++k)
        P(i, k) = std::exp(std_normal_log_pdf(y[i] - grid[k]) - log_c);
    }
    mean_log_scale = acc / static_cast<double>(n);
  }

  struct Eval {
    double loglik;
    Eigen::VectorXd D;
  };

  Eval evaluate(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd f = P * w;
    const double n = static_cast<double>(P.rows());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) ll += std::log(f[i]);
    const Eigen::VectorXd inv = f.cwiseInverse();
    return {ll / n + mean_log_scale, (P.transpose() * inv) / n};
  }
};

void em_step(const Likelihood& lik, Eigen::VectorXd& w, Likelihood::Eval& cur) {
  w = w.cwiseProduct(cur.D);
  flush_tiny(w);
  cur = lik.evaluate(w);
}

void squarem_step(const Likelihood& lik, Eigen::VectorXd& w, Likelihood::Eval& cur) {
  Eigen::VectorXd w1 = w.cwiseProduct(cur.D);
  flush_tiny(w1);
  const Likelihood::Eval e1 = lik.evaluate(w1);
  Eigen::VectorXd w2 = w1.cwiseProduct(e1.D);
  flush_tiny(w2);
  Likelihood::Eval e2 = lik.evaluate(w2);
  const Eigen::VectorXd r = w1 - w;
  const Eigen::VectorXd v = w2 - w1 - r;
  const double vn = v.norm();
  if (vn > 0.0) {
    double alpha = std::min(-r.norm() / vn, -1.0);
    Eigen::VectorXd trial = w - 2.0 * alpha * r + alpha * alpha * v;
    // Flushed weights are exact zeros, so only strictly negative entries are infeasible.
    while (alpha < -1.0 && trial.minCoeff() < 0.0) {
      alpha = 0.5 * (alpha - 1.0);
      if (alpha > -1.0 - 1e-3) alpha = -1.0;
      trial = w - 2.0 * alpha * r + alpha * alpha * v;
    }
    if (alpha < -1.0 && trial.minCoeff() >= 0.0) {
      trial /= trial.sum();
      flush_tiny(trial);
      Likelihood::Eval et = lik.evaluate(trial);
      if (std::isfinite(et.loglik) && et.loglik >= e2.loglik) {
        w = std::move(trial);
        cur = std::move(et);
        return;
      }
    }
  }
  w = std::move(w2);
  cur = std::move(e2);
}

// Primal active-set solver for min ½ xᵀQx - cᵀx subject to Σx = 1, x ≥ 0, started
// from the feasible point x.
Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, Eigen::VectorXd x) {
  const Eigen::Index p = x.size();
  std::vector<char> free(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) free[j] = x[j] > 0.0;
  const double tol = 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff());
  for (int iter = 0; iter < 10 * static_cast<int>(p) + 20; ++iter) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < p; ++j)
      if (free[j]) idx.push_back(j);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index q = 0; q < m; ++q) kkt(r, q) = Q(idx[r], idx[q]);
      kkt(r, m) = 1.0;
      kkt(m, r) = 1.0;
      rhs[r] = c[idx[r]];
    }
    rhs[m] = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
    for (Eigen::Index r = 0; r < m; ++r) z[idx[r]] = sol[r];
    if (z.minCoeff() >= 0.0) {
      x = z;
      // Multipliers of the bounds x_j ≥ 0 for the fixed coordinates.
      const Eigen::VectorXd grad = Q * x - c;
      const double lambda = -sol[m];
      Eigen::Index enter = -1;
      double worst = -tol;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (free[j]) continue;
        const double mu = grad[j] - lambda;
        if (mu < worst) {
          worst = mu;
          enter = j;
        }
      }
      if (enter < 0) return x;
      free[enter] = 1;
      continue;
    }
    double step = 1.0;
    for (Eigen::Index j = 0; j < p; ++j)
      if (free[j] && z[j] < 0.0) step = std::min(step, x[j] / (x[j] - z[j]));
    x += step * (z - x);
    for (Eigen::Index j = 0; j < p; ++j)
      if (free[j] && (x[j] <= 0.0 || (z[j] < 0.0 && x[j] <= 1e-15))) {
        x[j] = 0.0;
        free[j] = 0;
      }
  }
  return x;
}

// One constrained Newton step: add the local maxima of D above 1 to the support, fit
// the quadratic model of the log-likelihood on the simplex and backtrack along the segment
// towards its normalized solution. Returns false when no ascent step is found.
bool cnm_step(const Likelihood& lik, Eigen::VectorXd& w, Likelihood::Eval& cur) {
  const Eigen::VectorXd& D = cur.D;
  const Eigen::Index K = w.size();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < K; ++k) {
    const bool local_max = D[k] > 1.0 && (k == 0 || D[k] >= D[k - 1]) && (k + 1 == K || D[k] >= D[k + 1]);
    if (w[k] > 0.0 || local_max) cols.push_back(k);
  }
  const Eigen::VectorXd f = lik.P * w;
  const Eigen::Index n = lik.P.rows();
  // Around S w = 1 the log-likelihood is -½ ||Sα - 2||² up to a constant and third-order terms.
  Eigen::MatrixXd S(n, static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd start(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    S.col(static_cast<Eigen::Index>(c)) = lik.P.col(cols[c]).cwiseQuotient(f);
    start[static_cast<Eigen::Index>(c)] = w[cols[c]];
  }
  const Eigen::MatrixXd Q = S.transpose() * S;
  const Eigen::VectorXd lin = 2.0 * S.transpose() * Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd a = simplex_qp(Q, lin, start / start.sum());
  const double total = a.sum();
  if (!(total > 0.0)) return false;
  Eigen::VectorXd target = Eigen::VectorXd::Zero(K);
  for (std::size_t c = 0; c < cols.size(); ++c) target[cols[c]] = a[static_cast<Eigen::Index>(c)] / total;
  // Directional derivative of the mean log-likelihood; D·w = 1 at every iterate.
  const double slope = target.dot(D) - w.dot(D);
  if (!(slope > 0.0)) return false;
  for (double step = 1.0; step > 1e-12; step *= 0.5) {
    Eigen::VectorXd trial = w + step * (target - w);
    flush_tiny(trial);
    Likelihood::Eval e = lik.evaluate(trial);
    if (std::isfinite(e.loglik) && e.loglik >= cur.loglik + step * slope / 3.0) {
      w = std::move(trial);
      cur = std::move(e);
      return true;
    }
  }
  return false;
}

NpmleSolution finish(const NpmleProblem& problem, const Eigen::VectorXd& w,
                     const Likelihood::Eval& e, int iterations, bool converged,
                     std::vector<double> trace) {
  NpmleSolution s;
  s.grid_weights.assign(w.data(), w.data() + w.size());
  s.loglik = e.loglik;
  s.gradient_cert = e.D.maxCoeff();
  s.iterations = iterations;
  s.converged = converged;
  s.loglik_trace = std::move(trace);
  std::vector<double> atoms;
  std::vector<double> weights;
  for (std::size_t k = 0; k < problem.grid.size(); ++k) {
    if (w[static_cast<Eigen::Index>(k)] < kPruneBelow) continue;
    atoms.push_back(problem.grid[k]);
    weights.push_back(w[static_cast<Eigen::Index>(k)]);
  }
  if (atoms.empty()) {
    Eigen::Index best = 0;
    w.maxCoeff(&best);
    atoms.push_back(problem.grid[static_cast<std::size_t>(best)]);
    weights.push_back(1.0);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& x : weights) x /= total;
  s.prior = DiscretePrior(std::move(atoms), std::move(weights));
  return s;
}

}  // namespace

std::vector<double> NpmleProblem::uniform_grid(double lo, double hi, int grid_size) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("NpmleProblem: grid bounds must be finite with lo <= hi");
  if (grid_size < 1) throw std::invalid_argument("NpmleProblem: grid_size must be positive");
  if (lo == hi || grid_size == 1) return {0.5 * (lo + hi)};
  std::vector<double> g(static_cast<std::size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) g[k] = lo + (hi - lo) * k / (grid_size - 1);
  g.back() = hi;
  return g;
}

NpmleProblem NpmleProblem::unconstrained(std::vector<double> observations, int grid_size) {
  if (observations.empty()) throw std::invalid_argument("NpmleProblem: no observations");
  const auto [lo, hi] = std::minmax_element(observations.begin(), observations.end());
  NpmleProblem p;
  p.grid = uniform_grid(*lo, *hi, grid_size);
  p.observations = std::move(observations);
  return p;
}

NpmleProblem NpmleProblem::constrained(std::vector<double> observations, double mprime,
                                       int grid_size) {
  if (!(mprime >= 0.0)) throw std::invalid_argument("NpmleProblem: mprime must be nonnegative");
  NpmleProblem p;
  p.grid = uniform_grid(-mprime, mprime, grid_size);
  p.observations = std::move(observations);
  return p;
}

void NpmleProblem::validate() const {
  if (observations.empty()) throw std::invalid_argument("NpmleProblem: no observations");
  for (double y : observations)
    if (!std::isfinite(y)) throw std::invalid_argument("NpmleProblem: non-finite observation");
  if (grid.empty()) throw std::invalid_argument("NpmleProblem: empty grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw std::invalid_argument("NpmleProblem: non-finite grid point");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw std::invalid_argument("NpmleProblem: grid must be strictly increasing");
  }
  if (max_iters < 1) throw std::invalid_argument("NpmleProblem: max_iters must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("NpmleProblem: tol must be positive");
}

NotConverged::NotConverged(NpmleSolution best_)
    : std::runtime_error("NotConverged: NPMLE reached max_iters with certificate " +
                         std::to_string(best_.gradient_cert)),
      best(std::move(best_)) {}

NpmleAlgorithm parse_npmle_algorithm(const std::string& name) {
  if (name == "em") return NpmleAlgorithm::em;
  if (name == "squarem") return NpmleAlgorithm::squarem;
  if (name == "cnm") return NpmleAlgorithm::cnm;
  throw std::invalid_argument("unknown NPMLE algorithm '" + name + "' (em, squarem, cnm)");
}

const char* to_string(NpmleAlgorithm algorithm) {
  switch (algorithm) {
    case NpmleAlgorithm::em: return "em";
    case NpmleAlgorithm::squarem: return "squarem";
    case NpmleAlgorithm::cnm: return "cnm";
  }
  return "?";
}

NpmleSolution solve_npmle(const NpmleProblem& problem) {
  problem.validate();
  const Likelihood lik(problem.observations, problem.grid);
  const auto K = static_cast<Eigen::Index>(problem.grid.size());

  // EM cannot revive a zero weight, so it starts from the full grid; CNM adds support
  // points itself and starts from at most 20 evenly spaced ones.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(K);
  const Eigen::Index start_points = problem.algorithm == NpmleAlgorithm::cnm ? std::min<Eigen::Index>(K, 20) : K;
  for (Eigen::Index r = 0; r < start_points; ++r)
    w[start_points == 1 ? 0 : r * (K - 1) / (start_points - 1)] = 1.0 / static_cast<double>(start_points);
  Likelihood::Eval cur = lik.evaluate(w);
  std::vector<double> trace{cur.loglik};
  int it = 0;
  while (cur.D.maxCoeff() > 1.0 + problem.tol) {
    if (it >= problem.max_iters) throw NotConverged(finish(problem, w, cur, it, false, trace));
    ++it;
    switch (problem.algorithm) {
      case NpmleAlgorithm::em: em_step(lik, w, cur); break;
      case NpmleAlgorithm::squarem: squarem_step(lik, w, cur); break;
      case NpmleAlgorithm::cnm:
        if (!cnm_step(lik, w, cur)) em_step(lik, w, cur);
        break;
    }
    trace.push_back(cur.loglik);
  }
  return finish(problem, w, cur, it, true, std::move(trace));
}

double gradient_certificate(const NpmleSolution& solution, const NpmleProblem& problem) {
  const MarginalModel model(solution.prior);
  const double n = static_cast<double>(problem.observations.size());
  double best = 0.0;
  std::vector<double> log_f(problem.observations.size());
  for (std::size_t i = 0; i < log_f.size(); ++i) log_f[i] = model.log_density(problem.observations[i]);
  for (double u : problem.grid) {
    double acc = 0.0;
    for (std::size_t i = 0; i < log_f.size(); ++i)
      acc += std::exp(std_normal_log_pdf(problem.observations[i] - u) - log_f[i]);
    best = std::max(best, acc / n);
  }
  return best;
}

double mixture_loglik(const DiscretePrior& prior, const std::vector<double>& observations) {
  if (observations.empty()) throw std::invalid_argument("mixture_loglik: no observations");
  const MarginalModel model(prior);
  double acc = 0.0;
  for (double y : observations) acc += model.log_density(y);
  return acc / static_cast<double>(observations.size());
}

std::vector<double> sample_mixture(const DiscretePrior& prior, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_mixture: negative sample size");
  Xoshiro256 rng(seed);
  std::vector<double> cumulative(prior.size());
  std::partial_sum(prior.weights().begin(), prior.weights().end(), cumulative.begin());
  std::vector<double> y(static_cast<std::size_t>(n));
  for (auto& yi : y) {
    const double u = rng.uniform() * cumulative.back();
    auto pos = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
    pos = std::min<std::ptrdiff_t>(pos, static_cast<std::ptrdiff_t>(prior.size()) - 1);
    yi = prior.atoms()[static_cast<std::size_t>(pos)] + rng.normal();
  }
  return y;
}

EmpiricalRegretRow empirical_regret_experiment(const DiscretePrior& trueG, int n,
                                               std::uint64_t seed, bool constrained,
                                               double mprime, int grid_size,
                                               NpmleAlgorithm algorithm) {
  if (n < 50) throw std::invalid_argument("empirical_regret_experiment: n must be at least 50");
  std::vector<double> y = sample_mixture(trueG, n, seed);
  NpmleProblem problem = constrained ? NpmleProblem::constrained(std::move(y), mprime, grid_size)
                                     : NpmleProblem::unconstrained(std::move(y), grid_size);
  problem.algorithm = algorithm;
  const NpmleSolution sol = solve_npmle(problem);
  const MarginalModel fG(trueG);
  const MarginalModel fhat(sol.prior);
  EmpiricalRegretRow row;
  row.n = n;
  row.eps_sq = hellinger_sq(fG, fhat);
  row.regret = regret(fG, fhat);
  row.loglik = sol.loglik;
  row.cert = sol.gradient_cert;
  row.seed = seed;
  row.iterations = sol.iterations;
  row.atoms = static_cast<int>(sol.prior.size());
  return row;
}

}  // namespace eblab
