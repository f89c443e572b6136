#pragma once

#include "eblab/mixture.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eblab {

enum class NpmleAlgorithm {
  em,       ///< plain multiplicative EM
  squarem,  ///< squared extrapolation of two EM steps, accepted only if loglik does not drop
  cnm,      ///< constrained Newton steps on the active support (NNLS + line search)
};

/// "em", "squarem" or "cnm"; throws std::invalid_argument otherwise.
NpmleAlgorithm parse_npmle_algorithm(const std::string& name);
const char* to_string(NpmleAlgorithm algorithm);

struct NpmleProblem {
  std::vector<double> observations;
  std::vector<double> grid;  ///< candidate atoms, sorted
  int max_iters = 50000;
  double tol = 1e-6;
  NpmleAlgorithm algorithm = NpmleAlgorithm::cnm;

  /// Uniform grid of `grid_size` points over [min y, max y].
  static NpmleProblem unconstrained(std::vector<double> observations, int grid_size = 400);
  /// Uniform grid of `grid_size` points over [-mprime, mprime].
  static NpmleProblem constrained(std::vector<double> observations, double mprime,
                                  int grid_size = 400);
  /// Uniform grid over [lo, hi]; a single point when lo == hi.
  static std::vector<double> uniform_grid(double lo, double hi, int grid_size);

  void validate() const;
};

struct NpmleSolution {
  DiscretePrior prior = DiscretePrior::point_mass(0.0);  ///< pruned, renormalized
  std::vector<double> grid_weights;                      ///< final iterate on the full grid
  double loglik = 0.0;          ///< mean log-likelihood (1/n) Σ log f(y_i)
  double gradient_cert = 0.0;   ///< max_u D(u)
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;  ///< one entry per accepted iterate, starting point first
};

class NotConverged : public std::runtime_error {
 public:
  explicit NotConverged(NpmleSolution best);
  NpmleSolution best;
};

/// Maximizes the mean log-likelihood over weights on the fixed grid. The multiplier
/// D(u) = (1/n) Σ_i φ(y_i - u) / f(y_i) drives the EM update w_u ← w_u D(u) and is
/// also the optimality certificate: iteration stops once max_u D(u) ≤ 1 + tol.
/// Every algorithm only accepts iterates that do not lower the log-likelihood.
/// Weights below 1e-12 are pruned from the returned prior.
NpmleSolution solve_npmle(const NpmleProblem& problem);

/// max_u D(u) over the problem grid for the solution's prior.
double gradient_certificate(const NpmleSolution& solution, const NpmleProblem& problem);

/// (1/n) Σ log f_prior(y_i).
double mixture_loglik(const DiscretePrior& prior, const std::vector<double>& observations);

/// y_i = u_i + z_i with u_i ~ prior, z_i ~ N(0,1), drawn from a stream seeded by `seed`.
std::vector<double> sample_mixture(const DiscretePrior& prior, int n, std::uint64_t seed);

struct EmpiricalRegretRow {
  int n = 0;
  double eps_sq = 0.0;
  double regret = 0.0;
  double loglik = 0.0;
  double cert = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  int atoms = 0;
};

/// Samples n observations from f_trueG, fits the NPMLE (constrained to [-mprime, mprime]
/// when requested) and measures Regret(Ĝ || trueG) and the squared Hellinger distance.
EmpiricalRegretRow empirical_regret_experiment(const DiscretePrior& trueG, int n,
                                               std::uint64_t seed, bool constrained,
                                               double mprime, int grid_size = 400,
                                               NpmleAlgorithm algorithm = NpmleAlgorithm::cnm);

}  // namespace eblab
