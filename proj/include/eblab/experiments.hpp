#pragma once

#include "eblab/mixture.hpp"
#include "eblab/quadrature.hpp"
#include "eblab/report.hpp"
#include "eblab/rng.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eblab {

class UnknownExperiment : public std::invalid_argument {
 public:
  explicit UnknownExperiment(const std::string& name);
};

class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(const std::string& experiment, const std::string& parameter,
                   const std::string& reason);
};

/// One experiment run. `parameters` holds experiment-specific scalars, lists and
/// prior records ({atoms, weights}); see README for the keys each experiment accepts.
struct ExperimentSpec {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string output_path;
  int threads = 1;
  double tol_abs = IntegrationSpec{}.abs_tol;
  double tol_rel = IntegrationSpec{}.rel_tol;

  IntegrationSpec integration() const;
  nlohmann::json to_json() const;
  /// Fields absent from `j` keep their current values.
  void merge_json(const nlohmann::json& j);
};

const std::vector<std::string>& experiment_names();

/// Rejects unknown names, unknown parameter keys and ill-typed values.
void validate(const ExperimentSpec& spec);

/// Validates, dispatches and returns the report; metadata carries the ExperimentSpec echo,
/// the tool version and the wall time. Does not write files.
ExperimentReport run(const ExperimentSpec& spec);

/// run() followed by ExperimentReport::write(spec.output_path) when a path is set.
ExperimentReport run_and_write(const ExperimentSpec& spec);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Cells must write
/// only to their own output slot; results are therefore independent of scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// `atoms` distinct atoms uniform on [-M, M] with uniform-then-normalized weights.
DiscretePrior random_compact_prior(Xoshiro256& rng, int atoms, double M);

/// Random prior pairs for the regret/Hellinger ratio sweep.
/// family: "two_point" | "k_atom" | "g_alpha"; pairs with ε² = 0 are skipped.
/// Rows: index, eps_sq, delta, Delta, regret, ratio; metadata records the max ratio.
ExperimentReport regratio_sweep(const nlohmann::json& family, std::uint64_t seed, int threads,
                                const IntegrationSpec& integration = {});

constexpr const char* kToolVersion = "eblab 1.0.0";

}  // namespace eblab
