#include "eblab/experiments.hpp"

#include "eblab/divergence.hpp"
#include "eblab/hermite.hpp"
#include "eblab/lowerbound.hpp"
#include "eblab/npmle.hpp"
#include "eblab/orthopoly.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace eblab {

namespace {

using nlohmann::json;

enum class Kind { number, integer, boolean, string, number_list, integer_list, prior, integer_pair };

using Schema = std::map<std::string, Kind>;

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s{
      {"metrics", {{"G", Kind::prior}, {"H", Kind::prior}, {"rhos", Kind::number_list}}},
      {"bernstein",
       {{"nu", Kind::prior},
        {"M", Kind::number},
        {"atoms", Kind::integer},
        {"k_values", Kind::integer_list},
        {"dump_matrices", Kind::string},
        {"C1", Kind::number},
        {"C2", Kind::number}}},
      {"hermite", {{"m_values", Kind::integer_list}, {"j_max", Kind::integer}}},
      {"lowerbound", {{"m_range", Kind::integer_pair}}},
      {"moment",
       {{"p", Kind::number},
        {"b_values", Kind::number_list},
        {"rho_values", Kind::number_list},
        {"demo_b", Kind::number}}},
      {"npmle",
       {{"data", Kind::string},
        {"grid_min", Kind::number},
        {"grid_max", Kind::number},
        {"grid_size", Kind::integer},
        {"tol", Kind::number},
        {"max_iters", Kind::integer},
        {"constrained", Kind::boolean},
        {"mprime", Kind::number},
        {"true_prior", Kind::prior},
        {"n_values", Kind::integer_list},
        {"replicates", Kind::integer},
        {"algorithm", Kind::string}}},
      {"regratio",
       {{"generator", Kind::string},
        {"count", Kind::integer},
        {"M", Kind::number},
        {"atoms", Kind::integer},
        {"alpha", Kind::number},
        {"sigma", Kind::number}}},
  };
  return s;
}

bool is_integer(const json& v) {
  if (v.is_number_integer()) return true;
  return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
}

bool kind_matches(Kind kind, const json& v) {
  switch (kind) {
    case Kind::number: return v.is_number();
    case Kind::integer: return is_integer(v);
    case Kind::boolean: return v.is_boolean();
    case Kind::string: return v.is_string();
    case Kind::number_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    case Kind::integer_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), is_integer);
    case Kind::prior:
      return v.is_object() && v.contains("atoms") && v.contains("weights");
    case Kind::integer_pair:
      return v.is_array() && v.size() == 2 && is_integer(v[0]) && is_integer(v[1]);
  }
  return false;
}

// Read-side helper: every accessor assumes validate() has already run.
struct Params {
  const json& p;

  bool has(const std::string& k) const { return p.contains(k); }
  double num(const std::string& k, double def) const { return has(k) ? p.at(k).get<double>() : def; }
  int integer(const std::string& k, int def) const {
    return has(k) ? static_cast<int>(p.at(k).get<double>()) : def;
  }
  bool flag(const std::string& k, bool def) const { return has(k) ? p.at(k).get<bool>() : def; }
  std::string str(const std::string& k, const std::string& def) const {
    return has(k) ? p.at(k).get<std::string>() : def;
  }
  std::vector<double> list(const std::string& k, std::vector<double> def) const {
    return has(k) ? p.at(k).get<std::vector<double>>() : def;
  }
  std::vector<int> ints(const std::string& k, std::vector<int> def) const {
    if (!has(k)) return def;
    std::vector<int> out;
    for (const auto& v : p.at(k)) out.push_back(static_cast<int>(v.get<double>()));
    return out;
  }
  DiscretePrior prior(const std::string& k, const DiscretePrior& def) const {
    return has(k) ? DiscretePrior::from_json(p.at(k)) : def;
  }
};

void require(bool ok, const std::string& exp, const std::string& key, const std::string& why) {
  if (!ok) throw InvalidParameter(exp, key, why);
}

void check_values(const std::string& name, const Params& P) {
  auto positive = [&](const std::string& k) {
    if (P.has(k)) require(P.num(k, 1.0) > 0.0, name, k, "must be positive");
  };
  auto prior_ok = [&](const std::string& k) {
    if (!P.has(k)) return;
    try {
      (void)DiscretePrior::from_json(P.p.at(k));
    } catch (const std::exception& e) {
      throw InvalidParameter(name, k, e.what());
    }
  };
  if (name == "metrics") {
    prior_ok("G");
    prior_ok("H");
    for (double r : P.list("rhos", {})) require(r > 0.0, name, "rhos", "entries must be positive");
  } else if (name == "bernstein") {
    prior_ok("nu");
    if (P.has("M")) require(P.num("M", 0) >= 0.0, name, "M", "must be nonnegative");
    if (P.has("atoms")) require(P.integer("atoms", 1) >= 1, name, "atoms", "must be at least 1");
    for (int k : P.ints("k_values", {})) require(k >= 0 && k <= 60, name, "k_values", "entries must lie in [0, 60]");
    positive("C1");
    positive("C2");
  } else if (name == "hermite") {
    for (int m : P.ints("m_values", {})) require(m >= 1 && m <= 20, name, "m_values", "entries must lie in [1, 20]");
    if (P.has("j_max")) {
      const int j = P.integer("j_max", 200);
      require(j <= 400, name, "j_max", "must be at most 400");
      for (int m : P.ints("m_values", {1})) require(j >= 2 * m, name, "j_max", "must be at least 2m");
    }
  } else if (name == "lowerbound") {
    const auto r = P.ints("m_range", {2, 10});
    require(r[0] >= 2 && r[1] <= 12 && r[0] <= r[1], name, "m_range", "must lie within [2, 12]");
  } else if (name == "moment") {
    positive("p");
    for (double b : P.list("b_values", {})) require(b >= 3.0, name, "b_values", "entries must be >= 3");
    for (double r : P.list("rho_values", {})) require(r > 0.0, name, "rho_values", "entries must be positive");
    if (P.has("demo_b")) require(P.num("demo_b", 8) >= 4.0, name, "demo_b", "must be >= 4");
  } else if (name == "npmle") {
    prior_ok("true_prior");
    if (P.has("grid_size")) require(P.integer("grid_size", 400) >= 1, name, "grid_size", "must be positive");
    positive("tol");
    if (P.has("max_iters")) require(P.integer("max_iters", 1) >= 1, name, "max_iters", "must be positive");
    if (P.has("mprime")) require(P.num("mprime", 0) >= 0.0, name, "mprime", "must be nonnegative");
    if (P.has("grid_min") && P.has("grid_max"))
      require(P.num("grid_min", 0) <= P.num("grid_max", 0), name, "grid_min", "must not exceed grid_max");
    for (int n : P.ints("n_values", {})) require(n >= 50, name, "n_values", "entries must be >= 50");
    if (P.has("replicates")) require(P.integer("replicates", 1) >= 1, name, "replicates", "must be positive");
    const std::string alg = P.str("algorithm", "cnm");
    require(alg == "em" || alg == "squarem" || alg == "cnm", name, "algorithm", "must be em, squarem or cnm");
    if (P.has("data")) {
      std::ifstream in(P.str("data", ""));
      require(static_cast<bool>(in), name, "data", "cannot open file");
    }
  } else if (name == "regratio") {
    const std::string g = P.str("generator", "two_point");
    require(g == "two_point" || g == "k_atom" || g == "g_alpha", name, "generator",
            "must be two_point, k_atom or g_alpha");
    if (P.has("count")) require(P.integer("count", 1) >= 1, name, "count", "must be positive");
    positive("M");
    if (P.has("atoms")) require(P.integer("atoms", 2) >= 1, name, "atoms", "must be positive");
    positive("alpha");
    positive("sigma");
  }
}

std::vector<double> read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> y;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
    }
    if (line.find_first_not_of(" \t", used) != std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": one observation per line expected");
    y.push_back(v);
  }
  if (y.empty()) throw std::runtime_error(path + ": no observations");
  return y;
}

ExperimentReport run_metrics(const ExperimentSpec& spec, const Params& P) {
  const DiscretePrior d0 = DiscretePrior::point_mass(0.0);
  const MarginalModel G(P.prior("G", d0));
  const MarginalModel H(P.prior("H", d0));
  const MetricReport m = metric_report(G, H, P.list("rhos", {}), spec.integration());
  ExperimentReport rep;
  rep.columns = m.csv_columns();
  rep.add_row(m.csv_row());
  return rep;
}

ExperimentReport run_bernstein(const ExperimentSpec& spec, const Params& P) {
  DiscretePrior nu = DiscretePrior::point_mass(0.0);
  if (P.has("nu")) {
    nu = P.prior("nu", nu);
  } else if (P.has("M")) {
    Xoshiro256 rng(cell_seed(spec.seed, 0));
    nu = random_compact_prior(rng, P.integer("atoms", 5), P.num("M", 1.0));
  }
  const auto ks = P.ints("k_values", {5, 10, 20, 40});
  ExperimentReport rep;
  rep.columns = {"k",           "M",           "bernstein",        "bound",
                 "finer_bound", "orth_residual", "triangular_residual", "split_residual",
                 "symmetry_residual", "identity_residual", "max_abs_beta", "empirical_C",
                 "triangular_ratio"};
  std::vector<BernsteinDiagnostics> diag(ks.size());
  parallel_for(ks.size(), spec.threads, [&](std::size_t i) { diag[i] = bernstein_diagnostics(nu, ks[i]); });
  for (const auto& d : diag) {
    const double logk = std::log(d.k + 1.0);
    const double emp = d.k > 0 ? d.norm / (std::sqrt(static_cast<double>(d.k)) * logk) : 0.0;
    const double tri = d.k > 0 && d.S_norm > 0 ? d.norm / (logk * d.S_norm) : 0.0;
    rep.add_row({static_cast<double>(d.k), d.M, d.norm, d.bound, d.finer_bound,
                 d.orthonormality_residual, d.triangular_residual, d.split_residual,
                 d.symmetry_residual, d.identity_residual, d.max_abs_beta, emp, tri});
  }
  rep.metadata["nu"] = nu.to_json();
  if (P.has("C1") || P.has("C2")) {
    const double C1 = P.num("C1", 1.0 + nu.support_radius());
    const double C2 = P.num("C2", 1.0);
    json checks = json::array();
    for (int k : ks) {
      const JacobiCheckReport r = jacobi_norm_bound_check(nu, k, C1, C2);
      checks.push_back({{"k", k},
                        {"row_bound_holds", r.row_bound_holds},
                        {"max_row_ratio", r.max_row_ratio},
                        {"max_row_identity_residual", r.max_row_identity_residual},
                        {"jacobi_row_sum_bound", r.jacobi_row_sum_bound},
                        {"jacobi_norm", r.jacobi_norm},
                        {"empirical_C", r.empirical_C},
                        {"triangular_ratio", r.triangular_ratio}});
    }
    rep.metadata["jacobi_checks"] = checks;
  }
  if (P.has("dump_matrices")) {
    const std::filesystem::path dir = P.str("dump_matrices", "");
    for (int k : ks)
      dump_operators(dir / ("k" + std::to_string(k)), build_operators(recurrence_for_weight(nu, k)));
  }
  return rep;
}

ExperimentReport run_hermite(const ExperimentSpec&, const Params& P) {
  std::vector<int> ms = P.ints("m_values", {});
  if (ms.empty())
    for (int m = 1; m <= 12; ++m) ms.push_back(m);
  const int j_max = P.integer("j_max", 200);
  ExperimentReport rep;
  rep.columns = MomentGapTable{}.csv_columns();
  json per_m = json::array();
  std::vector<AlphaBetaCheck> checks;
  for (int m : ms) {
    const MomentGapTable t = moment_gap_table(m, j_max);
    for (auto& row : t.csv_rows()) rep.add_row(std::move(row));
    const auto c = alpha_beta_checks(m, m, j_max).front();
    checks.push_back(c);
    per_m.push_back({{"m", m},
                     {"alpha_m", c.alpha},
                     {"beta_m", c.beta},
                     {"alpha_lower", c.alpha_lower},
                     {"alpha_upper", c.alpha_upper},
                     {"beta_ge_2m_alpha", c.beta_ok},
                     {"alpha_bounds_hold", c.alpha_ok},
                     {"log_remainder_bound", t.log_remainder_bound}});
  }
  rep.metadata["bounds"] = per_m;
  rep.metadata["smallest_valid_m"] = smallest_valid_m(checks);
  return rep;
}

ExperimentReport run_lowerbound(const ExperimentSpec& spec, const Params& P) {
  const auto r = P.ints("m_range", {2, 10});
  return lowerbound_ratio_sweep(r[0], r[1], spec.integration());
}

ExperimentReport run_moment(const ExperimentSpec& spec, const Params& P) {
  const double p = P.num("p", 2.0);
  ExperimentReport rep = moment_family_sweep(p, P.list("b_values", {4, 6, 8, 10, 12}), spec.integration());
  if (P.has("rho_values") || P.has("demo_b")) {
    const ExperimentReport demo = regularization_necessity_demo(
        p, P.num("demo_b", 8.0), P.list("rho_values", {1e-300, 1e-8, 1e-4, 1e-2}), spec.integration());
    rep.metadata["regularization"] = {{"columns", demo.columns},
                                      {"rows", demo.rows},
                                      {"summary", demo.metadata}};
  }
  return rep;
}

ExperimentReport run_npmle(const ExperimentSpec& spec, const Params& P) {
  const NpmleAlgorithm algorithm = parse_npmle_algorithm(P.str("algorithm", "cnm"));
  const int grid_size = P.integer("grid_size", 400);
  ExperimentReport rep;
  if (P.has("data")) {
    std::vector<double> y = read_observations(P.str("data", ""));
    NpmleProblem problem;
    if (P.flag("constrained", false)) {
      problem = NpmleProblem::constrained(std::move(y), P.num("mprime", 1.0), grid_size);
    } else {
      const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
      const double gmin = P.num("grid_min", *lo);
      const double gmax = P.num("grid_max", *hi);
      problem.grid = NpmleProblem::uniform_grid(gmin, gmax, grid_size);
      problem.observations = std::move(y);
    }
    problem.tol = P.num("tol", problem.tol);
    problem.max_iters = P.integer("max_iters", problem.max_iters);
    problem.algorithm = algorithm;
    const NpmleSolution sol = solve_npmle(problem);
    rep.columns = {"atom", "weight"};
    for (std::size_t i = 0; i < sol.prior.size(); ++i)
      rep.add_row({sol.prior.atoms()[i], sol.prior.weights()[i]});
    rep.metadata["solution"] = {{"prior", sol.prior.to_json()},
                                {"loglik", sol.loglik},
                                {"gradient_cert", sol.gradient_cert},
                                {"iterations", sol.iterations},
                                {"converged", sol.converged},
                                {"n", problem.observations.size()}};
    return rep;
  }

  const DiscretePrior trueG = P.prior("true_prior", DiscretePrior({-2.0, 2.0}, {0.5, 0.5}));
  const auto ns = P.ints("n_values", {200, 800, 3200});
  const int reps = P.integer("replicates", 20);
  const bool constrained = P.flag("constrained", false);
  const double mprime = P.num("mprime", trueG.support_radius() + 1.0);
  const std::size_t cells = ns.size() * static_cast<std::size_t>(reps);
  std::vector<EmpiricalRegretRow> rows(cells);
  parallel_for(cells, spec.threads, [&](std::size_t c) {
    const int n = ns[c / reps];
    rows[c] = empirical_regret_experiment(trueG, n, cell_seed(spec.seed, c), constrained, mprime, grid_size,
                                          algorithm);
  });
  rep.columns = {"n", "replicate", "cell", "eps_sq", "regret", "loglik", "cert", "iterations", "atoms"};
  json medians = json::object();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> regrets;
    for (int r = 0; r < reps; ++r) {
      const auto& row = rows[i * reps + r];
      rep.add_row({static_cast<double>(row.n), static_cast<double>(r), static_cast<double>(i * reps + r),
                   row.eps_sq, row.regret, row.loglik, row.cert, static_cast<double>(row.iterations),
                   static_cast<double>(row.atoms)});
      regrets.push_back(row.regret);
    }
    std::sort(regrets.begin(), regrets.end());
    const std::size_t h = regrets.size() / 2;
    medians[std::to_string(ns[i])] =
        regrets.size() % 2 ? regrets[h] : 0.5 * (regrets[h - 1] + regrets[h]);
  }
  rep.metadata["median_regret"] = medians;
  rep.metadata["true_prior"] = trueG.to_json();
  return rep;
}

ExperimentReport run_regratio(const ExperimentSpec& spec, const Params& P) {
  return regratio_sweep(P.p, spec.seed, spec.threads, spec.integration());
}

}  // namespace

UnknownExperiment::UnknownExperiment(const std::string& name)
    : std::invalid_argument("UnknownExperiment: '" + name + "'") {}

InvalidParameter::InvalidParameter(const std::string& experiment, const std::string& parameter,
                                   const std::string& reason)
    : std::invalid_argument("InvalidParameter: " + experiment + "." + parameter + ": " + reason) {}

IntegrationSpec ExperimentSpec::integration() const {
  IntegrationSpec s;
  s.abs_tol = tol_abs;
  s.rel_tol = tol_rel;
  return s;
}

nlohmann::json ExperimentSpec::to_json() const {
  return {{"name", name},           {"parameters", parameters}, {"seed", seed},
          {"output", output_path},  {"threads", threads},       {"tol_abs", tol_abs},
          {"tol_rel", tol_rel}};
}

void ExperimentSpec::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("name")) name = j.at("name").get<std::string>();
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) output_path = j.at("output").get<std::string>();
  if (j.contains("threads")) threads = j.at("threads").get<int>();
  if (j.contains("tol_abs")) tol_abs = j.at("tol_abs").get<double>();
  if (j.contains("tol_rel")) tol_rel = j.at("tol_rel").get<double>();
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_object()) throw std::invalid_argument("config: parameters must be an object");
    for (const auto& [k, v] : j.at("parameters").items()) parameters[k] = v;
  }
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"metrics", "bernstein", "hermite", "lowerbound",
                                              "moment",  "npmle",     "regratio"};
  return names;
}

void validate(const ExperimentSpec& spec) {
  const auto it = schemas().find(spec.name);
  if (it == schemas().end()) throw UnknownExperiment(spec.name);
  if (!spec.parameters.is_object()) throw InvalidParameter(spec.name, "parameters", "must be an object");
  for (const auto& [key, value] : spec.parameters.items()) {
    const auto k = it->second.find(key);
    if (k == it->second.end()) throw InvalidParameter(spec.name, key, "unknown parameter");
    if (!kind_matches(k->second, value)) throw InvalidParameter(spec.name, key, "wrong type");
  }
  if (spec.threads < 1) throw InvalidParameter(spec.name, "threads", "must be at least 1");
  if (!(spec.tol_abs > 0.0)) throw InvalidParameter(spec.name, "tol_abs", "must be positive");
  if (!(spec.tol_rel > 0.0)) throw InvalidParameter(spec.name, "tol_rel", "must be positive");
  check_values(spec.name, Params{spec.parameters});
}

ExperimentReport run(const ExperimentSpec& spec) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();
  const Params P{spec.parameters};
  ExperimentReport rep;
  if (spec.name == "metrics") rep = run_metrics(spec, P);
  else if (spec.name == "bernstein") rep = run_bernstein(spec, P);
  else if (spec.name == "hermite") rep = run_hermite(spec, P);
  else if (spec.name == "lowerbound") rep = run_lowerbound(spec, P);
  else if (spec.name == "moment") rep = run_moment(spec, P);
  else if (spec.name == "npmle") rep = run_npmle(spec, P);
  else rep = run_regratio(spec, P);
  rep.name = spec.name;
  rep.metadata["spec"] = spec.to_json();
  rep.metadata["tool_version"] = kToolVersion;
  rep.metadata["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

ExperimentReport run_and_write(const ExperimentSpec& spec) {
  ExperimentReport rep = run(spec);
  if (!spec.output_path.empty()) rep.write(spec.output_path);
  return rep;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

DiscretePrior random_compact_prior(Xoshiro256& rng, int atoms, double M) {
  if (atoms < 1) throw std::invalid_argument("random_compact_prior: need at least one atom");
  std::set<double> seen;
  std::vector<double> a;
  std::vector<double> w;
  while (static_cast<int>(a.size()) < atoms) {
    const double u = M * (2.0 * rng.uniform() - 1.0);
    if (!seen.insert(u).second) continue;
    a.push_back(u);
    w.push_back(0.05 + rng.uniform());
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return DiscretePrior::merged(std::move(a), std::move(w));
}

ExperimentReport regratio_sweep(const nlohmann::json& family, std::uint64_t seed, int threads,
                                const IntegrationSpec& integration) {
  const Params P{family};
  const std::string generator = P.str("generator", "two_point");
  const int count = P.integer("count", 100);
  const double M = P.num("M", 1.0);
  const double alpha = P.num("alpha", 2.0);
  const double sigma = P.num("sigma", 1.0);
  const int atoms = generator == "two_point" ? 2 : P.integer("atoms", 4);
  // Every prior on [-L, L] with L = σ (log 2)^{1/α} has E exp((|U|/σ)^α) ≤ 2.
  const double radius = generator == "g_alpha" ? sigma * std::pow(std::log(2.0), 1.0 / alpha) : M;

  struct Cell {
    bool used = false;
    double eps_sq = 0, delta = 0, Delta = 0, regret = 0, ratio = 0;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(count));
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    Xoshiro256 rng(cell_seed(seed, i));
    const DiscretePrior g = random_compact_prior(rng, atoms, radius);
    const DiscretePrior h = random_compact_prior(rng, atoms, radius);
    const MarginalModel G(g);
    const MarginalModel H(h);
    const DirectPair pair(G, H);
    Cell c;
    c.eps_sq = hellinger_sq(pair, integration);
    if (!(c.eps_sq > 0.0)) return;
    c.used = true;
    c.delta = delta_stat(pair, integration);
    c.Delta = Delta_stat(pair, integration);
    c.regret = regret(pair, integration);
    c.ratio = regret_hellinger_ratio(c.regret, c.eps_sq);
    cells[i] = c;
  });
  ExperimentReport rep;
  rep.name = "regratio";
  rep.columns = {"index", "eps_sq", "delta", "Delta", "regret", "ratio"};
  double max_ratio = 0.0;
  int excluded = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    if (!c.used) {
      ++excluded;
      continue;
    }
    rep.add_row({static_cast<double>(i), c.eps_sq, c.delta, c.Delta, c.regret, c.ratio});
    if (std::isfinite(c.ratio)) max_ratio = std::max(max_ratio, c.ratio);
  }
  rep.metadata["max_ratio"] = max_ratio;
  rep.metadata["excluded_pairs"] = excluded;
  rep.metadata["family"] = family;
  return rep;
}

}  // namespace eblab
