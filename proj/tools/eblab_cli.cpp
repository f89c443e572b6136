// eblab_cli: runs one experiment and writes CSV plus a JSON sidecar.

#include "eblab/experiments.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

enum class FlagKind { value, list, flag };

struct FlagDef {
  std::string flag;
  std::string key;
  FlagKind kind;
  std::string help;
};

const std::map<std::string, std::vector<FlagDef>>& flag_table() {
  static const std::map<std::string, std::vector<FlagDef>> t{
      {"metrics",
       {{"--G", "G", FlagKind::value, "prior G as JSON {\"atoms\":[..],\"weights\":[..]}"},
        {"--H", "H", FlagKind::value, "prior H as JSON"},
        {"--rhos", "rhos", FlagKind::list, "regularization levels, comma separated"}}},
      {"bernstein",
       {{"--nu", "nu", FlagKind::value, "prior nu as JSON"},
        {"--M", "M", FlagKind::value, "draw a random nu on [-M, M]"},
        {"--atoms", "atoms", FlagKind::value, "atoms of the random nu"},
        {"--k", "k_values", FlagKind::list, "degrees, comma separated"},
        {"--dump-matrices", "dump_matrices", FlagKind::value, "directory for L, A, B, S, J CSVs"},
        {"--C1", "C1", FlagKind::value, "growth constant for |V'|"},
        {"--C2", "C2", FlagKind::value, "convexity constant for V''"}}},
      {"hermite",
       {{"--m", "m_values", FlagKind::list, "rule sizes, comma separated"},
        {"--j-max", "j_max", FlagKind::value, "largest moment order"}}},
      {"lowerbound", {{"--m-range", "m_range", FlagKind::list, "first,last m"}}},
      {"moment",
       {{"--p", "p", FlagKind::value, "tail exponent"},
        {"--b", "b_values", FlagKind::list, "separations, comma separated"},
        {"--rho", "rho_values", FlagKind::list, "regularization levels for the demo"},
        {"--demo-b", "demo_b", FlagKind::value, "separation used by the demo"}}},
      {"npmle",
       {{"--data", "data", FlagKind::value, "observations, one per line"},
        {"--grid-min", "grid_min", FlagKind::value, "grid lower end"},
        {"--grid-max", "grid_max", FlagKind::value, "grid upper end"},
        {"--grid-size", "grid_size", FlagKind::value, "grid points"},
        {"--tol", "tol", FlagKind::value, "gradient certificate tolerance"},
        {"--max-iters", "max_iters", FlagKind::value, "iteration cap"},
        {"--constrained", "constrained", FlagKind::flag, "restrict the grid to [-M', M']"},
        {"--mprime", "mprime", FlagKind::value, "support bound M'"},
        {"--true-prior", "true_prior", FlagKind::value, "sweep: true prior as JSON"},
        {"--n", "n_values", FlagKind::list, "sweep: sample sizes"},
        {"--replicates", "replicates", FlagKind::value, "sweep: seeds per sample size"},
        {"--algorithm", "algorithm", FlagKind::value, "cnm (default), squarem or em"}}},
      {"regratio",
       {{"--generator", "generator", FlagKind::value, "two_point, k_atom or g_alpha"},
        {"--count", "count", FlagKind::value, "number of pairs"},
        {"--M", "M", FlagKind::value, "support bound"},
        {"--atoms", "atoms", FlagKind::value, "atoms per prior (k_atom, g_alpha)"},
        {"--alpha", "alpha", FlagKind::value, "class exponent"},
        {"--sigma", "sigma", FlagKind::value, "class scale"}}},
  };
  return t;
}

// Numbers, booleans, objects and arrays parse as JSON; anything else is a string.
json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

json parse_list(const std::string& text) {
  if (!text.empty() && text.front() == '[') return parse_value(text);
  json out = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_value(item));
  return out;
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical Bayes regret laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(eblab::kToolVersion));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol_abs;
  std::optional<double> tol_rel;
  std::optional<int> threads;
  std::vector<std::string> params;
  app.add_option("--config", config_path, "JSON experiment spec; flags override its fields")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output CSV path (JSON sidecar alongside); stdout if absent");
  app.add_option("--tol-abs", tol_abs, "absolute integration tolerance");
  app.add_option("--tol-rel", tol_rel, "relative integration tolerance");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--param", params, "extra parameter as key=json (repeatable)");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : eblab::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->fallthrough();
    subs[name] = sub;
    for (const auto& def : flag_table().at(name)) {
      if (def.kind == FlagKind::flag)
        sub->add_flag(def.flag, flags[name][def.key], def.help);
      else
        sub->add_option(def.flag, values[name][def.key], def.help);
    }
  }

  if (argc > 1 && argv[1][0] != '-' && subs.count(argv[1]) == 0)
    return fail("UnknownExperiment", std::string("UnknownExperiment: '") + argv[1] + "'", 2);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("UsageError", e.what(), 2);
  }

  eblab::ExperimentSpec spec;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      spec.merge_json(json::parse(in));
    }
    std::string name;
    for (const auto& [n, sub] : subs)
      if (sub->parsed()) name = n;
    if (!spec.name.empty() && spec.name != name)
      throw std::invalid_argument("config names experiment '" + spec.name + "' but subcommand is '" +
                                  name + "'");
    spec.name = name;
    if (seed) spec.seed = *seed;
    if (out) spec.output_path = *out;
    if (tol_abs) spec.tol_abs = *tol_abs;
    if (tol_rel) spec.tol_rel = *tol_rel;
    if (threads) spec.threads = *threads;
    for (const auto& def : flag_table().at(name)) {
      if (def.kind == FlagKind::flag) {
        if (flags[name][def.key]) spec.parameters[def.key] = true;
      } else if (subs[name]->count(def.flag) > 0) {
        const std::string& v = values[name][def.key];
        spec.parameters[def.key] = def.kind == FlagKind::list ? parse_list(v) : parse_value(v);
      }
    }
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("--param expects key=value, got '" + p + "'");
      spec.parameters[p.substr(0, eq)] = parse_value(p.substr(eq + 1));
    }
  } catch (const std::exception& e) {
    return fail("ConfigError", e.what(), 2);
  }

  try {
    const eblab::ExperimentReport rep = eblab::run_and_write(spec);
    if (spec.output_path.empty()) std::cout << rep.to_csv();
  } catch (const eblab::UnknownExperiment& e) {
    return fail("UnknownExperiment", e.what(), 2);
  } catch (const eblab::InvalidParameter& e) {
    return fail("InvalidParameter", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("RuntimeError", e.what(), 1);
  }
  return 0;
}
