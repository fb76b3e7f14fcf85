#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fluctus/fluctus.hpp"

namespace {

using namespace fluctus;

struct Options {
  std::string config;
  std::string model;
  std::string pert;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : parse_config(read_json_file(o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw InputError("--tol", "must be positive");
    c.tol = *o.tol;
  }
  return c;
}

Model model_for(const Options& o, const RunConfig& c) {
  return o.model.empty() ? toy_model(c.toy) : load_model(o.model);
}

void emit(const json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw InputError(out, "cannot open for writing");
  f << text;
}

int run(const std::string& name, const Options& o) {
  const RunConfig c = load_config(o);
  CommandResult r;
  if (name == "check") {
    r = cmd_check(model_for(o, c), c.tol);
  } else if (name == "fluctuate") {
    std::optional<json> pert;
    if (!o.pert.empty()) pert = read_json_file(o.pert);
    r = cmd_fluctuate(model_for(o, c), pert, c.seed, c.tol);
  } else if (name == "potential-scan") {
    r = cmd_scan(c, o.out.empty() ? std::string(".") : o.out);
    std::cout << r.report.dump(2) << "\n";
    return r.exit_code;
  } else if (name == "minimize") {
    r = cmd_minimize(c);
  } else if (name == "hessian") {
    r = cmd_hessian(c);
  } else if (name == "stabilizer") {
    r = cmd_stabilizer(c);
  } else if (name == "morita-check") {
    r = cmd_morita_check(model_for(o, c).triple, c);
  } else if (name == "semigroup-verify") {
    r = cmd_semigroup_verify(model_for(o, c).triple, c);
  } else {
    r = cmd_export_toy(c.toy);
  }
  emit(r.report, o.out);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inner fluctuations of finite real spectral triples"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "run configuration (JSON)")->envname("FLUCTUS_CONFIG")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "random seed")->envname("FLUCTUS_SEED");
  app.add_option("--tol", o.tol, "tolerance")->envname("FLUCTUS_TOL");
  app.add_option("--out", o.out, "output file, or directory for potential-scan")->envname("FLUCTUS_OUT");

  const std::pair<const char*, const char*> commands[] = {
      {"check", "axiom checks against the model's declared expectations"},
      {"fluctuate", "fluctuated Dirac operator for a perturbation"},
      {"potential-scan", "potential grids as fig1.csv and fig2.csv"},
      {"minimize", "critical points of the toy potential"},
      {"hessian", "Hessian at the constrained critical point"},
      {"stabilizer", "unbroken symmetry dimensions along the breaking chain"},
      {"morita-check", "Morita twisting identities on random idempotents"},
      {"semigroup-verify", "perturbation semigroup identities on random samples"},
      {"export-toy", "write the built-in toy model as JSON"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    const std::string n = name;
    if (n == "check" || n == "fluctuate" || n == "morita-check" || n == "semigroup-verify") {
      sub->add_option("--model", o.model, "model file (JSON); the built-in toy model if omitted")
          ->envname("FLUCTUS_MODEL")
          ->check(CLI::ExistingFile);
    }
    if (n == "fluctuate") sub->add_option("--pert", o.pert, "perturbation file (JSON)")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
