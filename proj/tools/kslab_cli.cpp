// kslab: thresholds, simulations, sweeps and decay fits from the command line.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/io.hpp"
#include "kslab/scenario.hpp"
#include "kslab/sweep.hpp"
#include "kslab/thresholds.hpp"

namespace {

using namespace kslab;

int cmd_thresholds(const std::string& path, bool convex) {
  const ExperimentConfig cfg = load_config(path);
  const ThresholdReport r = report(cfg.params, convex || cfg.convex);
  for (const auto& [k, v] : describe(r)) std::cout << k << ": " << v << '\n';
  return kExitPass;
}

int cmd_simulate(const std::string& path, const std::string& output) {
  ExperimentConfig cfg = load_config(path);
  if (!output.empty()) cfg.output_dir = output;
  const ScenarioResult r = run_scenario(cfg);
  for (const auto& [k, v] : r.report) std::cout << k << ": " << v << '\n';
  if (!r.message.empty()) std::cerr << "kslab: " << r.message << '\n';
  return r.exit_code;
}

int cmd_sweep(const std::string& path, const std::string& axis, const std::string& values,
              const std::string& output) {
  ExperimentConfig cfg = load_config(path);
  if (!output.empty()) cfg.output_dir = output;
  SweepSpec spec;
  spec.axis = axis;
  spec.base = cfg;
  std::stringstream ss(values);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      spec.values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError("cannot parse sweep value '" + item + "'");
    }
  }
  const auto rows = run_sweep(spec);
  std::cout << axis << "\texit\toutcome\tsup_linf_u\tmu>mu0\n";
  for (const auto& r : rows) {
    std::cout << format_double(r.value) << '\t' << r.exit_code << '\t' << r.outcome << '\t'
              << format_double(r.sup_linf_u) << '\t' << (r.mu_exceeds_mu0 ? "yes" : "no") << '\n';
  }
  std::cout << "summary: " << cfg.output_dir << "/summary.csv\n";
  return kExitPass;
}

int cmd_fit(const std::string& csv, const std::string& column, const std::string& window) {
  auto read = [&](const std::string& name) {
    std::ifstream in(csv);
    if (!in) throw InputError("cannot open '" + csv + "'");
    return read_csv_column(in, name);
  };
  const auto t = read("t");
  const auto y = read(column);
  std::optional<std::pair<double, double>> w;
  if (!window.empty()) {
    const auto comma = window.find(',');
    if (comma == std::string::npos) throw InputError("--window expects A,B");
    try {
      w = std::pair{std::stod(window.substr(0, comma)), std::stod(window.substr(comma + 1))};
    } catch (const std::logic_error&) {
      throw InputError("--window expects two numbers A,B");
    }
  }
  const DecayFit fit = fit_decay(t, y, w);
  std::cout << "model: " << to_string(fit.model) << '\n'
            << "rate: " << format_double(fit.rate) << '\n'
            << "goodness: " << format_double(fit.goodness) << '\n'
            << "window: " << format_double(fit.window.first) << ','
            << format_double(fit.window.second) << '\n'
            << "samples: " << fit.samples << '\n'
            << "exponential_rate: " << format_double(-fit.exponential.slope) << '\n'
            << "exponential_r2: " << format_double(fit.exponential.r_squared) << '\n'
            << "algebraic_rate: " << format_double(-fit.algebraic.slope) << '\n'
            << "algebraic_r2: " << format_double(fit.algebraic.r_squared) << '\n';
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keller-Segel logistic damping laboratory"};
  app.set_version_flag("--version", std::string("kslab ") + KSLAB_VERSION);
  app.require_subcommand(1);

  std::string config, output, axis, values, csv, column, window;
  bool convex = false;

  auto* thr = app.add_subcommand("thresholds", "print mu0, mu1, gamma and flags for a config");
  thr->add_option("--config", config, "config file")->required();
  thr->add_flag("--convex", convex, "assume a convex domain");

  auto* sim = app.add_subcommand("simulate", "run the configured scenario");
  sim->add_option("--config", config, "config file")->required();
  sim->add_option("--output", output, "override [scenario] output_dir");

  auto* swp = app.add_subcommand("sweep", "run the scenario over a list of parameter values");
  swp->add_option("--config", config, "config file")->required();
  swp->add_option("--axis", axis, "parameter name (d1, d2, chi, alpha, beta, kappa, mu, a, n)")
      ->required();
  swp->add_option("--values", values, "comma-separated values")->required();
  swp->add_option("--output", output, "override [scenario] output_dir");

  auto* fit = app.add_subcommand("fit", "fit exponential and algebraic decay to a CSV column");
  fit->add_option("--csv", csv, "diagnostics CSV")->required();
  fit->add_option("--column", column, "column name, e.g. Linf_u")->required();
  fit->add_option("--window", window, "time window A,B (default: last half)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*thr) return cmd_thresholds(config, convex);
    if (*sim) return cmd_simulate(config, output);
    if (*swp) return cmd_sweep(config, axis, values, output);
    if (*fit) return cmd_fit(csv, column, window);
  } catch (const InputError& e) {
    std::cerr << "kslab: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "kslab: " << e.what() << '\n';
    return kExitAuditFail;
  }
  return kExitConfig;
}
