#include "kslab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "kslab/error.hpp"
#include "kslab/io.hpp"

namespace kslab {

unsigned sweep_workers() {
  if (const char* env = std::getenv("KSLAB_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::optional<unsigned> workers) {
  if (spec.values.empty()) throw InputError("sweep needs at least one value");
  for (double v : spec.values) {
    Parameters q = spec.base.params;
    set_parameter(q, spec.axis, v);
    validate(q);
  }
  ExperimentConfig base = spec.base;
  if (base.scenario == ScenarioKind::SmallDiffusionSweep) base.scenario = ScenarioKind::Boundedness;

  std::vector<SweepRow> rows(spec.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      ExperimentConfig cfg = base;
      set_parameter(cfg.params, spec.axis, spec.values[i]);
      char dir[32];
      std::snprintf(dir, sizeof dir, "/point_%03zu", i);
      cfg.output_dir = base.output_dir + dir;
      const ScenarioResult r = run_scenario(cfg);
      SweepRow& row = rows[i];
      row.value = spec.values[i];
      row.exit_code = r.exit_code;
      row.outcome = r.outcome ? to_string(*r.outcome) : "config-error";
      row.sup_linf_u = r.sup_linf_u;
      row.mu0 = r.mu0;
      row.mu_exceeds_mu0 = r.mu_exceeds_mu0;
      if (r.linf_fit) {
        row.fit_model = to_string(r.linf_fit->model);
        row.fit_rate = r.linf_fit->rate;
      }
      row.error = r.message;
      row.directory = cfg.output_dir;
    }
  };
  const unsigned n = std::min<std::size_t>(workers.value_or(sweep_workers()), rows.size());
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::filesystem::create_directories(base.output_dir);
  std::ofstream csv(base.output_dir + "/summary.csv");
  csv << spec.axis << ",exit_code,outcome,sup_linf_u,mu0,mu_exceeds_mu0,fit_model,fit_rate,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    csv << format_double(r.value) << ',' << r.exit_code << ',' << r.outcome << ','
        << format_double(r.sup_linf_u) << ',' << format_double(r.mu0) << ','
        << (r.mu_exceeds_mu0 ? "true" : "false") << ',' << r.fit_model << ','
        << (r.fit_rate ? format_double(*r.fit_rate) : "") << ',' << err << '\n';
  }
  return rows;
}

}  // namespace kslab
