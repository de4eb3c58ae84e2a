#include "uosl/app.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uosl/verify.hpp"

namespace uosl::app {
namespace fs = std::filesystem;
namespace {

struct CommonArgs {
  std::string scenario;
  std::string out;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool scenario_required, bool out_required) {
  auto* s = cmd->add_option("--scenario", a.scenario, "scenario file");
  if (scenario_required) s->required();
  auto* o = cmd->add_option("--out", a.out, "output directory");
  if (out_required) o->required();
  cmd->add_option("--set", a.sets, "override, key=value (repeatable)")->take_all();
  cmd->add_option("--seed", a.seed, "seed for randomised checks");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  f << text;
}

std::string describe(const sim::Failure& f) {
  return fmt::format("failed at t={:.4f} s: {}", f.time, f.message);
}

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : ""; }

int cmd_simulate(const CommonArgs& a, std::ostream& out, std::ostream& err) {
  const auto file = io::load_scenario(a.scenario, a.sets);
  const RunResult r = run_to_directory(file, a.out, a.seed);
  if (!r.outcome.ok()) {
    err << "simulate: " << file.scenario.name << " " << describe(*r.outcome.failure) << '\n';
    return 1;
  }
  out << fmt::format("simulate: {} completed, {} samples -> {}\n", file.scenario.name,
                     r.report.samples, a.out);
  return 0;
}

int cmd_verify(const CommonArgs& a, bool corrupt, std::ostream& out) {
  const auto file = a.scenario.empty() ? io::parse_scenario("", a.sets)
                                       : io::load_scenario(a.scenario, a.sets);
  verify::Options opts;
  opts.seed = a.seed;
  opts.corrupt_gravity = corrupt;
  const auto results = verify::run_suite(file.scenario.params, file.scenario.gains, opts);
  const bool ok = verify::report(results, out);
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : results) {
      j.push_back({{"name", p.name}, {"passed", p.passed}, {"skipped", p.skipped},
                   {"measured", p.measured}, {"tolerance", p.tolerance}, {"detail", p.detail}});
    }
    write_text(fs::path(a.out) / "verify.json", j.dump(2) + "\n");
  }
  out << (ok ? "verify: all properties pass\n" : "verify: property failure\n");
  return ok ? 0 : 1;
}

struct SweepRow {
  std::string value;
  std::optional<RunResult> result;
  std::string error;
};

int cmd_sweep(const CommonArgs& a, const std::string& param, const std::vector<std::string>& values,
              unsigned workers, std::ostream& out, std::ostream& err) {
  if (values.empty()) {
    err << "sweep: empty value list\n";
    return 2;
  }
  // fail fast on a bad key or base file before launching anything
  io::check_key(param);
  io::load_scenario(a.scenario, a.sets);
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      rows[i].value = values[i];
      try {
        auto sets = a.sets;
        sets.push_back(param + "=" + values[i]);
        const auto file = io::load_scenario(a.scenario, sets);
        rows[i].result = run_to_directory(file, fs::path(a.out) / fmt::format("run_{:03d}", i), a.seed);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  static const char* channels[] = {"vx_p", "vy_p", "vz_p", "phi", "theta", "psi", "alpha", "beta"};
  std::string csv =
      "index,param,value,completed,failure_time,failure_stage,settling_time,overshoot_percent,"
      "swing_recovery_time,tension_mean,tension_std,thrust_saturation_rate,energy_drift";
  for (const char* c : channels) csv += fmt::format(",rmse_{}", c);
  csv += '\n';
  int failures = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.result) {
      ++failures;
      err << fmt::format("sweep: {}={} configuration error: {}\n", param, row.value, row.error);
      csv += fmt::format("{},{},{},0,,config,,,,,,,", i, param, row.value);
      for (std::size_t c = 0; c < std::size(channels); ++c) csv += ',';
      csv += '\n';
      continue;
    }
    const auto& rep = row.result->report;
    const auto& fail = row.result->outcome.failure;
    if (fail) {
      ++failures;
      err << fmt::format("sweep: {}={} {}\n", param, row.value, describe(*fail));
    }
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", i, param, row.value,
                       fail ? 0 : 1, fail ? fmt::format("{}", fail->time) : "",
                       fail && fail->stage ? std::string(control::stage_name(*fail->stage)) : "",
                       opt(rep.settling_time), opt(rep.overshoot_percent),
                       opt(rep.swing_recovery_time), rep.tension_mean, rep.tension_std,
                       rep.thrust_saturation_rate, rep.energy_drift);
    for (const char* c : channels) {
      const auto it = rep.rmse.find(c);
      csv += it == rep.rmse.end() ? "," : fmt::format(",{}", it->second);
    }
    csv += '\n';
  }
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "summary.csv", csv);
  out << fmt::format("sweep: {} runs, {} failed -> {}\n", rows.size(), failures,
                     (fs::path(a.out) / "summary.csv").string());
  return failures == 0 ? 0 : 1;
}

}  // namespace

RunResult run(const io::ScenarioFile& file) {
  RunResult r;
  r.outcome = sim::run_scenario(file.scenario);
  r.report = analysis::compute_report(r.outcome.log, file.scenario.params, file.report);
  r.report.completed = r.outcome.ok();
  if (r.outcome.failure) {
    r.report.failure = r.outcome.failure->message;
  }
  return r;
}

RunResult run_to_directory(const io::ScenarioFile& file, const fs::path& dir, std::uint64_t seed) {
  RunResult r = run(file);
  fs::create_directories(dir);
  write_text(dir / "trajectory.csv", io::trajectory_csv(r.outcome.log));
  const io::RunInfo info{file.scenario.name, seed, r.outcome.failure};
  write_text(dir / "metrics.json", io::metrics_json(r.report, info).dump(2) + "\n");
  return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Quadrotor with off-centre slung load: simulation and controller testbench", "uosl"};
  cli.require_subcommand(1);

  CommonArgs sim_args, verify_args, sweep_args;
  auto* simulate = cli.add_subcommand("simulate", "run a scenario, write trajectory.csv and metrics.json");
  add_common(simulate, sim_args, true, true);

  auto* verify = cli.add_subcommand("verify", "check the model and controller against oracles");
  add_common(verify, verify_args, false, false);
  bool corrupt = false;
  verify->add_flag("--corrupt-gravity", corrupt,
                   "negative control: flip the sign of G in the model under test");

  auto* sweep = cli.add_subcommand("sweep", "run a scenario once per parameter value");
  add_common(sweep, sweep_args, true, true);
  std::string param;
  std::vector<std::string> values;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--param", param, "dotted key to vary, e.g. params.suspension_offset[0]")
      ->required();
  sweep->add_option("--values", values, "values, comma separated")->delimiter(',');
  sweep->add_option("--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    cli.exit(e, out, err);
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args, out, err);
    if (*verify) return cmd_verify(verify_args, corrupt, out);
    if (*sweep) return cmd_sweep(sweep_args, param, values, workers, out, err);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace uosl::app
