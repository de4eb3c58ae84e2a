#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "uosl/app.hpp"

using namespace uosl;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = UOSL_SCENARIO_DIR;

struct Cli {
  int code = 0;
  std::string out;
  std::string err;
};

Cli cli(std::vector<std::string> args) {
  args.insert(args.begin(), "uosl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Cli r;
  r.code = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uosl_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  REQUIRE(it != header.end());
  return static_cast<std::size_t>(it - header.begin());
}

std::string write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  std::ofstream(dir / name) << text;
  return (dir / name).string();
}

}  // namespace

TEST_CASE("scenario parsing") {
  const auto f = io::parse_scenario(
      "# comment line\n"
      "name = demo   # trailing comment\n"
      "mode = attitude\n"
      "duration = 2\n"
      "initial.attitude = [10, -20, 0]\n"
      "initial.swing_rate = [90, 0]\n"
      "params.load_mass = 0.1\n"
      "setpoint.0.attitude = [0, 30, 0]\n"
      "setpoint.1.start = 1\n"
      "setpoint.1.load_velocity = [0, 1.5, 0]\n"
      "disturbance.0.time = 1.5\n"
      "disturbance.0.swing_rate = [28.64788975654116, 0]\n");
  const auto& sc = f.scenario;
  CHECK(sc.name == "demo");
  CHECK(sc.mode == sim::ControlMode::attitude);
  CHECK(sc.duration == 2.0);
  CHECK(sc.initial.q[3] == doctest::Approx(deg2rad(10)));
  CHECK(sc.initial.q[4] == doctest::Approx(deg2rad(-20)));
  CHECK(sc.initial.qdot[6] == doctest::Approx(kHalfPi));
  CHECK(sc.params.load_mass == 0.1);
  REQUIRE(sc.schedule.size() == 2);
  CHECK(sc.schedule[0].attitude.attitude.theta == doctest::Approx(deg2rad(30)));
  CHECK(sc.schedule[0].attitude.thrust == doctest::Approx(-(1.32 + 0.1) * 9.81));
  CHECK(sc.schedule[1].cascade.load_velocity == Vec3(0, 1.5, 0));
  REQUIRE(sc.disturbances.size() == 1);
  CHECK(sc.disturbances[0].swing_rate.x() == doctest::Approx(0.5));
  // analysis defaults follow the schedule
  CHECK(*f.report.step_time == 1.0);
  CHECK(f.report.step_end == 1.5);
  CHECK(*f.report.kick_time == 1.5);
  CHECK(f.report.window.end == 2.0);
}

TEST_CASE("scenario defaults and overrides") {
  const auto d = io::parse_scenario("");
  CHECK(d.scenario.params.uav_mass == 1.32);
  CHECK(d.scenario.gains.load_velocity == Vec3(1.4, 1.4, 4.0));
  CHECK(d.scenario.schedule.size() == 1);

  const auto o = io::parse_scenario("params.suspension_offset = [-0.12, 0, -0.05]\n",
                                    {"params.suspension_offset[0]=-0.18", "gains.swing=[2, 2]",
                                     "setpoint.0.yaw=90"});
  CHECK(o.scenario.params.suspension_offset == Vec3(-0.18, 0, -0.05));
  CHECK(o.scenario.gains.swing == Vec2(2, 2));
  CHECK(o.scenario.schedule[0].cascade.yaw == doctest::Approx(kHalfPi));

  for (const auto& bad : {"nope=1", "params.load_mass", "params.uav_inertia[3]=1",
                          "params.uav_inertia=2", "duration=abc"}) {
    try {
      io::parse_scenario("", {bad});
      FAIL("accepted " << bad);
    } catch (const io::ParseError& e) {
      CHECK(e.line() == 0);
      CHECK(std::string(e.what()).rfind("override: ", 0) == 0);
    }
  }
  const auto keys = io::known_keys();
  CHECK(std::find(keys.begin(), keys.end(), "params.thrust_limit") != keys.end());
}

TEST_CASE("parse diagnostics carry line numbers") {
  struct Case {
    const char* text;
    int line;
    const char* fragment;
  };
  const Case cases[] = {
      {"duration = 1\nbogus line\n", 2, "expected 'key = value'"},
      {"duration = 1\n\n# x\nunknown.key = 3\n", 4, "unknown key"},
      {"duration = 1\nduration = 2\n", 2, "duplicate key"},
      {"params.uav_inertia = [1, 2]\n", 1, "vector of 3"},
      {"initial.position = [1, 2, 3\n", 1, "unterminated"},
      {"mode = hover\n", 1, "mode must be"},
      {"dt = 1e-3\nduration = x1\n", 2, "expects a number"},
      {"setpoint.a.start = 1\n", 1, "setpoint.<index>"},
  };
  for (const auto& c : cases) {
    try {
      io::parse_scenario(c.text);
      FAIL("accepted: " << c.text);
    } catch (const io::ParseError& e) {
      CHECK(e.line() == c.line);
      CHECK(std::string(e.what()).find("line " + std::to_string(c.line) + ": ") == 0);
      CHECK(std::string(e.what()).find(c.fragment) != std::string::npos);
    }
  }
  // consistent lines, inconsistent scenario
  try {
    io::parse_scenario("dt = 0.001\ncontrol_rate = 300\n");
    FAIL("accepted an invalid control rate");
  } catch (const io::ParseError& e) {
    CHECK(e.line() == -1);
  }
}

TEST_CASE("bundled scenarios parse") {
  for (const char* name : {"hover", "attitude_step", "velocity_step", "velocity_step_scaled"}) {
    CAPTURE(name);
    CHECK_NOTHROW(io::load_scenario(kScenarios + "/" + name + ".scn"));
  }
  const auto v = io::load_scenario(kScenarios + "/velocity_step.scn");
  CHECK(v.scenario.params.suspension_offset == Vec3(-0.12, 0, -0.05));
  CHECK(v.scenario.gains.load_velocity == Vec3(1.4, 1.4, 4.0));
  CHECK(v.scenario.disturbances.at(0).swing_rate.x() == doctest::Approx(0.5));
}

TEST_CASE("metrics json round trip") {
  analysis::MetricReport r;
  r.rmse = {{"vx_p", 0.125}, {"alpha", 1.0 / 3.0}};
  r.step_channel = "vy_p";
  r.settling_time = 3.0813634199658;
  r.overshoot_percent = 19.4;
  r.attitude_decay = analysis::DecayFit{10.4, -0.1, 1e-3};
  r.swing_recovery_time = std::nullopt;
  r.energy_drift = 0.031;
  r.tension_mean = 0.64746;
  r.tension_std = 1e-7;
  r.thrust_saturation_rate = 0.25;
  r.samples = 6001;
  r.duration = 12.0;
  r.completed = false;
  r.failure = "controller: boom";
  const io::RunInfo info{"demo", 42, sim::Failure{0.514, "controller: boom", control::Stage::mixer}};
  const auto j = io::metrics_json(r, info);
  CHECK(j["schema"] == io::kMetricsSchema);
  CHECK(j["failure"]["stage"] == "mixer");
  const auto text = j.dump(2);
  const auto back = io::report_from_json(nlohmann::json::parse(text));
  CHECK(back.rmse == r.rmse);
  CHECK(back.step_channel == r.step_channel);
  CHECK(back.settling_time == r.settling_time);
  CHECK(back.overshoot_percent == r.overshoot_percent);
  REQUIRE(back.attitude_decay);
  CHECK(back.attitude_decay->rate == 10.4);
  CHECK_FALSE(back.swing_decay);
  CHECK_FALSE(back.swing_recovery_time);
  CHECK(back.energy_drift == r.energy_drift);
  CHECK(back.tension_mean == r.tension_mean);
  CHECK(back.tension_std == r.tension_std);
  CHECK(back.thrust_saturation_rate == r.thrust_saturation_rate);
  CHECK(back.samples == r.samples);
  CHECK(back.completed == r.completed);
  CHECK(back.failure == r.failure);
  CHECK(io::metrics_json(back, info).dump(2) == text);

  nlohmann::json wrong = j;
  wrong["schema"] = "something/else";
  CHECK_THROWS_AS(io::report_from_json(wrong), std::invalid_argument);
}

TEST_CASE("simulate: bundled hover") {
  const auto dir = scratch("hover");
  const auto r = cli({"simulate", "--scenario", kScenarios + "/hover.scn", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "metrics.json"));
  CHECK(m["completed"] == true);
  CHECK(m["tension_mean"].get<double>() == doctest::Approx(0.6472).epsilon(0.01));
  const auto rows = read_csv(dir / "trajectory.csv");
  REQUIRE(rows.size() == 2502);
  CHECK(rows[0] == io::csv_columns());
  CHECK(rows[0][0] == "t");
  CHECK(rows[0][1] == "q0");
  CHECK(rows[0][9] == "qd0");
  for (const auto& row : rows) CHECK(row.size() == rows[0].size());
  // NED: the vehicle hovers at negative z
  CHECK(std::stod(rows[1][column(rows[0], "q2")]) == -5.0);
  CHECK(std::stod(rows[1][column(rows[0], "F_l")]) < 0.0);
}

TEST_CASE("simulate: zero duration gives one data row") {
  const auto dir = scratch("zero");
  const auto r = cli({"simulate", "--scenario", kScenarios + "/hover.scn", "--out", dir.string(),
                      "--set", "duration=0"});
  CHECK(r.code == 0);
  CHECK(read_csv(dir / "trajectory.csv").size() == 2);
}

TEST_CASE("simulate: malformed file exits 2 with a line number") {
  const auto dir = scratch("malformed");
  const auto path = write_file(dir, "bad.scn", "name = x\nduration = 1\nparams.gravity = [1, 2]\n");
  const auto r = cli({"simulate", "--scenario", path, "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "trajectory.csv"));

  CHECK(cli({"simulate", "--scenario", (dir / "missing.scn").string(), "--out", dir.string()}).code == 2);
  CHECK(cli({"simulate", "--out", dir.string()}).code == 2);
  CHECK(cli({"simulate", "--scenario", path, "--out", dir.string(), "--set", "x"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("simulate: a controller failure exits 1 and keeps the partial log") {
  const auto dir = scratch("fail");
  const auto r = cli({"simulate", "--scenario", kScenarios + "/velocity_step.scn", "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("controller: ") != std::string::npos);
  const auto m = nlohmann::json::parse(slurp(dir / "metrics.json"));
  CHECK(m["completed"] == false);
  CHECK(m["failure"]["stage"].is_string());
  CHECK(read_csv(dir / "trajectory.csv").size() > 2);
}

TEST_CASE("simulate: output is byte-identical across runs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto path = kScenarios + "/velocity_step_scaled.scn";
  const std::vector<std::string> set{"--set", "duration=3", "--seed", "9"};
  auto args = [&](const fs::path& d) {
    std::vector<std::string> v{"simulate", "--scenario", path, "--out", d.string()};
    v.insert(v.end(), set.begin(), set.end());
    return v;
  };
  REQUIRE(cli(args(a)).code == 0);
  REQUIRE(cli(args(b)).code == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "metrics.json") == slurp(b / "metrics.json"));
}

TEST_CASE("verify") {
  const auto ok = cli({"verify", "--seed", "3"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  CHECK(ok.out.find("PASS skew_symmetry") != std::string::npos);

  const auto massless = cli({"verify", "--set", "params.load_mass=0"});
  CHECK(massless.code == 0);
  CHECK(massless.out.find("SKIP reduced_swing_form") != std::string::npos);

  const auto corrupt = cli({"verify", "--corrupt-gravity"});
  CHECK(corrupt.code == 1);
  CHECK(corrupt.out.find("FAIL energy_conservation") != std::string::npos);
  CHECK(corrupt.out.find("FAIL gravity_vs_potential_gradient") != std::string::npos);

  const auto dir = scratch("verify");
  CHECK(cli({"verify", "--out", dir.string()}).code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "verify.json")).size() == 13);
}

TEST_CASE("sweep: suspension offset") {
  const auto dir = scratch("sweep_offset");
  const auto r = cli({"sweep", "--scenario", kScenarios + "/velocity_step_scaled.scn", "--out",
                      dir.string(), "--param", "params.suspension_offset[0]", "--values",
                      "-0.12,-0.18", "--workers", "2"});
  CHECK(r.code == 0);
  const auto rows = read_csv(dir / "summary.csv");
  REQUIRE(rows.size() == 3);
  const auto settle = column(rows[0], "settling_time");
  const auto done = column(rows[0], "completed");
  for (int i = 1; i <= 2; ++i) {
    CHECK(rows[i][done] == "1");
    REQUIRE_FALSE(rows[i][settle].empty());
    CHECK(std::stod(rows[i][settle]) <= 5.0);
    CHECK(fs::exists(dir / ("run_00" + std::to_string(i - 1)) / "metrics.json"));
  }
  CHECK(rows[1][column(rows[0], "value")] == "-0.12");
  CHECK(rows[2][column(rows[0], "value")] == "-0.18");
}

TEST_CASE("sweep: failures are aggregated, not fatal") {
  const auto dir = scratch("sweep_fail");
  const auto r = cli({"sweep", "--scenario", kScenarios + "/hover.scn", "--out", dir.string(),
                      "--param", "params.load_mass", "--values", "0.066,0,-1", "--set", "duration=1"});
  CHECK(r.code == 1);
  const auto rows = read_csv(dir / "summary.csv");
  REQUIRE(rows.size() == 4);
  const auto done = column(rows[0], "completed");
  CHECK(rows[1][done] == "1");
  CHECK(rows[2][done] == "0");
  CHECK(rows[3][done] == "0");
  CHECK(rows[3][column(rows[0], "failure_stage")] == "config");
}

TEST_CASE("sweep: empty value list exits 2") {
  const auto dir = scratch("sweep_empty");
  CHECK(cli({"sweep", "--scenario", kScenarios + "/hover.scn", "--out", dir.string(), "--param",
             "params.thrust_limit"})
            .code == 2);
  CHECK(cli({"sweep", "--scenario", kScenarios + "/hover.scn", "--out", dir.string(), "--param",
             "no.such.key", "--values", "1"})
            .code == 2);
}

TEST_CASE("sweep: lowering the thrust bound raises the saturation rate") {
  const auto dir = scratch("sweep_fup");
  const auto r = cli({"sweep", "--scenario", kScenarios + "/velocity_step_scaled.scn", "--out",
                      dir.string(), "--param", "params.thrust_limit", "--values",
                      "30,16,14.5,14,13.8", "--set", "duration=6"});
  CHECK(r.code == 0);
  const auto rows = read_csv(dir / "summary.csv");
  REQUIRE(rows.size() == 6);
  const auto rate = column(rows[0], "thrust_saturation_rate");
  double prev = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i][rate]);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(std::stod(rows[1][rate]) == 0.0);
  CHECK(prev > 0.0);
}
