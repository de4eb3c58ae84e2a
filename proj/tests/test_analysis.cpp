#include <doctest.h>

#include <cmath>
#include <vector>

#include "uosl/analysis.hpp"

using namespace uosl;
using namespace uosl::analysis;

namespace {

std::vector<double> grid(double t0, double t1, double dt) {
  std::vector<double> t;
  for (long i = 0; i <= std::lround((t1 - t0) / dt); ++i) t.push_back(t0 + i * dt);
  return t;
}

template <typename F>
std::vector<double> sample(const std::vector<double>& t, F f) {
  std::vector<double> x;
  for (double v : t) x.push_back(f(v));
  return x;
}

}  // namespace

TEST_CASE("rmse") {
  const std::vector<double> a{0.3, -1.0, 2.0};
  CHECK(rmse(a, a) == 0.0);
  CHECK(rmse(std::vector<double>{1, 1}, std::vector<double>{0, 0}) == doctest::Approx(1.0));
  const auto t = grid(0, 2, 1e-3);
  auto sine = sample(t, [](double v) { return 0.7 * std::sin(2 * kPi * v); });
  sine.pop_back();  // exactly two periods
  CHECK(rmse(sine, std::vector<double>(sine.size(), 0.0)) == doctest::Approx(0.7 / std::sqrt(2.0)));
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(rmse(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("settling time") {
  const auto t = grid(0, 6, 1e-3);
  CHECK(settling_time_abs(t, std::vector<double>(t.size(), 2.0), 2.0, 0.1) == 0.0);
  const auto decay = sample(t, [](double v) { return std::exp(-v); });
  const auto st = settling_time_abs(t, decay, 0.0, 0.05);
  REQUIRE(st);
  CHECK(*st == doctest::Approx(std::log(20.0)).epsilon(1e-6));
  CHECK(*st == doctest::Approx(2.996).epsilon(1e-3));

  // measured from the first sample of the window
  const auto late = grid(1, 7, 1e-3);
  CHECK(*settling_time_abs(late, decay, 0.0, 0.05) == doctest::Approx(std::log(20.0)).epsilon(1e-6));

  // relative band
  const auto rise = sample(t, [](double v) { return 1.5 * (1 - std::exp(-2 * v)); });
  CHECK(*settling_time(t, rise, 1.5, 0.1) == doctest::Approx(std::log(10.0) / 2).epsilon(1e-6));

  const auto never = sample(t, [](double v) { return std::sin(v); });
  CHECK_FALSE(settling_time_abs(t, never, 0.0, 0.05).has_value());
  CHECK_THROWS_AS(settling_time(t, rise, 1.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(settling_time(t, rise, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(settling_time_abs(t, rise, 1.5, 0.0), std::invalid_argument);
}

TEST_CASE("overshoot") {
  CHECK(overshoot(std::vector<double>{0, 0.5, 0.9, 1.0}, 0.0, 1.0) == 0.0);
  CHECK(overshoot(std::vector<double>{0, 0.8, 1.16, 1.02}, 0.0, 1.0) == doctest::Approx(16.0));
  CHECK(overshoot(std::vector<double>{0, 0.7, 0.95}, 0.0, 1.0) == 0.0);
  // downward step
  CHECK(overshoot(std::vector<double>{2, 0.5, -0.2, 0.0}, 2.0, 0.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(overshoot(std::vector<double>{1, 1}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("decay rate fit") {
  const auto t = grid(0, 0.5, 1e-3);
  const auto f = decay_rate_fit(t, sample(t, [](double v) { return std::exp(-10.4 * v); }));
  CHECK(f.rate == doctest::Approx(10.4).epsilon(1e-9));
  CHECK(std::abs(f.rate - 10.4) < 1e-6);
  CHECK(f.residual < 1e-10);
  const auto g = decay_rate_fit(t, sample(t, [](double v) { return 2 * std::exp(-6.4 * v); }));
  CHECK(std::abs(g.rate - 6.4) < 1e-6);
  CHECK(g.offset == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(decay_rate_fit(t, std::vector<double>(t.size(), 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(decay_rate_fit(std::vector<double>{0.0}, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("mean and deviation") {
  const auto s = mean_std(std::vector<double>{1, 2, 3, 4});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.stddev == doctest::Approx(std::sqrt(1.25)));
  CHECK_THROWS_AS(mean_std(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("window indices") {
  const std::vector<double> t{0.0, 0.1, 0.2, 0.3};
  const auto r = window_indices(t, {0.1, 0.2});
  CHECK(r.first == 1);
  CHECK(r.last == 3);
  CHECK(window_indices(t, {5.0, 6.0}).empty());
}

TEST_CASE("energy audit") {
  SUBCASE("unforced dragless run conserves energy") {
    Params p;
    sim::TrajectoryLog log;
    GeneralizedState s;
    s.q[6] = deg2rad(15);
    s.qdot[3] = 0.2;
    s.qdot[7] = -0.3;
    for (int i = 0; i <= 10000; ++i) {
      sim::Sample x;
      x.t = i * 1e-4;
      x.state = s;
      log.samples.push_back(x);
      s = sim::integrate_step(s, ControlInput{}, p, 1e-4);
    }
    const auto a = energy_audit(log, p);
    CHECK(a.max_relative_drift < 1e-6);
    CHECK(a.max_work_rate_mismatch < 1e-6);
  }
  SUBCASE("hover keeps the energy constant") {
    sim::Scenario sc;
    sc.initial.q[2] = -5.0;
    sc.duration = 2.0;
    const auto out = sim::run_scenario(sc);
    REQUIRE(out.ok());
    const auto a = energy_audit(out.log, sc.params);
    double worst = 0.0;
    for (double e : a.energy) worst = std::max(worst, std::abs(e - a.energy.front()));
    CHECK(worst < 1e-9);
  }
  SUBCASE("driven run: energy rate follows the logged work rate") {
    sim::Scenario sc;
    sc.initial.q[2] = -5.0;
    sc.duration = 3.0;
    sc.gains.load_velocity = {0.0924, 0.0924, 4.0};
    sc.params.uav_drag = {0.1, 0.1, 0.1};
    sim::SetpointSegment step;
    step.start = 0.5;
    step.cascade.load_velocity = {0, 1.5, 0};
    sc.schedule.push_back(step);
    const auto out = sim::run_scenario(sc);
    REQUIRE(out.ok());
    const auto a = energy_audit(out.log, sc.params);
    CHECK(a.max_relative_drift > 1e-3);  // work was done
    CHECK(a.max_work_rate_mismatch < 1e-5);
  }
}

TEST_CASE("report on a velocity step") {
  sim::Scenario sc;
  sc.initial.q[2] = -5.0;
  sc.duration = 7.0;
  sc.gains.load_velocity = {0.0924, 0.0924, 4.0};
  sim::SetpointSegment step;
  step.start = 0.5;
  step.cascade.load_velocity = {0, 1.5, 0};
  sc.schedule.push_back(step);
  sc.disturbances.push_back({5.0, Vec2(0.5, 0.0)});
  const auto out = sim::run_scenario(sc);
  REQUIRE(out.ok());

  ReportSpec spec;
  spec.window = {0.0, 7.0};
  spec.step_time = 0.5;
  spec.step_end = 5.0;
  spec.kick_time = 5.0;
  const auto r = compute_report(out.log, sc.params, spec);
  CHECK(r.step_channel == "vy_p");
  REQUIRE(r.settling_time);
  REQUIRE(r.overshoot_percent);
  REQUIRE(r.swing_recovery_time);

  // the same numbers straight from the log
  std::vector<double> t, vy, mag;
  for (const auto& s : out.log.samples) {
    if (s.t >= 0.5 && s.t < 5.0) {
      t.push_back(s.t);
      vy.push_back(s.load_velocity.y());
    }
  }
  CHECK(*r.settling_time == doctest::Approx(*settling_time(t, vy, 1.5, 0.1)));
  CHECK(*r.overshoot_percent == doctest::Approx(overshoot(vy, 0.0, 1.5)));
  CHECK(*r.settling_time < 5.0);
  CHECK(*r.swing_recovery_time < 5.0);
  CHECK(r.samples == out.log.samples.size());
  CHECK(r.duration == doctest::Approx(7.0));
  CHECK(r.rmse.size() == 8);
  CHECK(r.tension_mean > 0.6);
  CHECK(r.thrust_saturation_rate == 0.0);
  CHECK(r.completed);
}

TEST_CASE("report on an empty log") {
  const auto r = compute_report(sim::TrajectoryLog{}, Params{}, ReportSpec{});
  CHECK(r.samples == 0);
  CHECK(r.rmse.empty());
  CHECK_FALSE(r.settling_time.has_value());
}
