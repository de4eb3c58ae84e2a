#include "uosl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uosl::analysis {
namespace {

std::vector<double> column(const std::vector<sim::Sample>& samples, IndexRange r,
                           auto&& pick) {
  std::vector<double> out;
  out.reserve(r.size());
  for (std::size_t i = r.first; i < r.last; ++i) {
    out.push_back(pick(samples[i]));
  }
  return out;
}

std::optional<DecayFit> try_fit(std::span<const double> t, std::span<const double> v) {
  if (t.size() < 2 || std::any_of(v.begin(), v.end(), [](double x) { return !(x > 0.0); })) {
    return std::nullopt;
  }
  return decay_rate_fit(t, v);
}

}  // namespace

IndexRange window_indices(std::span<const double> t, const Window& window) {
  const auto lo = std::lower_bound(t.begin(), t.end(), window.start - 1e-12);
  const auto hi = std::upper_bound(t.begin(), t.end(), window.end + 1e-12);
  IndexRange r;
  r.first = static_cast<std::size_t>(lo - t.begin());
  r.last = std::max(r.first, static_cast<std::size_t>(hi - t.begin()));
  return r;
}

double rmse(std::span<const double> series, std::span<const double> reference) {
  if (series.empty()) {
    throw std::invalid_argument("rmse: empty window");
  }
  if (series.size() != reference.size()) {
    throw std::invalid_argument("rmse: series and reference differ in length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double d = series[i] - reference[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(series.size()));
}

std::optional<double> settling_time_abs(std::span<const double> t, std::span<const double> x,
                                        double target, double band) {
  if (t.empty() || t.size() != x.size()) {
    throw std::invalid_argument("settling_time: empty or mismatched series");
  }
  if (!(band > 0.0)) {
    throw std::invalid_argument("settling_time: band must be > 0");
  }
  auto outside = [&](std::size_t i) { return std::abs(x[i] - target) > band; };
  std::size_t n = x.size();
  if (outside(n - 1)) {
    return std::nullopt;
  }
  std::size_t i = n - 1;
  while (i > 0 && !outside(i - 1)) {
    --i;
  }
  if (i == 0) {
    return 0.0;
  }
  // x[i-1] outside, x[i] inside: interpolate where |x - target| reaches band
  const double e0 = std::abs(x[i - 1] - target);
  const double e1 = std::abs(x[i] - target);
  const double frac = (e0 - e1) > 0.0 ? (e0 - band) / (e0 - e1) : 1.0;
  return t[i - 1] + std::clamp(frac, 0.0, 1.0) * (t[i] - t[i - 1]) - t.front();
}

std::optional<double> settling_time(std::span<const double> t, std::span<const double> x,
                                    double target, double band_fraction) {
  if (!(band_fraction > 0.0 && band_fraction < 1.0)) {
    throw std::invalid_argument("settling_time: band fraction must lie in (0, 1)");
  }
  if (target == 0.0) {
    throw std::invalid_argument("settling_time: relative band needs a nonzero target");
  }
  return settling_time_abs(t, x, target, band_fraction * std::abs(target));
}

double overshoot(std::span<const double> x, double initial, double target) {
  const double step = target - initial;
  if (step == 0.0 || !std::isfinite(step)) {
    throw std::invalid_argument("overshoot: target equals initial value");
  }
  if (x.empty()) {
    throw std::invalid_argument("overshoot: empty series");
  }
  double worst = 0.0;
  for (double v : x) {
    worst = std::max(worst, (v - target) / step);
  }
  return worst * 100.0;
}

DecayFit decay_rate_fit(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size() || t.size() < 2) {
    throw std::invalid_argument("decay_rate_fit: need at least two paired samples");
  }
  const auto n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0;
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) {
      throw std::invalid_argument("decay_rate_fit: values must be positive");
    }
    y[i] = std::log(v[i]);
    st += t[i];
    sy += y[i];
  }
  const double tm = st / n;
  const double ym = sy / n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  if (!(stt > 0.0)) {
    throw std::invalid_argument("decay_rate_fit: sample times are all equal");
  }
  const double slope = sty / stt;
  DecayFit fit;
  fit.rate = -slope;
  fit.offset = ym - slope * tm;
  double res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - (fit.offset + slope * t[i]);
    res += r * r;
  }
  fit.residual = std::sqrt(res / n);
  return fit;
}

EnergyAudit energy_audit(const sim::TrajectoryLog& log, const Params& params) {
  EnergyAudit audit;
  for (const auto& s : log.samples) {
    audit.t.push_back(s.t);
    audit.energy.push_back(dynamics::total_energy(s.state, params));
    audit.work_rate.push_back(s.work_rate);
  }
  if (audit.energy.empty()) {
    return audit;
  }
  const double e0 = audit.energy.front();
  const double scale = e0 != 0.0 ? std::abs(e0) : 1.0;
  for (double e : audit.energy) {
    const double d = (e - e0) / scale;
    audit.relative_drift.push_back(d);
    audit.max_relative_drift = std::max(audit.max_relative_drift, std::abs(d));
  }
  // the input is held between samples, so compare each interval's energy change
  // with the trapezoidal work of that held input
  for (std::size_t i = 0; i + 1 < audit.energy.size(); ++i) {
    const auto& next = log.samples[i + 1].state;
    const Vec4 u = log.samples[i].command.applied.vec();
    const double end_power =
        next.qdot.dot(dynamics::control_effectiveness(next.q) * u +
                      dynamics::drag_forces(next.q, next.qdot, params).generalized());
    const double h = audit.t[i + 1] - audit.t[i];
    if (!(h > 0.0)) continue;
    const double de = (audit.energy[i + 1] - audit.energy[i]) / h;
    audit.max_work_rate_mismatch = std::max(
        audit.max_work_rate_mismatch, std::abs(de - 0.5 * (audit.work_rate[i] + end_power)));
  }
  return audit;
}

Stats mean_std(std::span<const double> x) {
  if (x.empty()) {
    throw std::invalid_argument("mean_std: empty series");
  }
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

MetricReport compute_report(const sim::TrajectoryLog& log, const Params& params,
                            const ReportSpec& spec) {
  MetricReport rep;
  const auto& samples = log.samples;
  rep.samples = samples.size();
  if (samples.empty()) {
    return rep;
  }
  rep.duration = samples.back().t - samples.front().t;
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.t);

  const IndexRange win = window_indices(t, spec.window);
  if (!win.empty()) {
    const char* vel_names[3] = {"vx_p", "vy_p", "vz_p"};
    for (int k = 0; k < 3; ++k) {
      const auto x = column(samples, win, [k](const sim::Sample& s) { return s.load_velocity[k]; });
      const auto r = column(samples, win, [k](const sim::Sample& s) {
        return s.setpoint.cascade.load_velocity[k];
      });
      rep.rmse[vel_names[k]] = rmse(x, r);
    }
    const char* att_names[3] = {"phi", "theta", "psi"};
    for (int k = 0; k < 3; ++k) {
      const auto x = column(samples, win, [k](const sim::Sample& s) {
        return rad2deg(s.state.q[3 + k]);
      });
      const auto r = column(samples, win, [k](const sim::Sample& s) {
        return rad2deg(s.command.attitude_setpoint.vec()[k]);
      });
      rep.rmse[att_names[k]] = rmse(x, r);
    }
    const char* swing_names[2] = {"alpha", "beta"};
    for (int k = 0; k < 2; ++k) {
      const auto x = column(samples, win, [k](const sim::Sample& s) {
        return rad2deg(s.state.q[6 + k]);
      });
      rep.rmse[swing_names[k]] = rmse(x, std::vector<double>(x.size(), 0.0));
    }
    const auto tension = column(samples, win, [](const sim::Sample& s) {
      return s.tension.force.norm();
    });
    const Stats st = mean_std(tension);
    rep.tension_mean = st.mean;
    rep.tension_std = st.stddev;
  }

  if (spec.step_time) {
    const IndexRange before = window_indices(t, {-std::numeric_limits<double>::infinity(),
                                                  *spec.step_time - 1e-9});
    // half-open: a kick logged at step_end belongs to the next phase
    const IndexRange step = window_indices(t, {*spec.step_time, spec.step_end - 1e-9});
    if (!step.empty()) {
      const Vec3 target = samples[step.first].setpoint.cascade.load_velocity;
      const Vec3 initial = before.empty() ? samples.front().load_velocity
                                          : samples[before.last - 1].setpoint.cascade.load_velocity;
      int axis = 0;
      (target - initial).cwiseAbs().maxCoeff(&axis);
      if (target[axis] != initial[axis]) {
        static const char* names[3] = {"vx_p", "vy_p", "vz_p"};
        rep.step_channel = names[axis];
        const auto ts = column(samples, step, [](const sim::Sample& s) { return s.t; });
        const auto x = column(samples, step, [axis](const sim::Sample& s) {
          return s.load_velocity[axis];
        });
        rep.overshoot_percent = overshoot(x, initial[axis], target[axis]);
        const double band = spec.band_fraction * std::abs(target[axis] - initial[axis]);
        rep.settling_time = settling_time_abs(ts, x, target[axis], band);
      }
      const IndexRange fit = window_indices(t, {*spec.step_time, *spec.step_time + spec.decay_window});
      const auto tf = column(samples, fit, [](const sim::Sample& s) { return s.t; });
      rep.attitude_decay = try_fit(tf, column(samples, fit, [](const sim::Sample& s) {
                                     return s.attitude_lyapunov;
                                   }));
      rep.swing_decay = try_fit(tf, column(samples, fit, [](const sim::Sample& s) {
                                  return s.swing_lyapunov;
                                }));
    }
  }

  if (spec.kick_time) {
    const IndexRange after = window_indices(t, {*spec.kick_time, spec.window.end});
    if (!after.empty()) {
      const auto ts = column(samples, after, [](const sim::Sample& s) { return s.t; });
      const auto mag = column(samples, after, [](const sim::Sample& s) {
        return rad2deg(s.state.q.segment<2>(6).norm());
      });
      rep.swing_recovery_time = settling_time_abs(ts, mag, 0.0, spec.swing_band_deg);
    }
  }

  rep.energy_drift = energy_audit(log, params).max_relative_drift;
  std::size_t saturated = 0;
  for (const auto& s : samples) {
    saturated += (s.command.thrust_limited || s.command.rotors.saturated) ? 1 : 0;
  }
  rep.thrust_saturation_rate = static_cast<double>(saturated) / static_cast<double>(samples.size());
  return rep;
}

}  // namespace uosl::analysis
