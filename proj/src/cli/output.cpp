#include "uosl/output.hpp"

#include <sstream>

#include <fmt/format.h>

namespace uosl::io {
namespace {

std::vector<std::string> build_columns() {
  std::vector<std::string> c{"t"};
  for (int i = 0; i < 8; ++i) c.push_back(fmt::format("q{}", i));
  for (int i = 0; i < 8; ++i) c.push_back(fmt::format("qd{}", i));
  for (int i = 0; i < 8; ++i) c.push_back(fmt::format("qdd{}", i));
  for (const char* n : {"vx_pd", "vy_pd", "vz_pd", "psi_sp"}) c.emplace_back(n);
  for (const char* n : {"vx_p", "vy_p", "vz_p"}) c.emplace_back(n);
  for (const char* n : {"F_l", "tau_phi", "tau_theta", "tau_psi"}) c.emplace_back(n);
  for (const char* n : {"F_l_applied", "tau_phi_applied", "tau_theta_applied", "tau_psi_applied"})
    c.emplace_back(n);
  for (int i = 1; i <= 4; ++i) c.push_back(fmt::format("rotor{}", i));
  for (const char* n : {"rotor_saturated", "thrust_limited"}) c.emplace_back(n);
  for (const char* n : {"Ftd_x", "Ftd_y", "Ftd_z", "F_td", "alpha_d", "beta_d"}) c.emplace_back(n);
  for (const char* n : {"phi_d", "theta_d", "psi_d"}) c.emplace_back(n);
  for (const char* n : {"xidd_d_x", "xidd_d_y", "xidd_d_z", "Fld_x", "Fld_y", "Fld_z"})
    c.emplace_back(n);
  for (const char* n : {"etadd_tr_phi", "etadd_tr_theta", "etadd_tr_psi"}) c.emplace_back(n);
  for (const char* n : {"tau_Ft_phi", "tau_Ft_theta", "tau_Ft_psi"}) c.emplace_back(n);
  for (const char* n : {"Ft_x", "Ft_y", "Ft_z", "Ft"}) c.emplace_back(n);
  for (const char* n : {"V_eta", "V_sigma", "E", "work_rate"}) c.emplace_back(n);
  return c;
}

template <typename V>
void put(std::string& row, const V& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    fmt::format_to(std::back_inserter(row), ",{}", v[i]);
  }
}

void put(std::string& row, double v) { fmt::format_to(std::back_inserter(row), ",{}", v); }

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json fit_json(const std::optional<analysis::DecayFit>& f) {
  if (!f) return nullptr;
  return {{"rate", f->rate}, {"offset", f->offset}, {"residual", f->residual}};
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::optional<analysis::DecayFit> read_fit(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& f = j.at(key);
  return analysis::DecayFit{f.at("rate").get<double>(), f.at("offset").get<double>(),
                            f.at("residual").get<double>()};
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = build_columns();
  return cols;
}

void write_trajectory_csv(std::ostream& out, const sim::TrajectoryLog& log) {
  std::string header;
  for (const auto& c : csv_columns()) {
    if (!header.empty()) header += ',';
    header += c;
  }
  out << header << '\n';
  std::string row;
  for (const auto& s : log.samples) {
    const auto& c = s.command;
    row = fmt::format("{}", s.t);
    put(row, s.state.q);
    put(row, s.state.qdot);
    put(row, s.qddot);
    put(row, s.setpoint.cascade.load_velocity);
    put(row, s.setpoint.cascade.yaw);
    put(row, s.load_velocity);
    put(row, c.requested.vec());
    put(row, c.applied.vec());
    put(row, c.rotors.thrusts);
    put(row, c.rotors.saturated ? 1.0 : 0.0);
    put(row, c.thrust_limited ? 1.0 : 0.0);
    put(row, c.tension_setpoint);
    put(row, c.tension.magnitude);
    put(row, c.tension.swing.vec());
    put(row, c.attitude_setpoint.vec());
    put(row, c.suspension_accel);
    put(row, c.thrust_setpoint_limited);
    put(row, c.attitude_reference_accel);
    put(row, c.feedforward.torque);
    put(row, s.tension.force);
    put(row, s.tension.force.norm());
    put(row, s.attitude_lyapunov);
    put(row, s.swing_lyapunov);
    put(row, s.energy);
    put(row, s.work_rate);
    out << row << '\n';
  }
}

std::string trajectory_csv(const sim::TrajectoryLog& log) {
  std::ostringstream out;
  write_trajectory_csv(out, log);
  return out.str();
}

nlohmann::json metrics_json(const analysis::MetricReport& r, const RunInfo& info) {
  nlohmann::json j;
  j["schema"] = kMetricsSchema;
  j["scenario"] = info.scenario;
  j["seed"] = info.seed;
  j["completed"] = r.completed;
  if (info.failure) {
    nlohmann::json f{{"time", info.failure->time}, {"message", info.failure->message}};
    f["stage"] = info.failure->stage ? nlohmann::json(std::string(control::stage_name(*info.failure->stage)))
                                     : nlohmann::json(nullptr);
    j["failure"] = f;
  } else {
    j["failure"] = nullptr;
  }
  j["failure_message"] = r.failure;
  j["samples"] = r.samples;
  j["duration"] = r.duration;
  j["rmse"] = r.rmse;
  j["rmse_units"] = {{"vx_p", "m/s"}, {"vy_p", "m/s"}, {"vz_p", "m/s"}, {"phi", "deg"},
                     {"theta", "deg"}, {"psi", "deg"}, {"alpha", "deg"}, {"beta", "deg"}};
  j["step_channel"] = r.step_channel;
  j["settling_time"] = optional_number(r.settling_time);
  j["overshoot_percent"] = optional_number(r.overshoot_percent);
  j["attitude_decay"] = fit_json(r.attitude_decay);
  j["swing_decay"] = fit_json(r.swing_decay);
  j["swing_recovery_time"] = optional_number(r.swing_recovery_time);
  j["energy_drift"] = r.energy_drift;
  j["tension_mean"] = r.tension_mean;
  j["tension_std"] = r.tension_std;
  j["thrust_saturation_rate"] = r.thrust_saturation_rate;
  return j;
}

analysis::MetricReport report_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != kMetricsSchema) {
    throw std::invalid_argument(std::string("metrics document is not ") + kMetricsSchema);
  }
  analysis::MetricReport r;
  r.completed = j.at("completed").get<bool>();
  r.failure = j.at("failure_message").get<std::string>();
  r.samples = j.at("samples").get<std::size_t>();
  r.duration = j.at("duration").get<double>();
  r.rmse = j.at("rmse").get<std::map<std::string, double>>();
  r.step_channel = j.at("step_channel").get<std::string>();
  r.settling_time = read_optional(j, "settling_time");
  r.overshoot_percent = read_optional(j, "overshoot_percent");
  r.attitude_decay = read_fit(j, "attitude_decay");
  r.swing_decay = read_fit(j, "swing_decay");
  r.swing_recovery_time = read_optional(j, "swing_recovery_time");
  r.energy_drift = j.at("energy_drift").get<double>();
  r.tension_mean = j.at("tension_mean").get<double>();
  r.tension_std = j.at("tension_std").get<double>();
  r.thrust_saturation_rate = j.at("thrust_saturation_rate").get<double>();
  return r;
}

}  // namespace uosl::io
