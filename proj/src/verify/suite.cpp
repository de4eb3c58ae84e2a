#include "uosl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "uosl/oracle.hpp"

namespace uosl::verify {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <int N>
Eigen::Matrix<double, N, 1> uniform_vec(std::mt19937_64& rng, double lo, double hi) {
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

PropertyResult make(std::string name, double measured, double tolerance, std::string detail = {}) {
  PropertyResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.tolerance = tolerance;
  r.passed = std::isfinite(measured) && measured <= tolerance;
  r.detail = std::move(detail);
  return r;
}

PropertyResult skipped(std::string name, std::string why) {
  PropertyResult r;
  r.name = std::move(name);
  r.passed = true;
  r.skipped = true;
  r.detail = std::move(why);
  return r;
}

bool has_load(const Params& p) { return p.load_mass > 0.0; }

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

ModelUnderTest ModelUnderTest::analytic(const Params& params) {
  ModelUnderTest m;
  m.mass = [params](const Vec8& q) { return dynamics::mass_matrix(q, params); };
  m.mass_partials = [params](const Vec8& q) { return dynamics::mass_matrix_partials(q, params); };
  m.coriolis = [params](const Vec8& q, const Vec8& qd) {
    return dynamics::coriolis_matrix(q, qd, params);
  };
  m.gravity = [params](const Vec8& q) { return dynamics::gravity_vector(q, params); };
  return m;
}

ModelUnderTest ModelUnderTest::with_corrupted_gravity(const Params& params) {
  ModelUnderTest m = analytic(params);
  m.gravity = [params](const Vec8& q) { return Vec8(-dynamics::gravity_vector(q, params)); };
  return m;
}

Vec8 ModelUnderTest::accelerations(const GeneralizedState& s, const ControlInput& u,
                                   const Params& params) const {
  const Vec8 rhs = dynamics::control_effectiveness(s.q) * u.vec() - coriolis(s.q, s.qdot) * s.qdot -
                   gravity(s.q);
  const Mat8 m = mass(s.q);
  Vec8 qdd = Vec8::Zero();
  if (has_load(params)) {
    qdd = m.llt().solve(rhs);
  } else {
    qdd.head<6>() = m.topLeftCorner<6, 6>().llt().solve(rhs.head<6>());
  }
  return qdd;
}

GeneralizedState random_state(std::mt19937_64& rng, double angle_limit) {
  GeneralizedState s;
  s.q.head<3>() = uniform_vec<3>(rng, -2.0, 2.0);
  s.q[3] = uniform(rng, -angle_limit, angle_limit);
  s.q[4] = uniform(rng, -angle_limit, angle_limit);
  s.q[5] = uniform(rng, -kPi, kPi);
  s.q[6] = uniform(rng, -angle_limit, angle_limit);
  s.q[7] = uniform(rng, -angle_limit, angle_limit);
  s.qdot = uniform_vec<8>(rng, -2.0, 2.0);
  return s;
}

PropertyResult check_mass_oracle(const ModelUnderTest& m, const Params& p, const Options& o) {
  std::mt19937_64 rng(o.seed);
  double worst = 0.0;
  for (int i = 0; i < o.oracle_states; ++i) {
    const auto s = random_state(rng);
    worst = std::max(worst, max_abs(m.mass(s.q) - oracle::mass_matrix(s.q, p)));
  }
  return make("mass_matrix_vs_lagrangian", worst, 1e-6, fmt::format("{} states", o.oracle_states));
}

PropertyResult check_mass_structure(const ModelUnderTest& m, const Params& p, const Options& o) {
  std::mt19937_64 rng(o.seed + 1);
  double worst = 0.0;
  for (int i = 0; i < o.oracle_states; ++i) {
    const Mat8 mm = m.mass(random_state(rng).q);
    worst = std::max({worst, std::abs(mm(7, 1)), std::abs(mm(1, 7)),
                      max_abs(mm.topLeftCorner<3, 3>() - p.total_mass() * Mat3::Identity())});
  }
  return make("mass_matrix_structure", worst, 0.0, "m_82 and the translational block are exact");
}

PropertyResult check_coriolis_oracle(const ModelUnderTest& m, const Params& p, const Options& o) {
  std::mt19937_64 rng(o.seed + 2);
  double worst = 0.0;
  for (int i = 0; i < o.oracle_states; ++i) {
    const auto s = random_state(rng);
    worst = std::max(worst, max_abs(m.coriolis(s.q, s.qdot) - oracle::coriolis_matrix(s.q, s.qdot, p)));
  }
  return make("coriolis_vs_christoffel", worst, 1e-6, fmt::format("{} states", o.oracle_states));
}

PropertyResult check_gravity_oracle(const ModelUnderTest& m, const Params& p, const Options& o) {
  std::mt19937_64 rng(o.seed + 3);
  double worst = 0.0;
  for (int i = 0; i < o.oracle_states; ++i) {
    const auto s = random_state(rng);
    worst = std::max(worst, max_abs(m.gravity(s.q) - oracle::gravity_vector(s.q, p)));
  }
  return make("gravity_vs_potential_gradient", worst, 1e-6, fmt::format("{} states", o.oracle_states));
}

PropertyResult check_skew_symmetry(const ModelUnderTest& m, const Params&, const Options& o) {
  std::mt19937_64 rng(o.seed + 4);
  double worst = 0.0;
  for (int i = 0; i < o.skew_states; ++i) {
    const auto s = random_state(rng);
    const auto dm = m.mass_partials(s.q);
    Mat8 mdot = Mat8::Zero();
    for (int k = 0; k < 8; ++k) mdot += dm[k] * s.qdot[k];
    const double v = s.qdot.dot((mdot - 2.0 * m.coriolis(s.q, s.qdot)) * s.qdot);
    worst = std::max(worst, std::abs(v) / (1.0 + s.qdot.squaredNorm()));
  }
  return make("skew_symmetry", worst, 1e-8, fmt::format("{} states", o.skew_states));
}

PropertyResult check_energy_conservation(const ModelUnderTest& m, const Params& p,
                                         const Options& o) {
  Params dragless = p;
  dragless.uav_drag.setZero();
  dragless.load_drag.setZero();
  dragless.rotational_drag.setZero();
  GeneralizedState s;
  s.q[6] = deg2rad(15.0);
  s.qdot.segment<3>(3) = Vec3(0.5, -0.3, 0.2);
  s.qdot.segment<2>(6) = Vec2(0.4, -0.2);
  const ControlInput u;
  auto energy = [&](const GeneralizedState& x) {
    return oracle::kinetic_energy(x.q, x.qdot, dragless) + oracle::potential_energy(x.q, dragless);
  };
  auto f = [&](const GeneralizedState& x) {
    return GeneralizedState{x.qdot, m.accelerations(x, u, dragless)};
  };
  auto axpy = [](const GeneralizedState& x, const GeneralizedState& d, double h) {
    return GeneralizedState{x.q + h * d.q, x.qdot + h * d.qdot};
  };
  const double e0 = energy(s);
  const double h = o.energy_dt;
  const long steps = std::lround(o.energy_duration / h);
  double worst = 0.0;
  for (long n = 0; n < steps; ++n) {
    const auto k1 = f(s);
    const auto k2 = f(axpy(s, k1, 0.5 * h));
    const auto k3 = f(axpy(s, k2, 0.5 * h));
    const auto k4 = f(axpy(s, k3, h));
    s.q += (h / 6.0) * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    s.qdot += (h / 6.0) * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot);
    if (!s.q.allFinite() || !s.qdot.allFinite()) {
      return make("energy_conservation", INFINITY, 1e-6, "state became non-finite");
    }
    worst = std::max(worst, std::abs(energy(s) - e0) / std::abs(e0));
  }
  return make("energy_conservation", worst, 1e-6,
              fmt::format("unforced, dragless, {} s at dt={}", o.energy_duration, h));
}

PropertyResult check_hover_equilibrium(const ModelUnderTest& m, const Params& p,
                                       const Options&) {
  GeneralizedState s;
  s.q[2] = -5.0;
  const Vec8 g = dynamics::gravity_vector(s.q, p);
  const ControlInput hover{-p.total_mass() * p.gravity, g.segment<3>(3)};
  const double accel = max_abs(m.accelerations(s, hover, p));
  double command = 0.0;
  if (has_load(p)) {
    const auto cmd = control::cascade_step(s, {}, control::Gains{}, p);
    command = std::max(std::abs(cmd.requested.thrust - hover.thrust),
                       max_abs(cmd.requested.torque - hover.torque));
  }
  return make("hover_equilibrium", std::max(accel, command), 1e-9,
              fmt::format("F_l={:.6f} N, tau_theta={:.6f} N m", hover.thrust, hover.torque.y()));
}

PropertyResult check_reduced_swing(const ModelUnderTest&, const Params& p, const Options& o) {
  if (!has_load(p)) {
    return skipped("reduced_swing_form", "load mass is zero");
  }
  std::mt19937_64 rng(o.seed + 5);
  double worst = 0.0;
  for (int i = 0; i < o.oracle_states; ++i) {
    const auto s = random_state(rng, 1.2);
    const ControlInput u{uniform(rng, -25.0, -5.0), uniform_vec<3>(rng, -0.5, 0.5)};
    const Vec8 qdd = dynamics::forward_dynamics(s, u, p);
    const auto rates = spatial::body_rotation_derivatives(s.eta(), s.eta_dot(), qdd.segment<3>(3));
    const Vec3 suspension_accel = qdd.head<3>() + rates.second * p.suspension_offset;
    const auto red = dynamics::reduced_swing_terms(s, p);
    const Vec2 predicted = -red.map * suspension_accel -
                           red.inertia.inverse() * (red.coriolis + red.gravity - red.drag);
    worst = std::max(worst, (predicted - qdd.segment<2>(6)).cwiseAbs().maxCoeff() /
                                (1.0 + qdd.segment<2>(6).norm()));
  }
  return make("reduced_swing_form", worst, 1e-9, "swing rows about the suspension point");
}

PropertyResult check_tension_round_trip(const Params&, const Options& o) {
  std::mt19937_64 rng(o.seed + 6);
  double worst = 0.0;
  for (int i = 0; i < o.round_trip_samples; ++i) {
    const Vec3 f(uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0), uniform(rng, -5.0, -0.05));
    const auto t = control::tension_decompose(f);
    const Vec3 back = spatial::rot_load_to_inertial(t.swing) * Vec3(0.0, 0.0, t.magnitude);
    worst = std::max(worst, (back - f).cwiseAbs().maxCoeff());
  }
  return make("tension_decomposition_round_trip", worst, 1e-10,
              fmt::format("{} samples", o.round_trip_samples));
}

PropertyResult check_attitude_round_trip(const Params&, const Options& o) {
  std::mt19937_64 rng(o.seed + 7);
  double worst = 0.0;
  for (int i = 0; i < o.round_trip_samples; ++i) {
    const Vec3 f(uniform(rng, -20.0, 20.0), uniform(rng, -20.0, 20.0), uniform(rng, -30.0, -0.5));
    const double psi = uniform(rng, -kPi, kPi);
    const auto a = control::attitude_decoupler(f, psi);
    const Vec3 back = spatial::rot_body_to_inertial({a.roll, a.pitch, psi}) * Vec3(0.0, 0.0, a.thrust);
    worst = std::max(worst, (back - f).cwiseAbs().maxCoeff());
  }
  return make("attitude_decoupler_round_trip", worst, 1e-10,
              fmt::format("{} samples", o.round_trip_samples));
}

PropertyResult check_mixer_round_trip(const Params& p, const Options& o) {
  std::mt19937_64 rng(o.seed + 8);
  double worst = 0.0;
  for (int i = 0; i < o.round_trip_samples; ++i) {
    const double thrust = uniform(rng, -40.0, 0.0);
    const Vec3 torque = uniform_vec<3>(rng, -1.0, 1.0);
    const auto w = control::allocate(control::mix_unclamped(thrust, torque, p), p);
    worst = std::max({worst, std::abs(w.thrust - thrust), max_abs(w.torque - torque)});
    const Vec4 rotors = uniform_vec<4>(rng, 0.0, 15.0);
    const auto back = control::allocate(rotors, p);
    worst = std::max(worst, max_abs(control::mix_unclamped(back.thrust, back.torque, p) - rotors));
  }
  return make("allocate_mixer_round_trip", worst, 1e-10,
              fmt::format("{} samples", o.round_trip_samples));
}

PropertyResult check_thrust_saturation(const Params& p, const Options& o) {
  std::mt19937_64 rng(o.seed + 9);
  const double limit = p.thrust_limit;
  double worst = 0.0;  // largest norm excess, plus any change to an in-bound input
  for (int i = 0; i < o.round_trip_samples; ++i) {
    const double scale = 3.0 * limit;
    const Vec3 f(uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, -1e-3));
    const auto r = control::thrust_saturation(f, limit);
    worst = std::max(worst, r.force.norm() - limit);
    if (f.norm() <= limit) {
      worst = std::max(worst, max_abs(r.force - f));
    }
  }
  return make("thrust_saturation_bound", std::max(worst, 0.0), 1e-12 * limit,
              fmt::format("F_up={} N, {} samples", limit, o.round_trip_samples));
}

PropertyResult check_inner_linearization(const Params& p, const control::Gains& g,
                                         const Options& o) {
  std::mt19937_64 rng(o.seed + 10);
  double worst = 0.0;
  for (int i = 0; i < o.linearization_states; ++i) {
    const auto s = random_state(rng, 1.2);
    const DragSet drag = dynamics::drag_forces(s.q, s.qdot, p);
    const EulerAngles target = EulerAngles::from(s.eta().vec() + uniform_vec<3>(rng, -0.3, 0.3));
    const Vec3 ff = uniform_vec<3>(rng, -1.0, 1.0);
    const double thrust = uniform(rng, -25.0, -5.0);
    const auto e = control::compute_errors(s, {}, target, s.sigma(), g, p);
    const Vec3 tr = control::attitude_reference_acceleration(e, g);
    const auto feed = control::tension_feedforward(s, tr + ff, thrust, p, drag);
    const Vec3 tau = control::inner_attitude_law(s, tr, ff, feed.torque, p, drag);
    const Vec8 qdd = dynamics::forward_dynamics(s, {thrust, tau}, p);
    worst = std::max(worst, (qdd.segment<3>(3) - (tr + ff)).cwiseAbs().maxCoeff());
  }
  return make("inner_loop_exact_linearization", worst, 1e-8,
              fmt::format("{} states", o.linearization_states));
}

std::vector<PropertyResult> run_suite(const Params& params, const control::Gains& gains,
                                      const Options& options) {
  params.validate();
  gains.validate();
  const ModelUnderTest model = options.corrupt_gravity
                                   ? ModelUnderTest::with_corrupted_gravity(params)
                                   : ModelUnderTest::analytic(params);
  std::vector<PropertyResult> out;
  out.push_back(check_mass_oracle(model, params, options));
  out.push_back(check_mass_structure(model, params, options));
  out.push_back(check_coriolis_oracle(model, params, options));
  out.push_back(check_gravity_oracle(model, params, options));
  out.push_back(check_skew_symmetry(model, params, options));
  out.push_back(check_energy_conservation(model, params, options));
  out.push_back(check_hover_equilibrium(model, params, options));
  out.push_back(check_reduced_swing(model, params, options));
  out.push_back(check_tension_round_trip(params, options));
  out.push_back(check_attitude_round_trip(params, options));
  out.push_back(check_mixer_round_trip(params, options));
  out.push_back(check_thrust_saturation(params, options));
  out.push_back(check_inner_linearization(params, gains, options));
  return out;
}

bool report(const std::vector<PropertyResult>& results, std::ostream& out) {
  bool ok = true;
  for (const auto& r : results) {
    const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
    if (r.skipped) {
      out << fmt::format("{} {} ({})\n", tag, r.name, r.detail);
    } else {
      out << fmt::format("{} {} measured={:.3e} tol={:.1e} ({})\n", tag, r.name, r.measured,
                         r.tolerance, r.detail);
    }
  }
  return ok;
}

}  // namespace uosl::verify
