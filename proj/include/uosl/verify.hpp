#pragma once

// Property suite run by `uosl verify`: the analytic model and controller are
// checked against independent oracles on seeded random states.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "uosl/controller.hpp"

namespace uosl::verify {

struct PropertyResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// The model the suite exercises. Normally the analytic dynamics; test
/// fixtures may swap in a deliberately broken term as a negative control.
struct ModelUnderTest {
  std::function<Mat8(const Vec8&)> mass;
  std::function<std::array<Mat8, 8>(const Vec8&)> mass_partials;
  std::function<Mat8(const Vec8&, const Vec8&)> coriolis;
  std::function<Vec8(const Vec8&)> gravity;

  static ModelUnderTest analytic(const Params& params);
  /// Analytic model with the sign of G flipped.
  static ModelUnderTest with_corrupted_gravity(const Params& params);

  /// qdd from M qdd = B u - C qd - G (drag excluded). With a massless load the
  /// swing rows vanish and only the UAV block is solved.
  [[nodiscard]] Vec8 accelerations(const GeneralizedState& s, const ControlInput& u,
                                   const Params& params) const;
};

struct Options {
  std::uint64_t seed = 1;
  int oracle_states = 100;
  int skew_states = 1000;
  int round_trip_samples = 1000;
  int linearization_states = 100;
  double energy_duration = 1.0;
  double energy_dt = 1e-4;
  bool corrupt_gravity = false;
};

/// Random state with every angle strictly inside its bound.
GeneralizedState random_state(std::mt19937_64& rng, double angle_limit = 1.3);

PropertyResult check_mass_oracle(const ModelUnderTest& m, const Params& p, const Options& o);
PropertyResult check_mass_structure(const ModelUnderTest& m, const Params& p, const Options& o);
PropertyResult check_coriolis_oracle(const ModelUnderTest& m, const Params& p, const Options& o);
PropertyResult check_gravity_oracle(const ModelUnderTest& m, const Params& p, const Options& o);
PropertyResult check_skew_symmetry(const ModelUnderTest& m, const Params& p, const Options& o);
PropertyResult check_energy_conservation(const ModelUnderTest& m, const Params& p,
                                         const Options& o);
PropertyResult check_hover_equilibrium(const ModelUnderTest& m, const Params& p,
                                       const Options& o);
PropertyResult check_reduced_swing(const ModelUnderTest& m, const Params& p, const Options& o);
PropertyResult check_tension_round_trip(const Params& p, const Options& o);
PropertyResult check_attitude_round_trip(const Params& p, const Options& o);
PropertyResult check_mixer_round_trip(const Params& p, const Options& o);
PropertyResult check_thrust_saturation(const Params& p, const Options& o);
PropertyResult check_inner_linearization(const Params& p, const control::Gains& g,
                                         const Options& o);

std::vector<PropertyResult> run_suite(const Params& params, const control::Gains& gains,
                                      const Options& options);

/// One line per property; returns true iff none failed.
bool report(const std::vector<PropertyResult>& results, std::ostream& out);

}  // namespace uosl::verify
