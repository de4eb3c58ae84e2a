#pragma once

// Reference model built directly from the Lagrangian, sharing no code with the
// closed-form dynamics: rotations are composed from elementary matrices,
// velocities come from complex-step derivatives of positions, M from
// polarization of the kinetic energy, G from the potential, and C from
// Christoffel sums over central differences of M.

#include "uosl/dynamics.hpp"

namespace uosl::oracle {

double kinetic_energy(const Vec8& q, const Vec8& qdot, const Params& params);
double potential_energy(const Vec8& q, const Params& params);

Mat8 mass_matrix(const Vec8& q, const Params& params);
Vec8 gravity_vector(const Vec8& q, const Params& params);
/// dM/dq_k by central differences of mass_matrix().
std::array<Mat8, 8> mass_matrix_partials(const Vec8& q, const Params& params, double h = 1e-6);
Mat8 coriolis_matrix(const Vec8& q, const Vec8& qdot, const Params& params);

}  // namespace uosl::oracle
