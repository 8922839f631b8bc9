#pragma once

// Qubit operators, propagators and the Bloch-basis superoperator transform.
//
// Conventions used throughout the library:
//   H0 = -(delta/2) sigma_z, so |0> = (1,0)^T is the ground state (n_z = +1),
//   sigma_pm = (sigma_x +- i sigma_y)/2, density matrices vectorized
//   column-major in the basis {|0><0|, |1><0|, |0><1|, |1><1|}.

#include "gatebath/types.hpp"

namespace gatebath::ops {

Mat2 identity2();
Mat2 sigma_x();
Mat2 sigma_y();
Mat2 sigma_z();
Mat2 sigma_plus();   // |0><1|
Mat2 sigma_minus();  // |1><0|

// A = (1/2)(sigma_x cos phi + sigma_y sin phi + xi sigma_z).
Mat2 coupling_operator(double xi, double phi = 0.0);

// Bloch axis vector a with A = (1/2) a.sigma for the coupling above.
Vec3 coupling_axis(double xi, double phi = 0.0);

// exp(-i H0 t) for H0 = -(delta/2) sigma_z.
Mat2 free_propagator(double delta, double t);

// exp(-i theta sigma_x / 2).
Mat2 gate_unitary(double theta);

// exp(-i (eta/2) m.sigma) for a unit axis m; analytic Pauli exponential.
Mat2 axis_rotation(const Vec3& axis, double eta);

// U_c(x) = exp(i H0 x) U_c exp(-i H0 x) with U_c = gate_unitary(theta).
Mat2 interaction_rotation(double delta, double theta, double x);

// U_r(t) = exp(-i H0 t) exp(-i (omega_p/2) sigma_x t) exp(i H0 t).
Mat2 rotating_frame_gate(double delta, double omega_p, double t);

// Bloch components (nx, ny, nz) of a unit-trace Hermitian 2x2 matrix.
// Throws std::invalid_argument when |tr(rho) - 1| > 1e-12.
Vec3 vectorize(const Mat2& rho);

// Inverse map: rho = (1/2)(I + n.sigma).
Mat2 unvectorize(const Vec3& n);

// Column-major vec of a 2x2 matrix in the basis {|0><0|,|1><0|,|0><1|,|1><1|}.
Eigen::Vector4cd vec_col(const Mat2& m);

// Kronecker product of two 2x2 matrices (4x4, column-major consistent).
Mat4c kron2(const Mat2& a, const Mat2& b);

// Superoperator of rho -> -i [H, rho] in the column-major vec basis.
Mat4c hamiltonian_superop(const Mat2& h);

// Unitary change of basis to {I, sigma_x, sigma_y, sigma_z}/sqrt(2): D' = U^dag D U.
// The result must be real with a vanishing first row; entries with imaginary
// residue above `tol` throw std::runtime_error.
Mat4 bloch_basis_transform(const Mat4c& superop, double tol = 1e-9);

// 3x3 rotation matrix R with (U m.sigma U^dag) = (R m).sigma.
Eigen::Matrix3d bloch_rotation(const Mat2& u);

}  // namespace gatebath::ops
