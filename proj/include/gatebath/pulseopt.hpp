#pragma once

// Fourier pulse-shape optimization.  The drive amplitude inside the window
// is eps(t) = omega_p + sum_n a_n (n pi / tau_p) cos(n pi t / tau_p); every
// basis term integrates to zero, so the rotation angle is fixed while the
// shape changes.  The figure of merit is the Frobenius norm of the
// time-integrated interaction-picture dissipative generator accumulated
// across the window (computed with the coupling fixed to sigma_z, the pure
// dephasing configuration; the ModelSpec contributes only the level
// splitting).  The norm scales exactly as lambda^2, so the
// optimal coefficients depend only on the bath shape and the drive.

#include <array>
#include <vector>

#include "gatebath/dissipators.hpp"
#include "gatebath/generators.hpp"

namespace gatebath {

using PulseCoeffs = std::array<double, 7>;

struct OptResult {
  PulseCoeffs a{};          // best coefficients, |a_n| <= 2
  double objective = 0.0;   // norm at the best coefficients
  int iterations = 0;       // objective evaluations spent
  bool converged = false;   // best restart's simplex met its tolerance
};

// Gate-window dissipator tabulated on the uniform grid t_k = k h,
// h = tau_p2 / n_steps, k = 0..n_steps, in the Schrodinger picture.  The
// window integral is a causal convolution of the bath correlation kernel
// with the dressed coupling on two-point Gauss panels, evaluated for all
// grid points at once by FFT.  Requires tau_p1 == 0 and a finite window.
std::vector<Mat2> lambda_gate_grid(const ModelSpec& m, const Bath& b,
                                   const PulseSpec& p, const Mat2& coupling,
                                   int n_steps);

// Norm of int_0^{tau_p} D_gate^I(t) dt for the shaped pulse obtained by
// installing `a` into `p`.  Composite Simpson on the same grid as
// lambda_gate_grid; substeps = 0 picks the grid automatically (two Gauss
// panels per correlation-time-resolving interval).
double objective(const PulseCoeffs& a, const ModelSpec& m, const Bath& b,
                 const PulseSpec& p, int substeps = 0);

// Derivative-free minimization of `objective`: Nelder-Mead started from
// `init` plus four random restarts drawn inside |a_n| <= 1, run in
// parallel and merged by best value (ties break toward the lower restart
// index).  The coefficient bound |a_n| <= 2 is enforced by a quadratic
// penalty.  budget < 100 is rejected; exhausting the budget before the
// simplex tolerance is met returns the best point with converged = false.
OptResult optimize(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                   const PulseCoeffs& init, int budget, int substeps = 0,
                   unsigned seed = 12345u);

}  // namespace gatebath
