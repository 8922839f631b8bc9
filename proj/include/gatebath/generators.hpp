#pragma once

// Bloch-space generators for the qubit master equation.
//
// State convention: the density matrix is encoded as the affine vector
// v = (1, n_x, n_y, n_z)^T.  A Generator4 g acts as dv/dt = g * v, so its
// first row is identically zero (trace preservation) and the first column
// carries the inhomogeneous (fixed-point) part.
//
// The dissipative generator derives from the master-equation term
//   d rho/dt |_diss = [Lambda rho, A] + [A, rho Lambda^dag],
// vectorized column-major and rotated to the Bloch basis.

#include <array>
#include <utility>

#include "gatebath/bath.hpp"
#include "gatebath/dissipators.hpp"
#include "gatebath/operators.hpp"
#include "gatebath/types.hpp"

namespace gatebath {

// 4x4 real generator acting on (1, n); row 0 is identically zero.
using Generator4 = Mat4;

// Bloch generator of [Lambda rho, A] + [A, rho Lambda^dag] for Hermitian A.
// Throws std::invalid_argument if A is not Hermitian and std::runtime_error
// if the transform leaves an imaginary residue.
Generator4 dissipative_generator(const Mat2& lambda, const Mat2& a);

// Unitary part for H0 = -(delta/2) sigma_z: n_x' = delta n_y, n_y' = -delta n_x.
Generator4 free_generator(double delta);

// Closed-form dissipative generator with the time-dependent rates
// J_w(t) = Re Gamma_w(t), S_w(t) = Im Gamma_w(t); requires phi = 0.
Generator4 static_generator_closed_form(const ModelSpec& m, const Bath& b,
                                        double t);

// Same structure with the asymptotic rates (Markov limit); requires phi = 0.
Generator4 markov_generator_closed_form(const ModelSpec& m, const Bath& b);

// Longitudinal-coupling truncation: diag(0, -xi^2 J_0(t), -xi^2 J_0(t), 0).
Generator4 pure_dephasing_generator(const ModelSpec& m, const Bath& b,
                                    double t);

// Seven-term split of the post-gate generator after an instantaneous pi/2
// x-rotation at t = 0 (t is the elapsed time since the gate):
//   [0] transverse part of the static generator at t,
//   [1] +delta-frequency memory term, undressed,
//   [2] -delta-frequency memory term, undressed,
//   [3] longitudinal part of the static generator at t,
//   [4] -delta-frequency memory term dressed by the gate,
//   [5] +delta-frequency memory term dressed by the gate,
//   [6] longitudinal memory term dressed by the gate.
// The terms sum to dissipative_generator(lambda_instant_dp(m,b,p,t), A).
// Throws std::invalid_argument unless p is an instantaneous pi/2 pulse
// with phi = 0.
std::array<Generator4, 7> dp_generator_decomposition(const ModelSpec& m,
                                                     const Bath& b,
                                                     const PulseSpec& p,
                                                     double t);

// Coarse-grained interaction-picture generators (pre-gate memory part,
// post-gate static part) for an instantaneous pi/2 x-rotation: all terms
// oscillating at exp(±i delta t) or exp(±2i delta t) are dropped exactly,
// keeping the secular (DC) component.  Same preconditions as above.
std::pair<Generator4, Generator4> coarse_grained_generators(
    const ModelSpec& m, const Bath& b, const PulseSpec& p, double t);

// Eigenvalues of the coherence block of free_generator + markov generator:
//   mu = -Jt/4 +- i sqrt(delta (delta - dS/2) - Jt^2/16),
// Jt = J_delta + J_{-delta}, dS = S_{-delta} - S_delta (asymptotic rates).
// Valid when the coherence block decouples from the population, i.e.
// xi = 0 or T = 0; throws std::invalid_argument otherwise.
std::pair<cplx, cplx> markov_coherence_eigenvalues(const ModelSpec& m,
                                                   const Bath& b);

}  // namespace gatebath
