#pragma once

// Filtered coupling operators Lambda(t) for the master equation
//   rho' = -i[H(t), rho] + [Lambda(t) rho, A] + [A, rho Lambda(t)^dag].
//
// All variants assume the system was prepared in the far past, so the bath
// is fully aged when the gate window [tau_p1, tau_p2] opens: before the
// window Lambda = lambda_markov, inside and after it the window-aware forms
// below apply.  Gates rotate about the x axis; the analytic in-gate and
// post-gate assemblies require phi = 0 (transverse coupling along x).

#include <array>
#include <limits>
#include <optional>

#include "gatebath/bath.hpp"
#include "gatebath/operators.hpp"
#include "gatebath/types.hpp"

namespace gatebath {

// Two-level system H0 = -(delta/2) sigma_z coupled to the bath through
// A = (1/2)(sigma_x cos phi + sigma_y sin phi + xi sigma_z).
struct ModelSpec {
  double delta = 1.0;  // level splitting
  double xi = 0.0;     // longitudinal (sigma_z) coupling weight
  double phi = 0.0;    // transverse coupling angle

  void validate() const;  // throws std::invalid_argument
};

// One x-axis gate pulse active on [tau_p1, tau_p2].  For a square pulse the
// operating frequency satisfies omega_p * (tau_p2 - tau_p1) = theta; a
// zero-width window stands for an instantaneous rotation (omega_p = inf).
// `fourier` holds optional sine-series amplitudes a_1..a_7 that reshape the
// drive to eps(t) = omega_p + sum_n a_n (n pi / tau_p) cos(n pi (t - tau_p1)
// / tau_p); every term integrates to zero, so the net angle stays theta.
struct PulseSpec {
  double theta = pi / 2;
  double tau_p1 = 0.0;
  double tau_p2 = 0.0;
  double omega_p = std::numeric_limits<double>::infinity();
  std::optional<std::array<double, 7>> fourier;

  static PulseSpec square(double theta, double tau_p1, double tau_p2);

  double duration() const { return tau_p2 - tau_p1; }
  bool instantaneous() const { return !(duration() > 0.0); }
  bool shaped() const;  // fourier present with a nonzero entry

  void validate() const;  // throws std::invalid_argument
};

enum class DissipatorKind {
  StaticNonMarkov,  // lambda_static, elapsed time since preparation
  StaticMarkov,     // lambda_markov, no time argument
  InstantGateDP,    // lambda_instant_dp, elapsed time since the gate
  InGate,           // lambda_in_gate, absolute time in [tau_p1, tau_p2]
  PostGatePulse,    // lambda_post_pulse / lambda_post_gate, absolute t >= tau_p2
  GeneralPulse,     // lambda_general_pulse, absolute time >= tau_p1
};

// Lambda(t) = int_0^t C(tau) e^{-i H0 tau} A e^{i H0 tau} dtau for a bath
// switched on at t = 0 (factorized preparation); Lambda(0) = 0.
Mat2 lambda_static(const ModelSpec& m, const Bath& b, double t);

// t -> infinity limit of lambda_static (fully aged bath).
Mat2 lambda_markov(const ModelSpec& m, const Bath& b);

// Instantaneous gate fired at t = 0 on the aged state; t is the elapsed
// time since the gate.  Collapses to lambda_markov for theta = 0 and again
// as t -> infinity.
Mat2 lambda_instant_dp(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                       double t);

// Square-pulse dissipator inside the window, tau_p1 <= t <= tau_p2:
// the rotating-frame-dressed aged term plus the window integral assembled
// from Gamma_w(t - tau_p1) at the nine frequencies
// {0, +-omega_p, +-delta, +-delta +- omega_p}.  Requires phi = 0 and an
// unshaped, finite-width pulse.
Mat2 lambda_in_gate(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                    double t);

// Memory of the drive window after the pulse, t >= tau_p2: the
// C_z sigma_z + C_+ sigma_+ + C_- sigma_- combination built from
// delta Gamma_w = Gamma_w(t - tau_p1) - Gamma_w(t - tau_p2).  Decays to
// zero as t - tau_p2 grows; identically zero for an instantaneous gate.
Mat2 lambda_post_pulse(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                       double t);

// Full dissipator after the pulse: lambda_static(t - tau_p2)
// + lambda_post_pulse + the gate-conjugated aged remainder.
Mat2 lambda_post_gate(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                      double t);

// Numerical dissipator for an arbitrary (possibly shaped) pulse, valid for
// every t >= tau_p1; reduces to lambda_in_gate / lambda_post_gate when all
// a_n = 0.  The window integral uses two-point Gauss panels of width
// min(0.1 / omega_c, tau_p / 200) with one halving; if the Richardson error
// estimate |I_{h/2} - I_h| / 15 exceeds 1e-6 a std::runtime_error is thrown.
// The second overload replaces the ModelSpec coupling by an explicit
// operator (e.g. A = sigma_z for pulse-shaping studies).
Mat2 lambda_general_pulse(const ModelSpec& m, const Bath& b,
                          const PulseSpec& p, double t);
Mat2 lambda_general_pulse(const ModelSpec& m, const Bath& b,
                          const PulseSpec& p, double t, const Mat2& coupling);

// Integrated drive angle Theta(t) = int_{tau_p1}^t eps(u) du, clamped to
// [0, theta] outside the window; the exact window propagator is
// U(t, tau_p1) = e^{-i H0 (t - tau_p1)} e^{-i Theta(t) sigma_x / 2}.
double pulse_angle(const PulseSpec& p, double t);

// Drive amplitude eps(t) (zero outside the window, omega_p inside for an
// unshaped pulse).
double pulse_amplitude(const PulseSpec& p, double t);

}  // namespace gatebath
