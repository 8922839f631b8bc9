#pragma once

// Time integration of the Bloch master equation across the three phases
// (equilibrated pre-gate, driven window, post-gate), trajectory recording,
// the positivity audit, and the relaxation-delay extraction.
//
// Integration always advances the affine vector v = (1, n) with classic RK4
// and the phase-appropriate dissipator at every stage time.  Schrodinger-
// picture runs use the full generator free + D; coarse-grained runs integrate
// the interaction-picture generators directly.

#include <optional>
#include <vector>

#include "gatebath/bath.hpp"
#include "gatebath/dissipators.hpp"
#include "gatebath/generators.hpp"
#include "gatebath/operators.hpp"
#include "gatebath/types.hpp"

namespace gatebath {

enum class Frame { Schrodinger, Interaction };

// Evolution family for comparisons at fixed model/bath/pulse:
//   GatePlan       equilibrate, drive, relax (dynamically prepared),
//   Factorized     gate-rotated start, static dissipator aging from zero,
//   Markov         gate-rotated start, asymptotic-rate dissipator,
//   CoarseGrained  gate-rotated start, secular interaction-picture pair.
// All but GatePlan require an instantaneous pulse at t = 0.
enum class RunKind { GatePlan, Factorized, Markov, CoarseGrained };

struct SimConfig {
  ModelSpec model;
  BathSpec bath;
  PulseSpec pulse;
  double t_end = 100.0;
  double dt = 0.01;
  int record_stride = 1;
  Frame frame = Frame::Schrodinger;

  // dt > 0 and small enough to resolve both the splitting and the drive:
  // dt <= 0.02 min(2 pi / delta, 2 pi / omega_p); t_end >= tau_p2.
  void validate() const;  // throws std::invalid_argument
};

struct Trajectory {
  std::vector<double> times;    // strictly increasing, starts at 0
  std::vector<Vec3> bloch;      // components in the requested frame
  std::vector<double> eps_min;  // (1 - |n|)/2, the smaller rho eigenvalue
  std::size_t size() const { return times.size(); }
};

struct PositivityReport {
  double min_eps = 0.0;
  double argmin_time = 0.0;
  bool pass = true;  // min_eps >= -0.02
  std::optional<double> first_negative_time;
};

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Fixed point of free + Markov generators, trace-normalized.  Throws
// std::runtime_error when the null space is degenerate (e.g. lambda2 = 0).
Vec3 asymptotic_state(const ModelSpec& m, const Bath& b);

// Integrate cfg under the given evolution family.  The overload without a
// bath constructs one with a horizon covering t_end.
Trajectory integrate(const SimConfig& cfg, RunKind kind = RunKind::GatePlan);
Trajectory integrate(const SimConfig& cfg, const Bath& b,
                     RunKind kind = RunKind::GatePlan);

// Max |n_dt - n_dt/2| over recording times shared by a run at dt and one at
// dt/2 (doubled stride); the step-halving convergence gate.
double convergence_gap(const SimConfig& cfg, RunKind kind = RunKind::GatePlan);

PositivityReport positivity_audit(const Trajectory& traj);

// Least-squares line through <s_z(t)> = n_z/2 for samples with t in [t0, t1].
// Throws std::invalid_argument when fewer than two samples fall inside.
LineFit fit_sz_line(const Trajectory& traj, double t0, double t1);

// Horizontal offset between the late-time linear segment of <s_z> and the
// Markovian reference line anchored at the trajectory state nearest
// gate_time.  Positive values mean relaxation lags the Markovian flow.
double relaxation_delay(const Trajectory& traj, const ModelSpec& m,
                        const Bath& b, double gate_time, double fit_t0,
                        double fit_t1);

}  // namespace gatebath
