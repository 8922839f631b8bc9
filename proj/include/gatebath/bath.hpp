#pragma once

// Bosonic bath with spectral density J(w) = 2 pi lambda2 w^s / w_c^{s-1} e^{-w/w_c}.
//
// The central object is the cumulative frequency-resolved rate
//   Gamma_w(t) = \int_0^t e^{+i w tau} C(tau) dtau = J_w(t) + i S_w(t),
// evaluated in closed form at T = 0 (complex upper incomplete gamma) and by a
// Filon-type cumulative rule on a precomputed C(tau) grid at T > 0.  A Bath
// instance caches per-frequency state; treat it as read-mostly after a warmup
// call from a single thread.

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "gatebath/types.hpp"

namespace gatebath {

struct BathSpec {
  double lambda2 = 0.02;     // squared system-bath coupling
  double s = 1.0;            // spectral exponent (0 < s <= 3)
  double omega_c = 1.0;      // exponential cutoff
  double temperature = 0.0;  // in units of delta (k_B = 1)

  void validate() const;  // throws std::invalid_argument
};

class Bath {
 public:
  // horizon: largest |t| the finite-T tables must cover; ignored at T = 0
  // except as the asymptotic evaluation point fallback.
  explicit Bath(BathSpec spec, double horizon = 0.0);

  const BathSpec& spec() const { return spec_; }
  double horizon() const { return horizon_; }

  // C(tau); Hermitian under tau -> -tau.
  cplx bcf(double tau) const;

  // Gamma_w(t) in the +i exponent convention; t >= 0.
  cplx gamma(double omega, double t) const;

  // Gamma_w(t1) - Gamma_w(t2).
  cplx delta_gamma(double omega, double t1, double t2) const;

  // t -> infinity limit J_w + i S_w.  At T > 0 the imaginary part (and the
  // w = 0, s < 1 real part, which has no finite limit) is evaluated at the
  // table horizon.
  cplx gamma_asymptotic(double omega) const;

  // Asymptotic J_w in closed form: the bare density at T = 0, the
  // detailed-balance extension at T > 0.
  double spectral_density(double omega) const;

 private:
  struct OmegaCache;

  cplx gamma_zero_t(double omega, double t) const;
  cplx gamma_finite_t(double omega, double t) const;
  void ensure_c_grid() const;
  const std::vector<cplx>& cumulative_table(double omega) const;
  cplx thermal_sum(double tau) const;  // sum over exp(-k beta w) images

  BathSpec spec_;
  double horizon_ = 0.0;
  double step_ = 0.0;

  mutable std::mutex mu_;
  mutable std::vector<cplx> c_grid_;  // C(k * step_), finite T only
  mutable std::map<double, std::shared_ptr<const std::vector<cplx>>> cum_;
  mutable std::map<double, cplx> head_;  // cached scaled Gamma(-s, -w/wc)
};

// Bare (zero-temperature) spectral density with the Heaviside factor.
double spectral_density_bare(const BathSpec& spec, double omega);

// One-shot conveniences; construct a transient Bath internally.  Hot paths
// should hold a Bath instance instead (finite-T tables are expensive).
cplx bcf(const BathSpec& spec, double tau);
cplx gamma_t(const BathSpec& spec, double omega, double t);
cplx spectral_asymptotic(const BathSpec& spec, double omega);

}  // namespace gatebath
