#include "gatebath/bath.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gatebath/incgamma.hpp"

namespace gatebath {
namespace {

constexpr int kThermalDirectTerms = 24;

// Integrates u^j e^{i w u} over [0, x] for j = 0, 1, 2.  Series branch keeps
// the small-phase regime free of cancellation.
std::array<cplx, 3> phase_moments(double omega, double x) {
  std::array<cplx, 3> m;
  if (std::abs(omega * x) < 0.5) {
    for (int j = 0; j < 3; ++j) {
      cplx term = std::pow(x, j + 1) / double(j + 1);
      cplx sum = term;
      for (int k = 1; k < 40; ++k) {
        term *= iu * omega * x / double(k);
        cplx add = term * double(j + 1) / double(j + k + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
      }
      m[j] = sum;
    }
    return m;
  }
  const cplx iw = iu * omega;
  const cplx e = std::polar(1.0, omega * x);
  m[0] = (e - 1.0) / iw;
  m[1] = e * x / iw - (e - 1.0) / (iw * iw);
  m[2] = e * x * x / iw - 2.0 * x * e / (iw * iw) + 2.0 * (e - 1.0) / (iw * iw * iw);
  return m;
}

// Quadratic through (0,c0), (h,c1), (2h,c2) integrated against e^{i w u}
// from 0 to x (x <= 2h), using precomputed moments for that x.
cplx filon_panel(const cplx& c0, const cplx& c1, const cplx& c2, double h,
                 const std::array<cplx, 3>& m) {
  const cplx a2 = (c0 - 2.0 * c1 + c2) / (2.0 * h * h);
  const cplx a1 = (-3.0 * c0 + 4.0 * c1 - c2) / (2.0 * h);
  return c0 * m[0] + a1 * m[1] + a2 * m[2];
}

}  // namespace

void BathSpec::validate() const {
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2))
    throw std::invalid_argument("bath: lambda2 must be finite and >= 0");
  if (!(s > 0.0) || !(s <= 3.0))
    throw std::invalid_argument("bath: spectral exponent s must lie in (0, 3]");
  if (!(omega_c > 0.0) || !std::isfinite(omega_c))
    throw std::invalid_argument("bath: omega_c must be finite and > 0");
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("bath: temperature must be finite and >= 0");
}

Bath::Bath(BathSpec spec, double horizon) : spec_(spec) {
  spec_.validate();
  step_ = 1.0 / (200.0 * spec_.omega_c);
  double base = 1000.0 / spec_.omega_c;
  horizon_ = std::max(base, horizon);
  // keep an even panel count for the paired Filon rule
  std::size_t n = static_cast<std::size_t>(std::ceil(horizon_ / step_));
  if (n % 2) ++n;
  horizon_ = double(n) * step_;
}

cplx Bath::thermal_sum(double tau) const {
  const double sigma = spec_.s + 1.0;
  const double beta = 1.0 / spec_.temperature;
  const cplx c(1.0 / spec_.omega_c, -tau);
  cplx sum = 0.0;
  for (int k = 1; k <= kThermalDirectTerms; ++k)
    sum += std::exp(-sigma * std::log(c + double(k) * beta));
  const cplx u = c + double(kThermalDirectTerms + 1) * beta;
  const cplx lu = std::log(u);
  const cplx um = std::exp(-sigma * lu);  // u^{-sigma}
  sum += std::exp((1.0 - sigma) * lu) / (beta * (sigma - 1.0));
  sum += 0.5 * um;
  sum += sigma * beta * um / (12.0 * u);
  sum -= sigma * (sigma + 1.0) * (sigma + 2.0) * beta * beta * beta * um /
         (720.0 * u * u * u);
  return sum;
}

cplx Bath::bcf(double tau) const {
  const double at = std::abs(tau);
  const double pref = 2.0 * spec_.lambda2 * spec_.omega_c * spec_.omega_c *
                      std::tgamma(spec_.s + 1.0);
  cplx c = pref * std::exp(-(spec_.s + 1.0) *
                           std::log(cplx(1.0, spec_.omega_c * at)));
  if (spec_.temperature > 0.0) {
    const double tpref = 4.0 * spec_.lambda2 *
                         std::pow(spec_.omega_c, 1.0 - spec_.s) *
                         std::tgamma(spec_.s + 1.0);
    c += tpref * thermal_sum(at).real();
  }
  return tau >= 0.0 ? c : std::conj(c);
}

cplx Bath::gamma_zero_t(double omega, double t) const {
  const double l2 = spec_.lambda2, s = spec_.s, wc = spec_.omega_c;
  if (omega == 0.0) {
    const cplx decay = std::exp(-s * std::log(cplx(1.0, wc * t)));
    return -2.0 * iu * l2 * wc * std::tgamma(s) * (1.0 - decay);
  }
  // w -> w + i0 puts z = -w/wc just below the cut for w > 0
  const cplx z1(-omega / wc, omega > 0.0 ? -0.0 : 0.0);
  const cplx z2 = z1 - iu * omega * t;
  cplx head;
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = head_.find(omega);
    if (it == head_.end())
      it = head_.emplace(omega, upper_gamma_scaled(-s, z1)).first;
    head = it->second;
  }
  const cplx tail = std::polar(1.0, omega * t) * upper_gamma_scaled(-s, z2);
  const cplx pref =
      -2.0 * iu * l2 * std::tgamma(s + 1.0) * wc * std::exp(s * std::log(z1));
  return pref * (head - tail);
}

void Bath::ensure_c_grid() const {
  if (!c_grid_.empty()) return;
  const std::size_t n = static_cast<std::size_t>(std::llround(horizon_ / step_));
  std::vector<cplx> grid(n + 1);
  for (std::size_t k = 0; k <= n; ++k) grid[k] = bcf(double(k) * step_);
  c_grid_ = std::move(grid);
}

const std::vector<cplx>& Bath::cumulative_table(double omega) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = cum_.find(omega);
  if (it != cum_.end()) return *it->second;
  ensure_c_grid();
  const std::size_t n = c_grid_.size() - 1;
  auto table = std::make_shared<std::vector<cplx>>(n + 1);
  auto& cum = *table;
  const auto m1 = phase_moments(omega, step_);
  const auto m2 = phase_moments(omega, 2.0 * step_);
  cum[0] = 0.0;
  for (std::size_t p = 0; p + 2 <= n; p += 2) {
    const cplx phase = std::polar(1.0, omega * double(p) * step_);
    const cplx& c0 = c_grid_[p];
    const cplx& c1 = c_grid_[p + 1];
    const cplx& c2 = c_grid_[p + 2];
    cum[p + 1] = cum[p] + phase * filon_panel(c0, c1, c2, step_, m1);
    cum[p + 2] = cum[p] + phase * filon_panel(c0, c1, c2, step_, m2);
  }
  it = cum_.emplace(omega, std::move(table)).first;
  return *it->second;
}

cplx Bath::gamma_finite_t(double omega, double t) const {
  if (t > horizon_ * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "bath: requested Gamma at t = " << t
       << " beyond table horizon " << horizon_
       << "; construct Bath with a larger horizon";
    throw std::runtime_error(os.str());
  }
  t = std::min(t, horizon_);
  const auto& cum = cumulative_table(omega);
  const std::size_t n = cum.size() - 1;
  std::size_t k = static_cast<std::size_t>(t / step_);
  if (k > n - 2) k = n - 2;
  const double du = t - double(k) * step_;
  if (du == 0.0) return cum[k];
  const auto m = phase_moments(omega, du);
  const cplx phase = std::polar(1.0, omega * double(k) * step_);
  return cum[k] +
         phase * filon_panel(c_grid_[k], c_grid_[k + 1], c_grid_[k + 2], step_, m);
}

cplx Bath::gamma(double omega, double t) const {
  if (t < 0.0) {
    if (t > -1e-12)
      t = 0.0;
    else
      throw std::invalid_argument("bath: gamma requires t >= 0");
  }
  if (t == 0.0) return 0.0;
  return spec_.temperature == 0.0 ? gamma_zero_t(omega, t)
                                  : gamma_finite_t(omega, t);
}

cplx Bath::delta_gamma(double omega, double t1, double t2) const {
  return gamma(omega, t1) - gamma(omega, t2);
}

cplx Bath::gamma_asymptotic(double omega) const {
  const double l2 = spec_.lambda2, s = spec_.s, wc = spec_.omega_c;
  if (spec_.temperature == 0.0) {
    if (omega == 0.0) return -2.0 * iu * l2 * wc * std::tgamma(s);
    const cplx z1(-omega / wc, omega > 0.0 ? -0.0 : 0.0);
    cplx head;
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = head_.find(omega);
      if (it == head_.end())
        it = head_.emplace(omega, upper_gamma_scaled(-s, z1)).first;
      head = it->second;
    }
    return -2.0 * iu * l2 * std::tgamma(s + 1.0) * wc *
           std::exp(s * std::log(z1)) * head;
  }
  const cplx at_horizon = gamma_finite_t(omega, horizon_);
  if (omega == 0.0 && s < 1.0) return at_horizon;  // no finite limit; regularized
  return cplx(spectral_density(omega), at_horizon.imag());
}

double Bath::spectral_density(double omega) const {
  const double bare = spectral_density_bare(spec_, std::abs(omega));
  if (spec_.temperature == 0.0) return omega > 0.0 ? bare : 0.0;
  const double beta = 1.0 / spec_.temperature;
  if (omega == 0.0) {
    if (spec_.s > 1.0) return 0.0;
    if (spec_.s == 1.0)
      return 2.0 * pi * spec_.lambda2 * spec_.temperature;
    return gamma_finite_t(0.0, horizon_).real();  // regularized
  }
  const double x = beta * std::abs(omega);
  const double nbar = x > 700.0 ? 0.0 : 1.0 / std::expm1(x);
  return omega > 0.0 ? bare * (nbar + 1.0) : bare * nbar;
}

double spectral_density_bare(const BathSpec& spec, double omega) {
  if (omega <= 0.0) return 0.0;
  return 2.0 * pi * spec.lambda2 * std::pow(omega, spec.s) *
         std::pow(spec.omega_c, 1.0 - spec.s) * std::exp(-omega / spec.omega_c);
}

cplx bcf(const BathSpec& spec, double tau) { return Bath(spec).bcf(tau); }

cplx gamma_t(const BathSpec& spec, double omega, double t) {
  return Bath(spec, t).gamma(omega, t);
}

cplx spectral_asymptotic(const BathSpec& spec, double omega) {
  return Bath(spec).gamma_asymptotic(omega);
}

}  // namespace gatebath
