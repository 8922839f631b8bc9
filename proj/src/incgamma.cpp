#include "gatebath/incgamma.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gatebath {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 500;

// Lanczos g = 7, 9-term coefficient set.
const double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

cplx lgamma_core(cplx z) {
  // Requires Re(z) >= 0.5.
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + cplx(i - 1, 0));
  const cplx t = z + 6.5;
  return 0.5 * std::log(2.0 * pi) + (z - 0.5) * std::log(t) - t + std::log(x);
}

bool near_nonpositive_int(cplx a, long& n, cplx& delta) {
  const double r = std::round(a.real());
  if (r > 0.5) return false;
  delta = a - r;
  if (std::abs(delta) < 0.01) {
    n = static_cast<long>(-r);
    return true;
  }
  return false;
}

cplx expm1c(cplx w) {
  if (std::abs(w) > 0.5) return std::exp(w) - 1.0;
  cplx term = w, sum = w;
  for (int k = 2; k < 32; ++k) {
    term *= w / static_cast<double>(k);
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return sum;
}

// Kummer series for the lower incomplete gamma, stable on Re(z) <= 0:
// gamma(a, z) = z^a / a * M(a, a+1, -z).
cplx lower_gamma_left(cplx a, cplx z) {
  cplx term = 1.0, sum = 1.0;
  const cplx w = -z;
  for (int n = 0; n < kMaxIter; ++n) {
    term *= (a + static_cast<double>(n)) / (a + static_cast<double>(n + 1)) * w /
            static_cast<double>(n + 1);
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return std::pow(z, a) / a * sum;
}

// gamma(a, z) = z^a e^{-z} / a * M(1, a+1, z); positive terms on Re(z) >= 0.
cplx lower_gamma_right(cplx a, cplx z) {
  cplx term = 1.0, sum = 1.0;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= z / (a + static_cast<double>(n));
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return std::pow(z, a) * std::exp(-z) / a * sum;
}

// Gamma(a, z) for a within 0.01 of a nonpositive integer -n (delta = a + n).
// The gamma-function pole and the k = n term of the lower series are combined
// analytically, leaving a difference quotient that stays accurate through the
// pole itself:
//   Gamma(a) - (-1)^n z^{a+n} / (n! delta)
//     = ((-1)^n / n!) [expm1(log rho) - expm1(delta log z)] / delta,
//   rho(delta) = Gamma(1 + delta) prod_{j<=n} j / (j - delta).
cplx upper_near_pole(cplx a, long n, cplx delta, cplx z) {
  static const double zeta[9] = {0.0,
                                 0.0,
                                 1.6449340668482264,
                                 1.2020569031595943,
                                 1.0823232337111382,
                                 1.0369277551433699,
                                 1.0173430619844491,
                                 1.0083492773819228,
                                 1.0040773561979443};
  const double euler = 0.57721566490153286;
  double h[9] = {0};  // h[m] = sum_{j<=n} j^{-m}
  double fact = 1.0;
  for (long j = 1; j <= n; ++j) {
    double p = 1.0 / static_cast<double>(j);
    for (int m = 1; m <= 8; ++m) {
      h[m] += p;
      p /= static_cast<double>(j);
    }
    fact *= static_cast<double>(j);
  }
  cplx lr = 0.0;  // log rho as a series in delta
  for (int m = 8; m >= 2; --m)
    lr = (lr + (h[m] + ((m % 2) ? -zeta[m] : zeta[m])) / static_cast<double>(m)) *
         delta;
  lr = (lr + (h[1] - euler)) * delta;
  const cplx L = std::log(z);
  const double sgn = (n % 2) ? -1.0 : 1.0;
  cplx bracket;
  if (delta == cplx(0.0, 0.0))
    bracket = (sgn / fact) * ((h[1] - euler) - L);
  else
    bracket = (sgn / fact) * (expm1c(lr) - expm1c(delta * L)) / delta;
  // remaining lower series with the k = n term removed
  cplx t = 1.0, s = 0.0;
  const double guard = std::abs(z) + 8.0;
  for (int k = 0; k < kMaxIter; ++k) {
    if (k != n) {
      const cplx add = t / (a + static_cast<double>(k));
      s += add;
      if (k > guard && std::abs(add) < kEps * (1.0 + std::abs(s))) break;
    }
    t *= -z / static_cast<double>(k + 1);
  }
  return bracket - std::exp(a * L) * s;
}

// Small-|z| branch, unscaled.
cplx upper_small(cplx a, cplx z) {
  long n = 0;
  cplx delta;
  if (near_nonpositive_int(a, n, delta)) return upper_near_pole(a, n, delta, z);
  const long m = (a.real() > 0.1) ? 0 : static_cast<long>(std::ceil(0.1 - a.real()));
  const cplx a0 = a + static_cast<double>(m);
  const cplx lg = (z.real() >= 0.0) ? lower_gamma_right(a0, z) : lower_gamma_left(a0, z);
  cplx g = gamma_complex(a0) - lg;
  const cplx ez = std::exp(-z);
  for (long k = 1; k <= m; ++k) {
    const cplx ak = a0 - static_cast<double>(k);
    g = (g - std::pow(z, ak) * ez) / ak;
  }
  return g;
}

// Lentz continued fraction, scaled: returns z^a * CF = exp(z) Gamma(a, z).
cplx upper_cf_scaled(cplx a, cplx z) {
  const double tiny = 1e-300;
  cplx b = z + 1.0 - a;
  cplx c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const cplx an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const cplx del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::pow(z, a) * h;
}

// Poincare expansion, scaled; valid for large |z| including the cut sides.
cplx upper_asymptotic_scaled(cplx a, cplx z) {
  cplx term = 1.0, sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= (a - static_cast<double>(k)) / z;
    const double mag = std::abs(term);
    if (mag > prev) break;  // truncate at the smallest term
    sum += term;
    prev = mag;
    if (mag < kEps * std::abs(sum)) break;
  }
  return std::pow(z, a - 1.0) * sum;
}

}  // namespace

cplx lgamma_complex(cplx z) {
  if (z.real() < 0.5) {
    // Reflection; log(sin) via the principal branch is adequate away from poles.
    return std::log(pi) - std::log(std::sin(pi * z)) - lgamma_core(1.0 - z);
  }
  return lgamma_core(z);
}

cplx gamma_complex(cplx z) { return std::exp(lgamma_complex(z)); }

cplx upper_gamma_scaled(cplx a, cplx z) {
  if (z == cplx(0.0, 0.0)) {
    if (a.real() <= 0.0) throw std::domain_error("upper_gamma: pole at z = 0");
    return gamma_complex(a);
  }
  const double az = std::abs(z);
  if (az >= 30.0) return upper_asymptotic_scaled(a, z);
  if (az >= 5.0 && std::abs(std::arg(z)) <= 2.0) return upper_cf_scaled(a, z);
  return std::exp(z) * upper_small(a, z);
}

cplx upper_gamma(cplx a, cplx z) { return std::exp(-z) * upper_gamma_scaled(a, z); }

}  // namespace gatebath
