#pragma once

// Upper incomplete gamma function for complex order and argument.
//
// Region selection: a Kummer/Taylor series near the origin and along the
// negative real axis, a Lentz continued fraction in the mid ring away from
// the branch cut, and the Poincare asymptotic series for large |z| (valid up
// to the cut, which is where the bath formulas evaluate it).  The scaled
// variant returns exp(z) * Gamma(a, z) and never over/underflows for the
// frequency range used by the dissipators (|z| up to ~1e4 on the cut).

#include "gatebath/types.hpp"

namespace gatebath {

// Complex log-gamma (Lanczos, principal branch).
cplx lgamma_complex(cplx z);

// Complex gamma function.
cplx gamma_complex(cplx z);

// Gamma(a, z), principal branch; the sign of imag(z) selects the side of the
// cut on the negative real axis.  Throws std::domain_error at z = 0 with
// Re(a) <= 0.
cplx upper_gamma(cplx a, cplx z);

// exp(z) * Gamma(a, z); safe for large |z| near the cut.
cplx upper_gamma_scaled(cplx a, cplx z);

}  // namespace gatebath
