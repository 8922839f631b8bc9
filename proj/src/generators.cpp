#include "gatebath/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace gatebath {

namespace {

// Clamp the (analytically zero) first row after checking it is numerically
// negligible relative to the generator scale.
Generator4 finalize(Mat4 g) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (g.row(0).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::runtime_error("generator: non-zero trace row");
  g.row(0).setZero();
  return g;
}

void require_phi_zero(const ModelSpec& m, const char* who) {
  m.validate();
  if (m.phi != 0.0)
    throw std::invalid_argument(std::string(who) + ": requires phi = 0");
}

void require_instant_quarter_turn(const ModelSpec& m, const PulseSpec& p,
                                  double t, const char* who) {
  require_phi_zero(m, who);
  p.validate();
  if (!p.instantaneous() || std::abs(p.theta - 0.5 * pi) > 1e-12)
    throw std::invalid_argument(std::string(who) +
                                ": requires an instantaneous pi/2 pulse");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument(std::string(who) + ": t must be >= 0");
}

// Bloch generator of the dissipative term for Lambda = ell . sigma and
// A = (1/2) avec . sigma with real avec:
//   dn/dt = 2 p (avec . n) - 2 (p . avec) n - 2 q x avec,  ell = p + i q.
Generator4 bloch_piece(const CVec3& ell, const Vec3& avec) {
  const Vec3 p = ell.real();
  const Vec3 q = ell.imag();
  Mat4 g = Mat4::Zero();
  g.block<3, 3>(1, 1) =
      2.0 * p * avec.transpose() - 2.0 * p.dot(avec) * Mat3::Identity();
  g.block<3, 1>(1, 0) = -2.0 * q.cross(avec);
  return g;
}

// Shared layout of the static/Markov closed form at phi = 0; g* are the
// cumulative rates at the three relevant frequencies.
Generator4 static_structure(double xi, cplx gd, cplx gm, cplx g0) {
  const double jd = gd.real(), sd = gd.imag();
  const double jm = gm.real(), sm = gm.imag();
  const double j0 = g0.real(), s0 = g0.imag();
  Mat4 g = Mat4::Zero();
  g(1, 0) = -0.5 * xi * (jd - jm);
  g(1, 1) = -xi * xi * j0;
  g(1, 3) = 0.5 * xi * (jd + jm);
  g(2, 0) = 0.5 * xi * (sd + sm - 2.0 * s0);
  g(2, 1) = 0.5 * (sm - sd);
  g(2, 2) = -xi * xi * j0 - 0.5 * (jd + jm);
  g(2, 3) = 0.5 * xi * (sm - sd);
  g(3, 0) = 0.5 * (jd - jm);
  g(3, 1) = xi * j0;
  g(3, 3) = -0.5 * (jd + jm);
  return g;
}

// Harmonic expansion X(t) = sum_k c[k + 2] exp(i k delta t), k in [-2, 2].
using Harmonic = std::array<Mat2, 5>;

Harmonic harmonic_zero() {
  Harmonic h;
  for (auto& c : h) c = Mat2::Zero();
  return h;
}

// Interaction-picture image of (1/2)(gd sigma_+ + gm sigma_- + xi g0 sigma_z):
// sigma_+ picks up exp(-i delta t), sigma_- exp(+i delta t).
Harmonic interaction_harmonics(double xi, cplx gd, cplx gm, cplx g0) {
  Harmonic h = harmonic_zero();
  h[1] = 0.5 * gd * ops::sigma_plus();
  h[3] = 0.5 * gm * ops::sigma_minus();
  h[2] = 0.5 * xi * g0 * ops::sigma_z();
  return h;
}

// DC (zero-harmonic) component of the vectorized dissipative superoperator
//   kron(A^T, L) + kron(conj(L), A) - kron(I, A L) - kron(A^T conj(L), I)
// for harmonic families L, A.  Transposition keeps the harmonic index,
// conjugation flips it.
Mat4c dc_superop(const Harmonic& l, const Harmonic& a) {
  const Mat2 id = ops::identity2();
  Mat4c d = Mat4c::Zero();
  Mat2 al = Mat2::Zero();   // (A L)_0
  Mat2 alc = Mat2::Zero();  // (A^T conj(L))_0
  for (int i = -2; i <= 2; ++i) {
    const Mat2& ai = a[i + 2];
    d += ops::kron2(ai.transpose(), l[2 - i]);
    d += ops::kron2(l[i + 2].conjugate(), ai);
    al += ai * l[2 - i];
    alc += ai.transpose() * l[i + 2].conjugate();
  }
  d -= ops::kron2(id, al);
  d -= ops::kron2(alc, id);
  return d;
}

}  // namespace

Generator4 dissipative_generator(const Mat2& lambda, const Mat2& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("dissipative_generator: A must be Hermitian");
  const Mat2 id = ops::identity2();
  const Mat4c d = ops::kron2(a.conjugate(), lambda) +
                  ops::kron2(lambda.conjugate(), a) -
                  ops::kron2(id, a * lambda) -
                  ops::kron2(a.conjugate() * lambda.conjugate(), id);
  return finalize(ops::bloch_basis_transform(d));
}

Generator4 free_generator(double delta) {
  if (!std::isfinite(delta))
    throw std::invalid_argument("free_generator: delta must be finite");
  Mat4 g = Mat4::Zero();
  g(1, 2) = delta;
  g(2, 1) = -delta;
  return g;
}

Generator4 static_generator_closed_form(const ModelSpec& m, const Bath& b,
                                        double t) {
  require_phi_zero(m, "static_generator_closed_form");
  return static_structure(m.xi, b.gamma(m.delta, t), b.gamma(-m.delta, t),
                          b.gamma(0.0, t));
}

Generator4 markov_generator_closed_form(const ModelSpec& m, const Bath& b) {
  require_phi_zero(m, "markov_generator_closed_form");
  return static_structure(m.xi, b.gamma_asymptotic(m.delta),
                          b.gamma_asymptotic(-m.delta),
                          b.gamma_asymptotic(0.0));
}

Generator4 pure_dephasing_generator(const ModelSpec& m, const Bath& b,
                                    double t) {
  m.validate();
  const double rate = m.xi * m.xi * b.gamma(0.0, t).real();
  Mat4 g = Mat4::Zero();
  g(1, 1) = -rate;
  g(2, 2) = -rate;
  return g;
}

std::array<Generator4, 7> dp_generator_decomposition(const ModelSpec& m,
                                                     const Bath& b,
                                                     const PulseSpec& p,
                                                     double t) {
  require_instant_quarter_turn(m, p, t, "dp_generator_decomposition");
  const double d = m.delta;
  const double xi = m.xi;
  const Vec3 avec = ops::coupling_axis(xi, 0.0);

  const cplx gd = b.gamma(d, t);
  const cplx gm = b.gamma(-d, t);
  const cplx g0 = b.gamma(0.0, t);
  const cplx dgd = b.gamma_asymptotic(d) - gd;
  const cplx dgm = b.gamma_asymptotic(-d) - gm;
  const cplx dg0 = b.gamma_asymptotic(0.0) - g0;
  const cplx e1 = std::exp(iu * d * t);  // exp(+i delta t)
  const cplx e2 = e1 * e1;

  std::array<Generator4, 7> out;
  // Static generator, split into transverse (sigma+-) and longitudinal
  // (sigma_z) parts at the current rates.
  out[0] = bloch_piece(
      CVec3(0.25 * (gd + gm), 0.25 * iu * (gd - gm), cplx(0.0)), avec);
  out[3] = bloch_piece(CVec3(cplx(0.0), cplx(0.0), 0.5 * xi * g0), avec);
  // Undressed memory terms at +-delta.
  out[1] = bloch_piece(0.125 * dgd * CVec3(1.0, iu, 0.0), avec);
  out[2] = bloch_piece(0.125 * dgm * CVec3(1.0, -iu, 0.0), avec);
  // Gate-dressed memory terms: a pi/2 x-rotation maps sigma_-+ onto mixtures
  // of sigma_+, sigma_-, sigma_z with phases exp(-+ i delta t).
  out[4] = bloch_piece(0.125 * dgm * e2 * CVec3(1.0, iu, 0.0) -
                           0.25 * iu * dgm * e1 * CVec3(0.0, 0.0, 1.0),
                       avec);
  out[5] = bloch_piece(0.125 * dgd * std::conj(e2) * CVec3(1.0, -iu, 0.0) +
                           0.25 * iu * dgd * std::conj(e1) *
                               CVec3(0.0, 0.0, 1.0),
                       avec);
  // Gate-dressed longitudinal memory term.
  out[6] = bloch_piece(-0.5 * xi * dg0 *
                           CVec3(std::sin(d * t), std::cos(d * t), 0.0),
                       avec);
  return out;
}

std::pair<Generator4, Generator4> coarse_grained_generators(
    const ModelSpec& m, const Bath& b, const PulseSpec& p, double t) {
  require_instant_quarter_turn(m, p, t, "coarse_grained_generators");
  const double d = m.delta;
  const double xi = m.xi;

  const Harmonic a = interaction_harmonics(xi, 1.0, 1.0, 1.0);
  const Harmonic post_l = interaction_harmonics(
      xi, b.gamma(d, t), b.gamma(-d, t), b.gamma(0.0, t));
  Harmonic pre_l = interaction_harmonics(
      xi, b.gamma_asymptotic(d) - b.gamma(d, t),
      b.gamma_asymptotic(-d) - b.gamma(-d, t),
      b.gamma_asymptotic(0.0) - b.gamma(0.0, t));
  const Mat2 uc = ops::gate_unitary(p.theta);
  for (auto& c : pre_l) c = uc * c * uc.adjoint();

  const Generator4 pre = finalize(ops::bloch_basis_transform(
      dc_superop(pre_l, a)));
  const Generator4 post = finalize(ops::bloch_basis_transform(
      dc_superop(post_l, a)));
  return {pre, post};
}

std::pair<cplx, cplx> markov_coherence_eigenvalues(const ModelSpec& m,
                                                   const Bath& b) {
  m.validate();
  if (m.xi != 0.0 && b.spec().temperature > 0.0)
    throw std::invalid_argument(
        "markov_coherence_eigenvalues: coherence block couples to the "
        "population unless xi = 0 or T = 0");
  const cplx gd = b.gamma_asymptotic(m.delta);
  const cplx gm = b.gamma_asymptotic(-m.delta);
  const double jt = gd.real() + gm.real();
  const double ds = gm.imag() - gd.imag();
  const double disc = m.delta * (m.delta - 0.5 * ds) - jt * jt / 16.0;
  const cplx root = std::sqrt(cplx(disc, 0.0));
  return {-0.25 * jt + iu * root, -0.25 * jt - iu * root};
}

}  // namespace gatebath
