#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gatebath/dissipators.hpp"

using namespace gatebath;

namespace {

// ---- brute-force oracle ----------------------------------------------------
//
// Lambda(t) rebuilt from first principles: composite Simpson over
//   int_0^t C(tau) U(t, t - tau) A U(t - tau, t) dtau
// with the exact piecewise propagator U, plus the aged remainder for
// emissions before t = 0 (free evolution only), expressed through Gamma
// tails taken from the bath API.  Nothing here touches the nine-frequency
// or C_z/C_+- assemblies under test.

double max_diff(const Mat2& a, const Mat2& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

struct Oracle {
  ModelSpec m;
  PulseSpec p;
  const Bath& bath;
  Mat2 a;
  double h;
  std::vector<Mat2> w;  // full propagator W(k h) from time 0
  std::vector<cplx> c;  // C(k h)

  Oracle(const ModelSpec& m_, const PulseSpec& p_, const Bath& b_,
         const Mat2& a_, double tmax, double h_ = 1e-3)
      : m(m_), p(p_), bath(b_), a(a_), h(h_) {
    const int n = static_cast<int>(std::lround(tmax / h)) + 1;
    w.reserve(n);
    c.reserve(n);
    for (int k = 0; k < n; ++k) {
      w.push_back(propagator(k * h));
      c.push_back(bath.bcf(k * h));
    }
  }

  // W(t): full propagator from time 0.  The drive axis is anchored at the
  // window start, so the driven segment is e^{-i H0 (t - tau_p1)}
  // e^{-i Theta(t) sigma_x / 2} right-multiplied by the free stretch.
  Mat2 propagator(double t) const {
    return ops::free_propagator(m.delta, t - p.tau_p1) *
           ops::gate_unitary(pulse_angle(p, t)) *
           ops::free_propagator(m.delta, p.tau_p1);
  }

  // Aged remainder: int_t^inf C picks Gamma tails on the sigma decomposition
  // of A, conjugated back through W(t).
  Mat2 tail(double t) const {
    auto tg = [&](double omega) {
      return bath.gamma_asymptotic(omega) - bath.gamma(omega, t);
    };
    Mat2 inner = Mat2::Zero();
    inner(0, 1) = a(0, 1) * tg(m.delta);
    inner(1, 0) = a(1, 0) * tg(-m.delta);
    const cplx gz = 0.5 * (a(0, 0) - a(1, 1)) * tg(0.0);
    const cplx g1 = 0.5 * (a(0, 0) + a(1, 1)) * tg(0.0);
    inner(0, 0) = g1 + gz;
    inner(1, 1) = g1 - gz;
    const Mat2 wt = w[index(t)];
    const Mat2 r = wt * ops::free_propagator(m.delta, t).adjoint();
    return r * inner * r.adjoint();
  }

  int index(double t) const {
    const int k = static_cast<int>(std::lround(t / h));
    REQUIRE(std::abs(k * h - t) < 1e-12);
    return k;
  }

  // t must be an even multiple of h (composite Simpson).
  Mat2 lambda(double t) const {
    const int big_k = index(t);
    REQUIRE(big_k % 2 == 0);
    const Mat2 wt = w[big_k];
    Mat2 acc = Mat2::Zero();
    if (big_k > 0) {
      for (int k = 0; k <= big_k; ++k) {
        const Mat2& wu = w[big_k - k];
        const Mat2 g = wu.adjoint() * a * wu;
        const double weight =
            (k == 0 || k == big_k) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += (weight * c[k]) * g;
      }
      acc *= h / 3.0;
    }
    return wt * acc * wt.adjoint() + tail(t);
  }
};

ModelSpec model(double xi, double phi = 0.0) {
  ModelSpec m;
  m.xi = xi;
  m.phi = phi;
  return m;
}

BathSpec bspec(double lambda2, double s = 1.0, double temperature = 0.0) {
  BathSpec b;
  b.lambda2 = lambda2;
  b.s = s;
  b.temperature = temperature;
  return b;
}

}  // namespace

// ---- oracle sanity ----------------------------------------------------------

TEST_CASE("oracle propagator solves the driven Schrodinger equation") {
  const ModelSpec m = model(4.0);
  PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);

  SUBCASE("square pulse") {}
  SUBCASE("shaped pulse") {
    p.fourier = {{-1.06, 0.44, -0.12, 0.11, -0.24, -0.30, 0.38}};
  }

  const Bath b(bspec(0.02));
  const Oracle o(m, p, b, ops::coupling_operator(m.xi), 8.0);
  const double eps_fd = 1e-6;
  for (double t : {2.5, 3.7, 4.2, 4.9, 6.0}) {
    const Mat2 wp = o.propagator(t + eps_fd), wm = o.propagator(t - eps_fd);
    const Mat2 h_num = iu * ((wp - wm) / (2 * eps_fd)) *
                       o.propagator(t).adjoint();
    const Mat2 u0 = ops::free_propagator(m.delta, t - p.tau_p1);
    const Mat2 h_ref = -0.5 * m.delta * ops::sigma_z() +
                       0.5 * pulse_amplitude(p, t) *
                           (u0 * ops::sigma_x() * u0.adjoint());
    CHECK(max_diff(h_num, h_ref) < 1e-6);
  }
}

TEST_CASE("oracle reproduces the aged Markovian value before the window") {
  const ModelSpec m = model(4.0);
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  const Bath b(bspec(0.02));
  const Oracle o(m, p, b, ops::coupling_operator(m.xi), 3.0);
  const Mat2 mk = lambda_markov(m, b);
  for (double t : {0.5, 2.0, 2.998})
    CHECK(max_diff(o.lambda(t), mk) < 1e-8);
}

// ---- static and Markovian dissipators ---------------------------------------

TEST_CASE("static dissipator matches direct kernel quadrature") {
  // Simpson over the raw 2x2 integrand C(tau) U0(tau) A U0(-tau); no sigma
  // decomposition anywhere.
  auto direct = [](const ModelSpec& m, const Bath& b, double t) {
    const Mat2 a = ops::coupling_operator(m.xi, m.phi);
    const int n = 20000;
    const double h = t / n;
    Mat2 acc = Mat2::Zero();
    for (int k = 0; k <= n; ++k) {
      const double tau = k * h;
      const Mat2 u = ops::free_propagator(m.delta, tau);
      const double weight = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      acc += (weight * b.bcf(tau)) * (u * a * u.adjoint());
    }
    return Mat2((h / 3.0) * acc);
  };

  const Bath b(bspec(0.02));
  for (const ModelSpec& m : {model(0.0), model(4.0, 0.7)})
    for (double t : {0.5, 2.0, 10.0})
      CHECK(max_diff(lambda_static(m, b, t), direct(m, b, t)) < 1e-8);
}

TEST_CASE("static dissipator vanishes at t = 0 and ages to the Markov form") {
  const Bath b(bspec(0.02));
  CHECK(lambda_static(model(2.0, 0.3), b, 0.0).cwiseAbs().maxCoeff() == 0.0);
  // Transverse tails decay as t^{-1-s}; the sigma_z (zero-frequency) tail
  // only as t^{-s}, so the tight bound applies to the xi = 0 component.
  CHECK(max_diff(lambda_static(model(0.0, 0.3), b, 1e3),
                 lambda_markov(model(0.0, 0.3), b)) < 1e-6);
  CHECK(max_diff(lambda_static(model(2.0, 0.3), b, 1e3),
                 lambda_markov(model(2.0, 0.3), b)) < 1e-4);
}

TEST_CASE("Markovian dissipator values at zero temperature") {
  const ModelSpec m = model(0.0);
  const Bath b(bspec(0.02));
  const Mat2 mk = lambda_markov(m, b);
  // Only the positive-frequency line survives at T = 0: the sigma_- and
  // sigma_z entries carry no real part.
  CHECK(2.0 * mk(0, 1).real() == doctest::Approx(0.046234).epsilon(1e-4));
  CHECK(std::abs(mk(1, 0).real()) < 1e-12);
  CHECK(std::abs(mk(0, 0)) < 1e-12);

  const Bath off(bspec(0.0));
  CHECK(lambda_markov(model(3.0, 0.2), off).cwiseAbs().maxCoeff() < 1e-15);
}

// ---- instantaneous gate ------------------------------------------------------

TEST_CASE("instant-gate dissipator limits") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  const PulseSpec flat = PulseSpec::square(0.0, 1.0, 1.0);
  const PulseSpec gate = PulseSpec::square(pi / 2, 1.0, 1.0);
  const Mat2 mk = lambda_markov(m, b);

  for (double t : {0.0, 0.7, 5.0, 400.0})
    CHECK(max_diff(lambda_instant_dp(m, b, flat, t), mk) < 1e-12);

  const Mat2 uc = ops::gate_unitary(gate.theta);
  CHECK(max_diff(lambda_instant_dp(m, b, gate, 0.0),
                 uc * mk * uc.adjoint()) < 1e-12);
  // sigma_z tail ~ t^{-s} dominates the approach for xi != 0.
  CHECK(max_diff(lambda_instant_dp(m, b, gate, 1e3), mk) < 2e-4);
  const ModelSpec mt = model(0.0);
  CHECK(max_diff(lambda_instant_dp(mt, b, gate, 1e3), lambda_markov(mt, b)) <
        1e-6);
}

TEST_CASE("post-gate assembly degenerates to the instant form for a "
          "zero-width window") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  const PulseSpec gate = PulseSpec::square(pi / 2, 2.0, 2.0);
  for (double u : {0.0, 0.4, 3.0})
    CHECK(max_diff(lambda_post_gate(m, b, gate, 2.0 + u),
                   lambda_instant_dp(m, b, gate, u)) < 1e-14);
}

// ---- square pulse vs oracle ---------------------------------------------------

TEST_CASE("in-gate dissipator starts from the aged value") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  CHECK(max_diff(lambda_in_gate(m, b, p, 3.0), lambda_markov(m, b)) < 1e-12);
}

TEST_CASE("square-pulse dissipator matches the brute-force quadrature") {
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);

  for (double xi : {0.0, 4.0}) {
    CAPTURE(xi);
    const ModelSpec m = model(xi);
    const Bath b(bspec(0.02));
    const Oracle o(m, p, b, ops::coupling_operator(m.xi), 31.0);
    for (double t : {3.25, 4.0, 5.0})
      CHECK(max_diff(lambda_in_gate(m, b, p, t), o.lambda(t)) < 1e-7);
    for (double t : {5.5, 10.0, 30.0})
      CHECK(max_diff(lambda_post_gate(m, b, p, t), o.lambda(t)) < 1e-7);
  }
}

TEST_CASE("pi-flip post-gate dissipator matches the brute-force quadrature") {
  const PulseSpec p = PulseSpec::square(pi, 3.0, 5.0);
  const ModelSpec m = model(0.0);
  const Bath b(bspec(0.01));
  const Oracle o(m, p, b, ops::coupling_operator(m.xi), 13.0);
  for (double t : {3.5, 4.5})
    CHECK(max_diff(lambda_in_gate(m, b, p, t), o.lambda(t)) < 1e-7);
  for (double t : {5.5, 12.0})
    CHECK(max_diff(lambda_post_gate(m, b, p, t), o.lambda(t)) < 1e-7);
}

TEST_CASE("square-pulse dissipator vs oracle at finite temperature") {
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  const ModelSpec m = model(2.0);
  const Bath b(bspec(0.02, 1.0, 0.1), 40.0);
  const Oracle o(m, p, b, ops::coupling_operator(m.xi), 9.0);
  CHECK(max_diff(lambda_in_gate(m, b, p, 4.0), o.lambda(4.0)) < 1e-6);
  CHECK(max_diff(lambda_post_gate(m, b, p, 8.0), o.lambda(8.0)) < 1e-6);
}

TEST_CASE("square-pulse dissipator vs oracle for a sub-ohmic bath") {
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  const ModelSpec m = model(1.0);
  const Bath b(bspec(0.02, 0.5));
  const Oracle o(m, p, b, ops::coupling_operator(m.xi), 9.0);
  CHECK(max_diff(lambda_in_gate(m, b, p, 4.0), o.lambda(4.0)) < 1e-7);
  CHECK(max_diff(lambda_post_gate(m, b, p, 8.0), o.lambda(8.0)) < 1e-7);
}

// ---- continuity and decay ------------------------------------------------------

TEST_CASE("dissipator is continuous across the window edges") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  CHECK(max_diff(lambda_in_gate(m, b, p, 5.0), lambda_post_gate(m, b, p, 5.0)) <
        1e-12);
}

TEST_CASE("post-pulse memory vanishes for a zero-width window and decays") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  const PulseSpec inst = PulseSpec::square(pi / 2, 2.0, 2.0);
  CHECK(lambda_post_pulse(m, b, inst, 7.0).cwiseAbs().maxCoeff() == 0.0);

  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  CHECK(lambda_post_pulse(m, b, p, 5.0 + 1e3).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(max_diff(lambda_post_gate(m, b, p, 5.0 + 1e3), lambda_markov(m, b)) <
        5e-4);
  const ModelSpec mt = model(0.0);
  CHECK(max_diff(lambda_post_gate(mt, b, p, 5.0 + 1e3), lambda_markov(mt, b)) <
        1e-6);
}

// ---- instantaneous limit of the windowed forms ----------------------------------

TEST_CASE("fast pulses reproduce the instant-gate dissipator") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  const double omega_p = 1e4;
  const double width = (pi / 2) / omega_p;
  const PulseSpec p = PulseSpec::square(pi / 2, 1.0, 1.0 + width);
  const PulseSpec inst = PulseSpec::square(pi / 2, 1.0, 1.0);

  const Mat2 uc = ops::gate_unitary(pi / 2);
  CHECK(max_diff(lambda_in_gate(m, b, p, p.tau_p2),
                 uc * lambda_markov(m, b) * uc.adjoint()) < 1e-3);
  for (double u : {0.0, 0.5, 5.0, 50.0})
    CHECK(max_diff(lambda_post_gate(m, b, p, p.tau_p2 + u),
                   lambda_instant_dp(m, b, inst, u)) < 1e-3);
}

// ---- shaped pulses ----------------------------------------------------------------

TEST_CASE("shaped pulse with zero coefficients collapses to the square forms") {
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));
  PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  p.fourier = {{0, 0, 0, 0, 0, 0, 0}};
  for (double t : {3.0, 3.7, 4.6, 5.0})
    CHECK(max_diff(lambda_general_pulse(m, b, p, t),
                   lambda_in_gate(m, b, p, t)) < 1e-7);
  for (double t : {5.5, 12.0})
    CHECK(max_diff(lambda_general_pulse(m, b, p, t),
                   lambda_post_gate(m, b, p, t)) < 1e-7);
}

TEST_CASE("shaped-pulse dissipator matches the brute-force quadrature") {
  PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  p.fourier = {{-1.06, 0.44, -0.12, 0.11, -0.24, -0.30, 0.38}};
  const ModelSpec m = model(4.0);
  const Bath b(bspec(0.02));

  SUBCASE("model coupling") {
    const Oracle o(m, p, b, ops::coupling_operator(m.xi), 13.0);
    for (double t : {3.3, 4.0, 5.0, 6.0, 12.0})
      CHECK(max_diff(lambda_general_pulse(m, b, p, t), o.lambda(t)) < 2e-6);
  }
  SUBCASE("explicit sigma_z coupling") {
    const Mat2 a = ops::sigma_z();
    const Oracle o(m, p, b, a, 13.0);
    for (double t : {3.3, 4.0, 5.0, 6.0, 12.0})
      CHECK(max_diff(lambda_general_pulse(m, b, p, t, a), o.lambda(t)) < 2e-6);
  }
}

TEST_CASE("shaped-pulse dissipator vanishes at zero coupling") {
  PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);
  p.fourier = {{-1.06, 0.44, -0.12, 0.11, -0.24, -0.30, 0.38}};
  const Bath b(bspec(0.0));
  const ModelSpec m = model(4.0);
  CHECK(lambda_general_pulse(m, b, p, 4.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(lambda_general_pulse(m, b, p, 4.0, ops::sigma_z())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

// ---- drive bookkeeping ---------------------------------------------------------

TEST_CASE("pulse angle accumulates to theta regardless of shape") {
  PulseSpec p = PulseSpec::square(1.8, 2.0, 7.0);
  CHECK(pulse_angle(p, 1.0) == 0.0);
  CHECK(pulse_angle(p, 4.5) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(pulse_angle(p, 9.0) == doctest::Approx(1.8).epsilon(1e-12));

  p.fourier = {{0.5, -0.3, 0.2, 0.0, 0.1, 0.0, -0.4}};
  CHECK(pulse_angle(p, 9.0) == doctest::Approx(1.8).epsilon(1e-12));
  // angle is the integral of the amplitude
  const int n = 2000;
  const double h = p.duration() / n;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k)
    acc += pulse_amplitude(p, p.tau_p1 + k * h) *
           ((k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0));
  acc *= h / 3.0;
  CHECK(pulse_angle(p, 9.0) == doctest::Approx(acc).epsilon(1e-10));
}

// ---- validation ------------------------------------------------------------------

TEST_CASE("specs reject inconsistent configurations") {
  const Bath b(bspec(0.02));
  const ModelSpec m = model(4.0);
  const PulseSpec p = PulseSpec::square(pi / 2, 3.0, 5.0);

  PulseSpec bad = p;
  bad.omega_p *= 1.0 + 1e-6;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  PulseSpec reversed;
  reversed.tau_p1 = 2.0;
  reversed.tau_p2 = 1.0;
  CHECK_THROWS_AS(reversed.validate(), std::invalid_argument);

  PulseSpec inst = PulseSpec::square(pi / 2, 1.0, 1.0);
  inst.fourier = {{1, 0, 0, 0, 0, 0, 0}};
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);

  CHECK_THROWS_AS(lambda_in_gate(model(4.0, 0.3), b, p, 4.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lambda_in_gate(m, b, p, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_in_gate(m, b, p, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_post_pulse(m, b, p, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_general_pulse(m, b, p, 2.0), std::invalid_argument);

  PulseSpec shaped = p;
  shaped.fourier = {{0.5, 0, 0, 0, 0, 0, 0}};
  CHECK_THROWS_AS(lambda_in_gate(m, b, shaped, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_post_gate(m, b, shaped, 6.0), std::invalid_argument);

  Mat2 skew = Mat2::Zero();
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(lambda_general_pulse(m, b, p, 4.0, skew),
                  std::invalid_argument);

  ModelSpec inverted;
  inverted.delta = -1.0;
  CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
}
