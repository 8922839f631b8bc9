#include "gatebath/dissipators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gatebath {

namespace {

// sigma_pm / sigma_z / identity coefficients of a Hermitian coupling
// A = wp sigma_+ + wm sigma_- + wz sigma_z + w0 I, with wm = conj(wp).
struct AxisWeights {
  cplx wp{0.0, 0.0};
  cplx wm{0.0, 0.0};
  double wz = 0.0;
  double w0 = 0.0;
};

AxisWeights model_weights(const ModelSpec& m) {
  AxisWeights w;
  w.wp = 0.5 * std::exp(cplx(0.0, -m.phi));
  w.wm = 0.5 * std::exp(cplx(0.0, m.phi));
  w.wz = 0.5 * m.xi;
  return w;
}

AxisWeights operator_weights(const Mat2& a) {
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("coupling operator must be Hermitian");
  AxisWeights w;
  w.wp = a(0, 1);
  w.wm = a(1, 0);
  w.wz = 0.5 * std::real(a(0, 0) - a(1, 1));
  w.w0 = 0.5 * std::real(a(0, 0) + a(1, 1));
  return w;
}

// e^{-i H0 tau} A e^{i H0 tau} integrated against C(tau) picks Gamma at
// +delta, -delta and 0 on the sigma_+, sigma_- and sigma_z/I parts.
Mat2 assemble(const AxisWeights& w, cplx g_plus, cplx g_minus, cplx g_zero) {
  Mat2 out = Mat2::Zero();
  out(0, 1) = w.wp * g_plus;
  out(1, 0) = w.wm * g_minus;
  const cplx gz = w.wz * g_zero;
  const cplx g1 = w.w0 * g_zero;
  out(0, 0) = g1 + gz;
  out(1, 1) = g1 - gz;
  return out;
}

Mat2 static_for(const AxisWeights& w, const ModelSpec& m, const Bath& b,
                double t) {
  return assemble(w, b.gamma(m.delta, t), b.gamma(-m.delta, t),
                  b.gamma(0.0, t));
}

Mat2 markov_for(const AxisWeights& w, const ModelSpec& m, const Bath& b) {
  return assemble(w, b.gamma_asymptotic(m.delta), b.gamma_asymptotic(-m.delta),
                  b.gamma_asymptotic(0.0));
}

void require_square_window(const ModelSpec& m, const PulseSpec& p,
                           const char* who) {
  if (p.instantaneous())
    throw std::invalid_argument(std::string(who) +
                                ": window has zero width; use the "
                                "instantaneous-gate dissipator");
  if (p.shaped())
    throw std::invalid_argument(std::string(who) +
                                ": shaped pulse; use lambda_general_pulse");
  if (m.phi != 0.0)
    throw std::invalid_argument(std::string(who) +
                                ": unsupported configuration phi != 0");
}

// U(t, tau_p1) = e^{-i H0 (t - tau_p1)} e^{-i Theta(t) sigma_x / 2}; exact
// because the drive commutes with itself at different times.
Mat2 window_propagator(const ModelSpec& m, const PulseSpec& p, double t) {
  return ops::free_propagator(m.delta, t - p.tau_p1) *
         ops::gate_unitary(pulse_angle(p, t));
}

Mat2 general_pulse_impl(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                        double t, const Mat2& a, const AxisWeights& w) {
  m.validate();
  p.validate();
  if (p.instantaneous())
    throw std::invalid_argument(
        "lambda_general_pulse: window has zero width; use the "
        "instantaneous-gate dissipator");
  if (t < p.tau_p1 - 1e-12)
    throw std::invalid_argument("lambda_general_pulse: t before the window");
  t = std::max(t, p.tau_p1);

  const Mat2 w_t = window_propagator(m, p, t);
  const double x = t - p.tau_p1;

  // Aged remainder: emissions before the window see only free evolution.
  const Mat2 v = w_t * ops::free_propagator(m.delta, x).adjoint();
  Mat2 out =
      v * (markov_for(w, m, b) - static_for(w, m, b, x)) * v.adjoint();

  // Window integral int C(t - tau) U(t,tau) A U(tau,t) dtau on Gauss panels.
  const double hi = std::min(t, p.tau_p2);
  const double span = hi - p.tau_p1;
  if (span > 0.0) {
    const double target = std::min(0.1 / b.spec().omega_c, p.duration() / 200.0);
    const int base_n = std::max(1, static_cast<int>(std::ceil(span / target)));
    const double off = 0.5 / std::sqrt(3.0);
    auto quad = [&](int n) {
      const double h = span / n;
      Mat2 acc = Mat2::Zero();
      for (int k = 0; k < n; ++k) {
        const double mid = p.tau_p1 + (k + 0.5) * h;
        for (const double tau : {mid - off * h, mid + off * h}) {
          const Mat2 u = window_propagator(m, p, tau);
          acc += b.bcf(t - tau) * (u.adjoint() * a * u);
        }
      }
      return Mat2((0.5 * h) * acc);
    };
    const Mat2 coarse = quad(base_n);
    const Mat2 fine = quad(2 * base_n);
    const double err = (fine - coarse).cwiseAbs().maxCoeff() / 15.0;
    if (err > 1e-6) {
      std::ostringstream msg;
      msg << "lambda_general_pulse: window quadrature did not converge "
             "(error estimate "
          << err << ")";
      throw std::runtime_error(msg.str());
    }
    out += w_t * fine * w_t.adjoint();
  }

  if (t > p.tau_p2) out += static_for(w, m, b, t - p.tau_p2);
  return out;
}

}  // namespace

void ModelSpec::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("ModelSpec: delta must be positive");
  if (!std::isfinite(xi) || !std::isfinite(phi))
    throw std::invalid_argument("ModelSpec: xi and phi must be finite");
}

PulseSpec PulseSpec::square(double theta, double tau_p1, double tau_p2) {
  PulseSpec p;
  p.theta = theta;
  p.tau_p1 = tau_p1;
  p.tau_p2 = tau_p2;
  p.omega_p = tau_p2 > tau_p1 ? theta / (tau_p2 - tau_p1)
                              : std::numeric_limits<double>::infinity();
  return p;
}

bool PulseSpec::shaped() const {
  if (!fourier) return false;
  for (double a : *fourier)
    if (a != 0.0) return true;
  return false;
}

void PulseSpec::validate() const {
  if (!std::isfinite(theta) || !std::isfinite(tau_p1) || !std::isfinite(tau_p2))
    throw std::invalid_argument("PulseSpec: non-finite field");
  if (tau_p2 < tau_p1)
    throw std::invalid_argument("PulseSpec: tau_p2 < tau_p1");
  if (instantaneous()) {
    if (fourier)
      throw std::invalid_argument(
          "PulseSpec: fourier coefficients require a finite window");
    return;
  }
  if (!std::isfinite(omega_p))
    throw std::invalid_argument(
        "PulseSpec: omega_p must be finite for a finite window");
  const double tol = 1e-12 * std::max(1.0, std::abs(theta));
  if (std::abs(omega_p * duration() - theta) > tol)
    throw std::invalid_argument(
        "PulseSpec: omega_p inconsistent with theta and the window");
  if (fourier)
    for (double a : *fourier)
      if (!std::isfinite(a))
        throw std::invalid_argument("PulseSpec: non-finite fourier entry");
}

double pulse_angle(const PulseSpec& p, double t) {
  if (t <= p.tau_p1) return 0.0;
  if (p.instantaneous() || t >= p.tau_p2) return p.theta;
  const double x = t - p.tau_p1;
  double angle = p.omega_p * x;
  if (p.fourier) {
    const double tp = p.duration();
    for (int n = 1; n <= 7; ++n)
      angle += (*p.fourier)[n - 1] * std::sin(n * pi * x / tp);
  }
  return angle;
}

double pulse_amplitude(const PulseSpec& p, double t) {
  if (p.instantaneous() || t < p.tau_p1 || t > p.tau_p2) return 0.0;
  double eps = p.omega_p;
  if (p.fourier) {
    const double tp = p.duration();
    const double x = t - p.tau_p1;
    for (int n = 1; n <= 7; ++n)
      eps += (*p.fourier)[n - 1] * (n * pi / tp) * std::cos(n * pi * x / tp);
  }
  return eps;
}

Mat2 lambda_static(const ModelSpec& m, const Bath& b, double t) {
  m.validate();
  if (t < 0.0) throw std::invalid_argument("lambda_static: t < 0");
  return static_for(model_weights(m), m, b, t);
}

Mat2 lambda_markov(const ModelSpec& m, const Bath& b) {
  m.validate();
  return markov_for(model_weights(m), m, b);
}

Mat2 lambda_instant_dp(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                       double t) {
  m.validate();
  if (t < 0.0) throw std::invalid_argument("lambda_instant_dp: t < 0");
  const Mat2 st = lambda_static(m, b, t);
  const Mat2 uc = ops::interaction_rotation(m.delta, p.theta, -t);
  return uc * (lambda_markov(m, b) - st) * uc.adjoint() + st;
}

Mat2 lambda_in_gate(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                    double t) {
  m.validate();
  p.validate();
  require_square_window(m, p, "lambda_in_gate");
  if (t < p.tau_p1 - 1e-12 || t > p.tau_p2 + 1e-12)
    throw std::invalid_argument("lambda_in_gate: t outside the window");
  const double s = std::min(std::max(t - p.tau_p1, 0.0), p.duration());

  const double d = m.delta, op = p.omega_p, xi = m.xi;
  auto g = [&](double w) { return b.gamma(w, s); };
  const cplx g_d = g(d), g_md = g(-d);
  const cplx g_dp = g(d + op), g_dm = g(d - op);
  const cplx g_mdp = g(-d + op), g_mdm = g(-d - op);
  const cplx g_p = g(op), g_m = g(-op);

  const cplx e1 = std::exp(cplx(0.0, d * s));
  const cplx e2 = e1 * e1;

  // Window contribution at the nine shifted frequencies; the sigma_z drive
  // splits each transverse line into omega +- omega_p sidebands.
  const cplx p_plus = 0.25 * (g_d + 0.5 * (g_dp + g_dm)) +
                      0.25 * e2 * (g_md - 0.5 * (g_mdp + g_mdm)) +
                      0.25 * xi * e1 * (g_p - g_m);
  const cplx p_minus = 0.25 / e2 * (g_d - 0.5 * (g_dp + g_dm)) +
                       0.25 * (g_md + 0.5 * (g_mdp + g_mdm)) -
                       0.25 * xi / e1 * (g_p - g_m);
  const cplx p_zed = 0.25 * xi * (g_p + g_m) -
                     0.125 * (e1 * (g_mdp - g_mdm) - (g_dp - g_dm) / e1);

  Mat2 out = Mat2::Zero();
  out(0, 1) = p_plus;
  out(1, 0) = p_minus;
  out(0, 0) = p_zed;
  out(1, 1) = -p_zed;

  const Mat2 ur = ops::rotating_frame_gate(d, op, s);
  out += ur * (lambda_markov(m, b) - lambda_static(m, b, s)) * ur.adjoint();
  return out;
}

Mat2 lambda_post_pulse(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                       double t) {
  m.validate();
  p.validate();
  if (p.instantaneous()) return Mat2::Zero();
  require_square_window(m, p, "lambda_post_pulse");
  if (t < p.tau_p2 - 1e-12)
    throw std::invalid_argument("lambda_post_pulse: t before the pulse end");
  t = std::max(t, p.tau_p2);

  const double d = m.delta, op = p.omega_p, xi = m.xi;
  const double big_t = t - p.tau_p1;
  const double phase = -op * (t - p.tau_p2);
  auto dg = [&](double w) {
    return b.delta_gamma(w, t - p.tau_p1, t - p.tau_p2);
  };
  const cplx dg_d = dg(d), dg_md = dg(-d);
  const cplx dg_dp = dg(d + op), dg_dm = dg(d - op);
  const cplx dg_mdp = dg(-d + op), dg_mdm = dg(-d - op);
  const cplx dg_p = dg(op), dg_m = dg(-op);

  const cplx ep = std::exp(cplx(0.0, phase));
  const cplx et = std::exp(cplx(0.0, d * big_t));
  const cplx e2t = et * et;

  const cplx c_plus = 0.25 * (dg_d + 0.5 * (ep * dg_dp + dg_dm / ep)) +
                      0.25 * e2t * (dg_md - 0.5 * (ep * dg_mdp + dg_mdm / ep)) +
                      0.25 * xi * et * (ep * dg_p - dg_m / ep);
  const cplx c_minus = 0.25 / e2t * (dg_d - 0.5 * (ep * dg_dp + dg_dm / ep)) +
                       0.25 * (dg_md + 0.5 * (ep * dg_mdp + dg_mdm / ep)) -
                       0.25 * xi / et * (ep * dg_p - dg_m / ep);
  const cplx c_zed = 0.25 * xi * (ep * dg_p + dg_m / ep) +
                     0.125 * ((ep / et) * dg_dp + (et / ep) * dg_mdm) -
                     0.125 * ((ep * et) * dg_mdp + dg_dm / (ep * et));

  Mat2 out = Mat2::Zero();
  out(0, 1) = c_plus;
  out(1, 0) = c_minus;
  out(0, 0) = c_zed;
  out(1, 1) = -c_zed;
  return out;
}

Mat2 lambda_post_gate(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                      double t) {
  m.validate();
  p.validate();
  if (t < p.tau_p2 - 1e-12)
    throw std::invalid_argument("lambda_post_gate: t before the pulse end");
  t = std::max(t, p.tau_p2);
  Mat2 out = lambda_static(m, b, t - p.tau_p2);
  if (!p.instantaneous()) out += lambda_post_pulse(m, b, p, t);
  const Mat2 uc = ops::interaction_rotation(m.delta, p.theta, p.tau_p1 - t);
  out += uc * (lambda_markov(m, b) - lambda_static(m, b, t - p.tau_p1)) *
         uc.adjoint();
  return out;
}

Mat2 lambda_general_pulse(const ModelSpec& m, const Bath& b,
                          const PulseSpec& p, double t) {
  return general_pulse_impl(m, b, p, t,
                            ops::coupling_operator(m.xi, m.phi),
                            model_weights(m));
}

Mat2 lambda_general_pulse(const ModelSpec& m, const Bath& b,
                          const PulseSpec& p, double t, const Mat2& coupling) {
  return general_pulse_impl(m, b, p, t, coupling, operator_weights(coupling));
}

}  // namespace gatebath
