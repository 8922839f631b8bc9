#include "gatebath/fidelity.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace gatebath {

namespace {

constexpr double krefine_tol = 1e-7;  // angle resolution of the refinement

Vec3 unit_target(double theta, double phi) {
  const double st = std::sin(theta);
  return Vec3(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
}

double wrap_angle(double phi) {
  double r = std::remainder(phi, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

// Golden-section maximization on [a, b]; assumes unimodality there.  When
// the maximum sits outside the bracket this walks to the nearer edge, which
// the caller detects and answers by widening the bracket.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double trace_distance(const Mat2& rho, const Mat2& target) {
  const Mat2 diff = rho - target;
  Eigen::JacobiSVD<Mat2> svd(diff);
  return 0.5 * svd.singularValues().sum();
}

Mat2 density_from_bloch(const Vec3& n) {
  return 0.5 * (ops::identity2() + n(0) * ops::sigma_x() +
                n(1) * ops::sigma_y() + n(2) * ops::sigma_z());
}

Vec3 bloch_from_density(const Mat2& rho) {
  return Vec3((rho * ops::sigma_x()).trace().real(),
              (rho * ops::sigma_y()).trace().real(),
              (rho * ops::sigma_z()).trace().real());
}

Mat2 pure_target(double theta, double phi) {
  return density_from_bloch(unit_target(theta, phi));
}

FidelityMap fidelity_map(const Mat2& final_state, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 2)
    throw std::invalid_argument("fidelity_map: grid needs at least 2x2 points");
  const Vec3 n = bloch_from_density(final_state);

  FidelityMap map;
  map.theta_grid.resize(n_theta);
  map.phi_grid.resize(n_phi);
  const double th_step = pi / (n_theta - 1);
  const double ph_step = 2.0 * pi / n_phi;
  for (int i = 0; i < n_theta; ++i) map.theta_grid(i) = i * th_step;
  map.theta_grid(n_theta - 1) = pi;
  // right-aligned half-open grid: excludes -pi, includes +pi
  for (int j = 0; j < n_phi; ++j) map.phi_grid(j) = -pi + (j + 1) * ph_step;
  map.phi_grid(n_phi - 1) = pi;

  // fidelity against the pure target: F = 1 - |n - n_t| / 2
  auto f_raw = [&n](double theta, double phi) {
    return 1.0 - 0.5 * (n - unit_target(theta, phi)).norm();
  };

  map.values.resize(n_theta, n_phi);
  int bi = 0, bj = 0;
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j) {
      const double f = f_raw(map.theta_grid(i), map.phi_grid(j));
      map.values(i, j) = std::clamp(f, 0.0, 1.0);
      if (map.values(i, j) > map.values(bi, bj)) {
        bi = i;
        bj = j;
      }
    }

  // Coordinate-wise golden-section refinement with adaptive brackets: an
  // edge hit widens the bracket so the search can travel along the nearly
  // flat azimuth circles near the poles, a clean interior maximum shrinks
  // it toward the resolution target.
  double th = map.theta_grid(bi), ph = map.phi_grid(bj);
  double f_best = f_raw(th, ph);
  double th_best = th, ph_best = ph;
  auto remember = [&](double t, double p) {
    const double f = f_raw(t, p);
    if (f > f_best) {
      f_best = f;
      th_best = t;
      ph_best = p;
    }
    return f;
  };
  double h_th = th_step, h_ph = ph_step;
  for (int round = 0; round < 120; ++round) {
    const double th_old = th, ph_old = ph;
    const double lo = std::max(0.0, th - h_th);
    const double hi = std::min(pi, th + h_th);
    th = golden_max([&](double x) { return remember(x, ph); }, lo, hi,
                    krefine_tol);
    ph = golden_max([&](double x) { return remember(th, x); }, ph - h_ph,
                    ph + h_ph, krefine_tol);
    const double m_th = std::abs(th - th_old);
    const double m_ph = std::abs(ph - ph_old);
    h_th = m_th > 0.45 * h_th ? std::min(2.0 * h_th, pi)
                              : std::max(4.0 * m_th, 10.0 * krefine_tol);
    h_ph = m_ph > 0.45 * h_ph ? std::min(2.0 * h_ph, pi)
                              : std::max(4.0 * m_ph, 10.0 * krefine_tol);
    if (m_th < krefine_tol && m_ph < krefine_tol) break;
  }

  map.f_max = std::clamp(f_best, 0.0, 1.0);
  map.theta_m = std::clamp(th_best, 0.0, pi);
  map.phi_m = wrap_angle(ph_best);
  return map;
}

Eigen::MatrixXd ratio_clipped(const FidelityMap& map, double window) {
  Eigen::MatrixXd out = map.values;
  const double cut = window * map.f_max;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (out(i, j) < cut) out(i, j) = nan;
  return out;
}

FidelityCurve fidelity_scan_theta(const SimConfig& base,
                                  const std::vector<double>& thetas) {
  if (base.pulse.instantaneous())
    throw std::invalid_argument(
        "fidelity_scan_theta: the scan reads the end-of-pulse state and "
        "needs a finite window");
  if (thetas.empty())
    throw std::invalid_argument("fidelity_scan_theta: empty angle list");

  const Bath b(base.bath, base.pulse.tau_p2 + 1.0);
  FidelityCurve curve;
  for (const double theta : thetas) {
    SimConfig cfg = base;
    cfg.pulse = PulseSpec::square(theta, base.pulse.tau_p1, base.pulse.tau_p2);
    cfg.pulse.fourier = base.pulse.fourier;  // keep any shaping
    cfg.t_end = cfg.pulse.tau_p2;
    cfg.frame = Frame::Interaction;
    cfg.validate();
    const Trajectory traj = integrate(cfg, b, RunKind::GatePlan);
    const Vec3 n = traj.bloch.back();

    // ideal x rotation sends the ground state to (0, -sin theta, cos theta)
    const Vec3 ideal(0.0, -std::sin(theta), std::cos(theta));
    const double f = 1.0 - trace_distance(density_from_bloch(n),
                                          density_from_bloch(ideal));
    const FidelityMap map = fidelity_map(density_from_bloch(n));

    curve.thetas.push_back(theta);
    curve.f_target.push_back(std::clamp(f, 0.0, 1.0));
    curve.f_max.push_back(map.f_max);
    curve.theta_m.push_back(map.theta_m);
    curve.phi_m.push_back(map.phi_m);
  }
  return curve;
}

FidelitySurface fidelity_scan_tp_theta(const SimConfig& base,
                                       const std::vector<double>& taus,
                                       const std::vector<double>& thetas) {
  if (taus.empty() || thetas.empty())
    throw std::invalid_argument("fidelity_scan_tp_theta: empty grid axis");
  FidelitySurface surf;
  surf.taus = taus;
  surf.thetas = thetas;
  const Eigen::Index nr = static_cast<Eigen::Index>(taus.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(thetas.size());
  surf.f_target.resize(nr, nc);
  surf.f_max.resize(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    if (!(taus[r] > 0.0))
      throw std::invalid_argument("fidelity_scan_tp_theta: tau must be > 0");
    SimConfig cfg = base;
    cfg.pulse = PulseSpec::square(base.pulse.theta, base.pulse.tau_p1,
                                  base.pulse.tau_p1 + taus[r]);
    cfg.pulse.fourier = base.pulse.fourier;
    cfg.t_end = cfg.pulse.tau_p2;
    const FidelityCurve curve = fidelity_scan_theta(cfg, thetas);
    for (Eigen::Index c = 0; c < nc; ++c) {
      surf.f_target(r, c) = curve.f_target[static_cast<std::size_t>(c)];
      surf.f_max(r, c) = curve.f_max[static_cast<std::size_t>(c)];
    }
  }
  return surf;
}

}  // namespace gatebath
