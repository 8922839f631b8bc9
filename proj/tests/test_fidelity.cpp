#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gatebath/fidelity.hpp"

using namespace gatebath;

namespace {

// Oracle: for unit-trace Hermitian 2x2 matrices the difference is
// (1/2)(n_a - n_b).sigma, whose eigenvalues are +-|n_a - n_b|/2, so the
// trace distance is half the Euclidean distance between Bloch vectors.
double td_bloch_oracle(const Vec3& na, const Vec3& nb) {
  return 0.5 * (na - nb).norm();
}

Mat2 density(const Vec3& n) {
  return 0.5 * (ops::identity2() + n(0) * ops::sigma_x() +
                n(1) * ops::sigma_y() + n(2) * ops::sigma_z());
}

Vec3 random_bloch(std::mt19937& rng, double radius) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return radius * v.normalized();
}

double angle_gap(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * pi));
}

SimConfig scan_template(double lambda2, double xi, double tau_p) {
  SimConfig cfg;
  cfg.model = ModelSpec{1.0, xi, 0.0};
  cfg.bath = BathSpec{lambda2, 1.0, 1.0, 0.0};
  cfg.pulse = PulseSpec::square(0.5 * pi, 0.0, tau_p);
  cfg.t_end = tau_p;
  cfg.dt = 0.05;
  cfg.record_stride = 100;
  cfg.frame = Frame::Interaction;
  return cfg;
}

}  // namespace

// ---- trace distance --------------------------------------------------------------

TEST_CASE("trace distance on reference pairs") {
  const Mat2 ground = density(Vec3(0, 0, 1));
  const Mat2 excited = density(Vec3(0, 0, -1));
  const Mat2 mixed = density(Vec3(0, 0, 0));
  CHECK(trace_distance(ground, ground) == 0.0);
  CHECK(trace_distance(ground, excited) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(trace_distance(mixed, ground) == doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vec3 na = random_bloch(rng, u(rng));
    const Vec3 nb = random_bloch(rng, u(rng));
    const double want = td_bloch_oracle(na, nb);
    CHECK(trace_distance(density(na), density(nb)) ==
          doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("trace distance is a metric on sampled states") {
  std::mt19937 rng(72);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Mat2 a = density(random_bloch(rng, u(rng)));
    const Mat2 b = density(random_bloch(rng, u(rng)));
    const Mat2 c = density(random_bloch(rng, u(rng)));
    const double ab = trace_distance(a, b);
    const double ba = trace_distance(b, a);
    CHECK(ab == ba);  // singular values of M and -M coincide
    CHECK(ab >= 0.0);
    CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12);
  }
  const Mat2 s = density(Vec3(0.3, -0.2, 0.4));
  CHECK(trace_distance(s, s) == 0.0);
}

// ---- fidelity map -----------------------------------------------------------------

TEST_CASE("fidelity map matches the closed-form optimum") {
  // Oracle: F(theta,phi) = 1 - |n - n_t|/2 over unit targets n_t, so the
  // best target is n/|n| and F_max = 1 - (1 - |n|)/2.
  std::mt19937 rng(73);
  for (double radius : {0.35, 0.9, 0.999}) {
    for (int k = 0; k < 4; ++k) {
      const Vec3 n = random_bloch(rng, radius);
      const FidelityMap map = fidelity_map(density(n));
      const double want = 1.0 - 0.5 * (1.0 - radius);
      CHECK(map.f_max == doctest::Approx(want).epsilon(1e-9));
      const double theta_n = std::atan2(std::hypot(n(0), n(1)), n(2));
      const double phi_n = std::atan2(n(1), n(0));
      CHECK(angle_gap(map.theta_m, theta_n) < 1e-4);
      if (std::sin(theta_n) > 0.05)  // phi ill-defined near the poles
        CHECK(angle_gap(map.phi_m, phi_n) < 1e-4);
    }
  }
}

TEST_CASE("fidelity map grid shape and bounds") {
  const Vec3 n(0.2, -0.5, 0.6);
  const FidelityMap map = fidelity_map(density(n));
  REQUIRE(map.theta_grid.size() == 181);
  REQUIRE(map.phi_grid.size() == 361);
  REQUIRE(map.values.rows() == 181);
  REQUIRE(map.values.cols() == 361);
  CHECK(map.theta_grid(0) == 0.0);
  CHECK(map.theta_grid(180) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(map.phi_grid(0) > -pi);  // phi interval is open at -pi
  CHECK(map.phi_grid(360) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(map.values.minCoeff() >= 0.0);
  CHECK(map.values.maxCoeff() <= 1.0);
  // refinement can only improve on the grid maximum
  CHECK(map.f_max >= map.values.maxCoeff() - 1e-15);
  CHECK(map.theta_m >= 0.0);
  CHECK(map.theta_m <= pi);
  CHECK(map.phi_m > -pi);
  CHECK(map.phi_m <= pi);

  // every grid entry agrees with the trace-distance definition
  std::mt19937 rng(74);
  std::uniform_int_distribution<int> it(0, 180), ip(0, 360);
  for (int k = 0; k < 50; ++k) {
    const int i = it(rng), j = ip(rng);
    const double th = map.theta_grid(i), ph = map.phi_grid(j);
    const Vec3 nt(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                  std::cos(th));
    const double want = 1.0 - trace_distance(density(n), density(nt));
    CHECK(map.values(i, j) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("maximally mixed state is equidistant from all pure targets") {
  const FidelityMap map = fidelity_map(density(Vec3::Zero()));
  CHECK((map.values.array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK(map.f_max == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("map maximum is invariant under rigid rotations") {
  std::mt19937 rng(75);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 base = random_bloch(rng, 0.85);
  const double f0 = fidelity_map(density(base)).f_max;
  for (int k = 0; k < 6; ++k) {
    // random SU(2) conjugation rotates the Bloch vector rigidly
    const Vec3 axis = random_bloch(rng, 1.0);
    const double ang = pi * u(rng);
    const Mat2 uu = ops::axis_rotation(axis, ang);
    const Mat2 rotated = uu * density(base) * uu.adjoint();
    CHECK(std::abs(fidelity_map(rotated).f_max - f0) < 1e-9);
  }
  // include a pole-adjacent case where the phi landscape is nearly flat
  const Vec3 polar(1e-3, -2e-3, 0.85);
  CHECK(std::abs(fidelity_map(density(polar)).f_max -
                 (1.0 - 0.5 * (1.0 - polar.norm()))) < 1e-9);
}

TEST_CASE("plot window clips fidelity below the ratio threshold") {
  const Vec3 n(0.1, -0.8, 0.4);
  const FidelityMap map = fidelity_map(density(n));
  const Eigen::MatrixXd clipped = ratio_clipped(map);
  REQUIRE(clipped.rows() == map.values.rows());
  REQUIRE(clipped.cols() == map.values.cols());
  int kept = 0;
  for (Eigen::Index i = 0; i < clipped.rows(); ++i)
    for (Eigen::Index j = 0; j < clipped.cols(); ++j) {
      if (map.values(i, j) >= 0.98 * map.f_max) {
        CHECK(clipped(i, j) == map.values(i, j));
        ++kept;
      } else {
        CHECK(std::isnan(clipped(i, j)));
      }
    }
  CHECK(kept > 0);
  CHECK(kept < clipped.size());
}

// ---- scans ------------------------------------------------------------------------

TEST_CASE("closed-system scan is lossless at every angle") {
  SimConfig cfg = scan_template(0.0, 0.0, 20.0);
  cfg.dt = 0.02;  // keep the integrator error below the fidelity tolerance
  const std::vector<double> thetas{0.25 * pi, 0.5 * pi, pi, 2.0 * pi};
  const FidelityCurve curve = fidelity_scan_theta(cfg, thetas);
  REQUIRE(curve.thetas.size() == thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    CHECK(curve.f_target[k] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(curve.f_max[k] == doctest::Approx(1.0).epsilon(1e-7));
  }
  // the perfect half-rotation lands exactly on (theta, phi) = (pi/2, -pi/2)
  CHECK(angle_gap(curve.theta_m[1], 0.5 * pi) < 1e-4);
  CHECK(angle_gap(curve.phi_m[1], -0.5 * pi) < 1e-4);
}

TEST_CASE("long pulses refocus a full rotation but not a half rotation") {
  // Moderate dephasing: the full rotation beats the half rotation outright.
  SimConfig cfg2 = scan_template(1e-5, 2.0, 200.0);
  const FidelityCurve c2 = fidelity_scan_theta(cfg2, {pi, 2.0 * pi});
  CHECK(c2.f_target[1] > c2.f_target[0]);

  // Strong dephasing: the dip past pi and the partial recovery toward 2 pi
  // survive, but the faster drive also samples more spectral weight (the
  // weight grows linearly in frequency), which outweighs the echo gain and
  // leaves F(2 pi) below F(pi).
  SimConfig cfg4 = scan_template(1e-5, 4.0, 200.0);
  const std::vector<double> thetas{0.5 * pi, pi, 1.5 * pi, 1.875 * pi,
                                   2.0 * pi};
  const FidelityCurve c4 = fidelity_scan_theta(cfg4, thetas);
  CHECK(c4.f_target[2] < c4.f_target[1]);  // still falling at 1.5 pi
  CHECK(c4.f_target[3] > c4.f_target[2]);  // local recovery short of 2 pi
  CHECK(c4.f_target[4] < c4.f_target[1]);  // no net echo win at xi = 4
  CHECK(c4.f_max[0] < 1.0);
  CHECK(c4.f_max[0] > 0.9);
}

TEST_CASE("relaxation biases the best target toward the ground state") {
  SimConfig cfg = scan_template(1e-5, 1.0, 200.0);
  const std::vector<double> thetas{0.5 * pi};
  const FidelityCurve curve = fidelity_scan_theta(cfg, thetas);
  CHECK(curve.theta_m[0] < 0.5 * pi);
  CHECK(curve.theta_m[0] > 0.5 * pi - 0.05);
  CHECK(curve.f_max[0] < 1.0);
}

TEST_CASE("surface scan degenerates to the curve scan") {
  SimConfig cfg = scan_template(1e-4, 2.0, 50.0);
  const std::vector<double> thetas{0.7 * pi};
  const FidelitySurface surf =
      fidelity_scan_tp_theta(cfg, {50.0}, thetas);
  REQUIRE(surf.f_target.rows() == 1);
  REQUIRE(surf.f_target.cols() == 1);
  const FidelityCurve curve = fidelity_scan_theta(cfg, thetas);
  CHECK(surf.f_target(0, 0) == curve.f_target[0]);
  CHECK(surf.f_max(0, 0) == curve.f_max[0]);
}

TEST_CASE("scan preconditions") {
  SimConfig cfg = scan_template(1e-4, 1.0, 10.0);
  cfg.pulse = PulseSpec::square(0.5 * pi, 0.0, 0.0);  // instantaneous
  CHECK_THROWS_AS(fidelity_scan_theta(cfg, {0.5 * pi}),
                  std::invalid_argument);
  SimConfig ok = scan_template(1e-4, 1.0, 10.0);
  CHECK_THROWS_AS(fidelity_scan_tp_theta(ok, {}, {0.5 * pi}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fidelity_scan_tp_theta(ok, {10.0}, {}),
                  std::invalid_argument);
}
