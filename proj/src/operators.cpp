#include "gatebath/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace gatebath::ops {

Mat2 identity2() { return Mat2::Identity(); }

Mat2 sigma_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 sigma_y() {
  Mat2 m;
  m << 0, -iu, iu, 0;
  return m;
}

Mat2 sigma_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Mat2 sigma_plus() {
  Mat2 m;
  m << 0, 1, 0, 0;
  return m;
}

Mat2 sigma_minus() {
  Mat2 m;
  m << 0, 0, 1, 0;
  return m;
}

Mat2 coupling_operator(double xi, double phi) {
  return 0.5 * (std::cos(phi) * sigma_x() + std::sin(phi) * sigma_y() + xi * sigma_z());
}

Vec3 coupling_axis(double xi, double phi) { return Vec3(std::cos(phi), std::sin(phi), xi); }

Mat2 free_propagator(double delta, double t) {
  // exp(-i H0 t) = exp(+i delta t sigma_z / 2)
  Mat2 u = Mat2::Zero();
  u(0, 0) = std::exp(iu * (0.5 * delta * t));
  u(1, 1) = std::exp(-iu * (0.5 * delta * t));
  return u;
}

Mat2 gate_unitary(double theta) { return axis_rotation(Vec3(1, 0, 0), theta); }

Mat2 axis_rotation(const Vec3& axis, double eta) {
  const double norm = axis.norm();
  if (norm == 0.0) throw std::invalid_argument("axis_rotation: zero axis");
  const Vec3 m = axis / norm;
  const double c = std::cos(eta / 2), s = std::sin(eta / 2);
  Mat2 u = c * identity2();
  u -= iu * s * (m.x() * sigma_x() + m.y() * sigma_y() + m.z() * sigma_z());
  return u;
}

Mat2 interaction_rotation(double delta, double theta, double x) {
  const Mat2 f = free_propagator(delta, -x);  // exp(i H0 x)
  return f * gate_unitary(theta) * f.adjoint();
}

Mat2 rotating_frame_gate(double delta, double omega_p, double t) {
  const Mat2 f = free_propagator(delta, t);
  return f * gate_unitary(omega_p * t) * f.adjoint();
}

Vec3 vectorize(const Mat2& rho) {
  const cplx tr = rho(0, 0) + rho(1, 1);
  if (std::abs(tr - 1.0) > 1e-12) throw std::invalid_argument("vectorize: trace != 1");
  Vec3 n;
  n.x() = 2.0 * rho(1, 0).real();
  n.y() = 2.0 * rho(1, 0).imag();
  n.z() = (rho(0, 0) - rho(1, 1)).real();
  return n;
}

Mat2 unvectorize(const Vec3& n) {
  Mat2 rho;
  rho(0, 0) = 0.5 * (1.0 + n.z());
  rho(1, 1) = 0.5 * (1.0 - n.z());
  rho(1, 0) = 0.5 * cplx(n.x(), n.y());
  rho(0, 1) = 0.5 * cplx(n.x(), -n.y());
  return rho;
}

Eigen::Vector4cd vec_col(const Mat2& m) {
  Eigen::Vector4cd v;
  v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
  return v;
}

Mat4c kron2(const Mat2& a, const Mat2& b) {
  Mat4c k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

Mat4c hamiltonian_superop(const Mat2& h) {
  return -iu * (kron2(identity2(), h) - kron2(h.transpose(), identity2()));
}

namespace {

// Columns map (1, nx, ny, nz)/sqrt(2)-type basis onto column-major vec entries.
Mat4c bloch_unitary() {
  Mat4c u;
  const double r = 1.0 / std::sqrt(2.0);
  u << r, 0, 0, r,
       0, r, iu * r, 0,
       0, r, -iu * r, 0,
       r, 0, 0, -r;
  return u;
}

}  // namespace

Mat4 bloch_basis_transform(const Mat4c& superop, double tol) {
  const Mat4c u = bloch_unitary();
  const Mat4c d = u.adjoint() * superop * u;
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (std::abs(d(i, j).imag()) > tol)
        throw std::runtime_error("bloch_basis_transform: imaginary residue");
      out(i, j) = d(i, j).real();
    }
  return out;
}

Eigen::Matrix3d bloch_rotation(const Mat2& u) {
  const Mat2 s[3] = {sigma_x(), sigma_y(), sigma_z()};
  Eigen::Matrix3d r;
  for (int j = 0; j < 3; ++j) {
    const Mat2 m = u * s[j] * u.adjoint();
    for (int i = 0; i < 3; ++i) r(i, j) = 0.5 * (s[i] * m).trace().real();
  }
  return r;
}

}  // namespace gatebath::ops
