#pragma once

#include <complex>
#include <Eigen/Dense>

namespace gatebath {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3d;
using Mat4c = Eigen::Matrix4cd;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using CVec3 = Eigen::Vector3cd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx iu{0.0, 1.0};

}  // namespace gatebath
