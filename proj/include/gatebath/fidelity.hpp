#pragma once

// Gate quality metrics: trace distance to pure targets, fidelity landscapes
// over the target Bloch angles, and the theta / pulse-length scan drivers.
//
// Fidelity against the pure target at polar angle theta and azimuth phi is
// F(theta, phi) = 1 - D(rho, rho_t), with D the trace distance.  Maps are
// evaluated on a 181 x 361 grid over theta in [0, pi], phi in (-pi, pi] and
// the maximum is then sharpened by golden-section refinement in each angle.

#include <vector>

#include "gatebath/evolve.hpp"

namespace gatebath {

// Fidelity landscape over pure-target Bloch angles for one final state.
struct FidelityMap {
  Eigen::VectorXd theta_grid;  // polar angles, [0, pi]
  Eigen::VectorXd phi_grid;    // azimuths, (-pi, pi]
  Eigen::MatrixXd values;      // values(i, j) = F(theta_i, phi_j), in [0, 1]
  double f_max = 0.0;          // refined maximum
  double theta_m = 0.0;        // argmax polar angle
  double phi_m = 0.0;          // argmax azimuth, in (-pi, pi]
};

// Fixed-target and best-target fidelity along a list of rotation angles.
struct FidelityCurve {
  std::vector<double> thetas;
  std::vector<double> f_target;  // against the ideal rotation target
  std::vector<double> f_max;     // against the best pure target
  std::vector<double> theta_m;
  std::vector<double> phi_m;
};

// Same scan over a (pulse length, rotation angle) grid.
struct FidelitySurface {
  std::vector<double> taus;
  std::vector<double> thetas;
  Eigen::MatrixXd f_target;  // rows follow taus, columns follow thetas
  Eigen::MatrixXd f_max;
};

// Half the sum of the singular values of rho - target.  For the Hermitian
// differences arising here this equals half the sum of the absolute
// eigenvalues.  Both arguments are expected to have unit trace.
double trace_distance(const Mat2& rho, const Mat2& target);

// Density matrix (identity2 + n . sigma) / 2 for a Bloch vector n.
Mat2 density_from_bloch(const Vec3& n);

// Bloch vector of a (Hermitian) density matrix.
Vec3 bloch_from_density(const Mat2& rho);

// Pure target state at Bloch angles (theta, phi).
Mat2 pure_target(double theta, double phi);

// F over the full target grid plus the refined maximum for one final state.
FidelityMap fidelity_map(const Mat2& final_state, int n_theta = 181,
                         int n_phi = 361);

// Copy of map.values with entries below window * f_max replaced by NaN,
// matching the plotting window used for the landscape figures.
Eigen::MatrixXd ratio_clipped(const FidelityMap& map, double window = 0.98);

// Run the gate plan of `base` once per rotation angle (square pulse on the
// same window), read the end-of-pulse state in the interaction frame, and
// report the fidelity against the ideal rotation target
// n_t = (0, -sin theta, cos theta) as well as the refined best-target data.
FidelityCurve fidelity_scan_theta(const SimConfig& base,
                                  const std::vector<double>& thetas);

// Curve scan repeated for each pulse duration; the window keeps its left
// edge and stretches to tau.
FidelitySurface fidelity_scan_tp_theta(const SimConfig& base,
                                       const std::vector<double>& taus,
                                       const std::vector<double>& thetas);

}  // namespace gatebath
