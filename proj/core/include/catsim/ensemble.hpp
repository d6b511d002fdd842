#pragma once

// Radial inhomogeneity of the lattice sites and the thermal average of the
// cat fringe over the radial cloud.
//
// A site at radius r in a Gaussian mode of 1/e^2 radius W sees intensity
// I(r) = I0 e^{-2 r^2 / W^2}. With trap depth ~ I, omega ~ sqrt(I),
// eta ~ 1/sqrt(omega) and a two-photon drive ~ I:
//   omega(r) = omega e^{-r^2/W^2},  eta(r) = eta e^{r^2/(2W^2)},
//   rabi(r)  = rabi e^{-2r^2/W^2},  delta(r) = omega(r) - omega'.

#include <functional>

#include "catsim/spin_motion.hpp"

namespace catsim {

struct RadialParams {
  double mode_radius = 22e-6;  // W, 1/e^2 mode-field radius, m
  double temperature = 0.0;    // T_r, K
  double trap_depth = 0.0;     // U, J

  /// w_a = W sqrt(k_B T_r / (2 U)).
  double cloud_radius() const;

  /// U such that a cloud at `temperature` has 1/e radius `cloud_radius`.
  static double trap_depth_for(double mode_radius, double temperature, double cloud_radius);
};

struct RadialProfile {
  double trap_omega = 0.0;
  double eta = 0.0;
  double rabi = 0.0;
  double delta = 0.0;
};

RadialProfile radial_profiles(double r, const PhysicalParams& base, double mode_radius);

double cloud_radius(double mode_radius, double temperature, double trap_depth);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  int evaluations = 0;
};

/// Adaptive Simpson on [a, b] to relative tolerance `rel_tol`. Panels that
/// hit `max_depth` or the evaluation budget are accepted as they stand and
/// the result is flagged unconverged.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  int max_depth = 40, int max_evaluations = 1000000);

/// Quadrature of the radial weight 2 pi r e^{-r^2/w_a^2} over [0, 5 w_a];
/// analytically pi w_a^2 (1 - e^{-25}).
QuadratureResult radial_weight_norm(double cloud_radius, double rel_tol);

struct AveragingOptions {
  double phi_f = 0.0;
  bool radial_detuning = true;  // delta follows omega(r); false keeps the on-axis delta
  double rel_tol = 1e-6;
};

struct AveragedFringe {
  double p_up = 0.0;
  bool converged = true;
  double error_estimate = 0.0;
};

/// Weighted ratio of integrals of the residual-drive fringe over r in
/// [0, 5 w_a], with alpha(r) from the local radial profile. The thermal
/// factor (2 nbar0 + 1) and C are radially constant. w_a = 0 returns the
/// on-axis value.
AveragedFringe averaged_fringe(const PhysicalParams& base, const RadialParams& radial, double t_drive, double C,
                               double nbar0, double phi, double delta_M, const AveragingOptions& options = {});

/// Height of the interference feature of the averaged odd-cat fringe:
/// P_up(phi' = pi) - P_up(phi' = 0) at delta_M = 0. Shrinks as the radial
/// spread lowers the mean displacement.
double averaged_feature_depth(const PhysicalParams& base, const RadialParams& radial, double t_drive, double C,
                              double nbar0, const AveragingOptions& options = {});

}  // namespace catsim
