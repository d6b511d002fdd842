#pragma once

// Spin-motion cat interferometer: the full pulse protocol on a thermal
// mixture, the closed-form fringe models it is checked against, Fock-parity
// diagnostics and wave-packet separation.

#include <optional>

#include "catsim/spin_motion.hpp"

namespace catsim {

struct CatProtocolConfig {
  PhysicalParams params;
  double t_drive = 0.0;   // duration of each drive pulse, s
  double phi = 0.0;       // programmed phase of the second drive, rad
  double delta_M = 0.0;   // phase of the analysis pi/2 pulse, rad
  double wait_tau = 0.0;  // extra free evolution between the drives, s
  double nbar0 = 0.0;     // initial thermal occupation
  double contrast = 1.0;  // used by the closed-form model only
  std::optional<int> fock_dim;
};

/// Configured dimension, or ceil(|alpha|^2 + 6|alpha| + 10) plus enough levels
/// to hold the thermal distribution down to a 1e-12 tail.
int protocol_fock_dim(const CatProtocolConfig& cfg);

/// pi/2 -> drive(t, 0) -> wait(tau) -> pi -> drive(t, phi) -> pi/2(delta_M).
PulseSequence cat_pulse_sequence(const CatProtocolConfig& cfg);

struct CatResult {
  double p_up = 0.0;
  JointMixture final_state;
  double phi_f = 0.0;  // bookkeeping phase omega' * tau folded into the second drive
  bool truncation_warning = false;
};

CatResult run_cat_sequence(const CatProtocolConfig& cfg);

/// P_up = (1 - e^{-|a|^2 (1 - cos phi)} cos(delta_M + |a|^2 sin phi)) / 2.
double fringe_ideal(double alpha_mag, double phi, double delta_M);

struct BetaTheta {
  complex beta;
  double theta = 0.0;
};

/// beta = (1 + eps e^{i phi'}) alpha, e^{i theta} = (e^{i phi'} + eps) / (1 + eps e^{i phi'}).
/// Degenerate (eps = 1, phi' = pi) returns beta = 0, theta = 0.
BetaTheta beta_theta(complex alpha, double epsilon, double phi_prime);

/// Residual-drive fringe with thermal initial state and contrast C:
/// P_up = (1 - C e^{-(2 nbar0 + 1)|beta|^2 (1 - cos theta)} cos(delta_M + |beta|^2 sin theta)) / 2,
/// phi' = phi - phi_f.
double fringe_model(double alpha_mag, double C, double phi_f, double epsilon, double nbar0, double phi,
                    double delta_M);

/// Rescales an ideal (C = 1) population to contrast C about 1/2.
double apply_contrast(double p_up, double C);

/// Multiplicative normalisation that maps the drive-off population to 1/2.
double normalize_to_drive_off(double p_up, double p_up_drive_off);

struct ParityWeights {
  double even_up = 0.0;
  double odd_up = 0.0;

  double even_fraction() const { return even_up / (even_up + odd_up); }
  double odd_fraction() const { return odd_up / (even_up + odd_up); }
};

/// Fock-parity-resolved population of the up branch after the full protocol.
ParityWeights cat_parity_weights(const CatProtocolConfig& cfg);

/// Maximum separation 2 sqrt(2) |alpha| z0 of the two coherent wave packets, m.
double wavepacket_separation(double alpha_mag, const PhysicalParams& params);

double fidelity_from_contrast(double C);

}  // namespace catsim
