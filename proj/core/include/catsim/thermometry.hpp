#pragma once

// Raman sideband spectroscopy of a thermal oscillator, sideband-asymmetry
// thermometry, a per-cycle Markov model of Raman sideband cooling, lattice
// anharmonicity and optical-depth detection conversions.

#include <optional>
#include <vector>

namespace catsim {

struct SpectrumPoint {
  double detuning = 0.0;  // rad/s from the carrier
  double transfer = 0.0;  // P_up after the Raman pulse, in [0, 1]
  double od = 0.0;        // transfer * od_max
};

struct SpectrumOptions {
  bool anharmonic = false;
  double lattice_recoil = 0.0;  // omega_rec, rad/s; used when anharmonic
  double od_max = 2.0e4 / 1.5e4;  // OD for full transfer of a 2e4-atom lattice
  std::optional<int> fock_dim;    // default: thermal tail below 1e-12
};

/// n-dependent level splitting omega - omega_rec (1 + n) between |n> and |n+1>.
double anharmonic_splitting(int n, double omega, double omega_rec);

/// Thermal-weighted Raman transfer over the carrier and first sidebands. The
/// red sideband of level n sits at -splitting(n-1), the blue one at
/// +splitting(n); splitting is omega unless anharmonicity is enabled.
std::vector<SpectrumPoint> sideband_spectrum(double nbar, double rabi0, double eta, double t_pulse,
                                             double trap_omega, const std::vector<double>& detunings,
                                             const SpectrumOptions& options = {});

struct ThermometryResult {
  double nbar = 0.0;
  double ratio = 0.0;  // A_rsb / A_bsb
  double red_area = 0.0;
  double blue_area = 0.0;
  bool saturated = false;  // ratio >= 1, nbar reported as +inf
};

/// <n> = r / (1 - r) for a red/blue area ratio r; +inf for r >= 1.
double nbar_from_ratio(double ratio);

/// Trapezoidal sideband areas over [-+omega - omega/2, -+omega + omega/2].
/// Throws std::domain_error when the blue area is not positive.
ThermometryResult extract_nbar(const std::vector<SpectrumPoint>& spectrum, double trap_omega);

struct CoolingModelParams {
  int pi_pulse_target_n = 1;       // red-sideband pulse is a pi pulse for this level
  double photons_per_cycle = 3.0;  // pump photons scattered per transferred atom
  double eta_op = 0.20;            // Lamb-Dicke parameter of the pump light
  std::optional<double> heating_prob_per_cycle;  // default eta_op^2 * photons_per_cycle
  double rabi_spread = 0.1;        // relative rms spread of the sideband Rabi frequency
  int cycles = 200;
  int fock_dim = 80;

  double heating() const;
};

struct CoolingStep {
  int cycle = 0;
  double mean_n = 0.0;
  std::vector<double> populations;
};

/// Probability that the red-sideband pulse moves n -> n-1:
/// <sin^2(x (1 + xi))> = (1 - cos(2x) e^{-2 s^2 x^2}) / 2, x = (pi/2) rabi_n / rabi_target,
/// xi ~ N(0, s^2) with s = rabi_spread.
double rsc_transfer_probability(int n, const CoolingModelParams& model, double eta, double rabi0);

/// Evolves the occupation distribution cycle by cycle: red-sideband transfer
/// n -> n-1, then optical pumping of the transferred atoms, which are heated
/// back by one quantum with the heating probability. Atoms that were not
/// transferred scatter nothing, so |0> is dark. Entry 0 is the initial state.
std::vector<CoolingStep> rsc_simulate(double nbar_init, const CoolingModelParams& model, double eta, double rabi0);

struct DetectionParams {
  double atoms_per_unit_od = 1.5e4;
  double probe_duration = 50e-6;  // s, informational
};

/// OD = -ln(T), T in (0, 1].
double od_from_transmission(double transmission);
double atoms_from_od(double od, const DetectionParams& det = {});

}  // namespace catsim
