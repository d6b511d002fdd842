#pragma once

// Joint spin (x) oscillator states and the pulse toolbox used by the cat
// interferometer: microwave rotations, spin-conditioned drive pulses with a
// residual drive on the other spin state, Raman sideband flips, and a
// time-stepping propagator that serves as an independent check of the
// closed-form drive.
//
// Spin labels: |down> = |F=2, m=0>, |up> = |F=3, m=0>.

#include <optional>
#include <variant>
#include <vector>

#include "catsim/fock.hpp"

namespace catsim {

enum class Spin { down, up };

class JointState {
 public:
  JointState(FockSpace space, Eigen::VectorXcd down, Eigen::VectorXcd up);

  /// |spin, n>.
  static JointState basis(FockSpace space, Spin spin, int n);

  /// (c_down |down> + c_up |up>) (x) |motion>.
  static JointState product(complex c_down, complex c_up, const StateVector& motion);

  const FockSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }
  const Eigen::VectorXcd& down() const { return down_; }
  const Eigen::VectorXcd& up() const { return up_; }

  double norm() const;
  complex overlap(const JointState& other) const;
  double fidelity(const JointState& other) const { return std::norm(overlap(other)); }

  JointState scaled(complex factor) const;

 private:
  FockSpace space_;
  Eigen::VectorXcd down_;
  Eigen::VectorXcd up_;
};

using JointMixture = Mixture<JointState>;

/// Thermal oscillator mixture with every component in the given spin state.
JointMixture joint_thermal(double nbar, FockSpace space, Spin spin = Spin::down);

/// Trap and drive parameters. Angular frequencies in rad/s, times in s.
struct PhysicalParams {
  double trap_omega = 0.0;     // axial trap frequency omega
  double radial_omega = 0.0;   // radial trap frequency omega_r
  double drive_omega = 0.0;    // relative frequency omega' of the two drive beams
  double eta = 0.0;            // Lamb-Dicke parameter of the drive
  double rabi = 0.0;           // drive Rabi frequency / ac-Stark shift Omega
  std::optional<double> epsilon_override;  // residual drive ratio; model value when unset
  double delta_s_hz = 0.0;     // single-photon detuning of the drive, Hz
  double f_hf_hz = 0.0;        // ground-state hyperfine splitting, Hz
  double mass = 0.0;           // kg
  double lattice_recoil = 0.0;  // lattice recoil frequency omega_rec
  double k_eff = 0.0;          // drive effective wavenumber, 1/m

  /// delta = omega - omega'.
  double delta() const { return trap_omega - drive_omega; }

  /// Ground-state wave-packet size sqrt(hbar / (2 m omega)).
  double z0() const;

  /// Delta_s / (Delta_s + f_hf).
  double epsilon_model() const;

  double epsilon() const { return epsilon_override ? *epsilon_override : epsilon_model(); }

  /// 85Rb in a 2pi x 400 kHz lattice site, resonant drive with eta = 0.20 and
  /// a Rabi frequency giving |alpha| = 1.42 after 0.45 us. epsilon is unset
  /// (model value).
  static PhysicalParams lab_defaults();

  /// Lattice recoil hbar k^2 / (2 m) for a lattice of the given period (k = pi/period).
  static double recoil_for_period(double period_m, double mass_kg);
};

struct MicrowavePulse {
  double theta = 0.0;
  double phase = 0.0;
};

struct DrivePulse {
  double duration = 0.0;
  double drive_phase = 0.0;
  bool apply_residual = true;
};

/// Free evolution; advances the drive phase reference by omega' * tau.
struct WaitPulse {
  double tau = 0.0;
};

using PulseDescriptor = std::variant<MicrowavePulse, DrivePulse, WaitPulse>;

/// Ordered pulses with deterministic drive-phase bookkeeping. Every wait that
/// follows the first drive pulse advances the phase reference by omega' tau;
/// a later drive pulse is applied with phase (drive_phase - accumulated).
class PulseSequence {
 public:
  PulseSequence() = default;
  explicit PulseSequence(std::vector<PulseDescriptor> pulses);

  PulseSequence& microwave(double theta, double phase = 0.0);
  PulseSequence& drive(double duration, double drive_phase, bool apply_residual = true);
  PulseSequence& wait(double tau);

  const std::vector<PulseDescriptor>& pulses() const { return pulses_; }

  /// Free-evolution time accumulated after the first drive pulse.
  double free_time_after_first_drive() const;

  double accumulated_drive_phase(const PhysicalParams& params) const {
    return params.drive_omega * free_time_after_first_drive();
  }

  JointState apply(const JointState& state, const PhysicalParams& params) const;
  JointMixture apply(const JointMixture& state, const PhysicalParams& params) const;

 private:
  std::vector<PulseDescriptor> pulses_;
};

/// Two-level rotation of angle theta about the equatorial axis at `phase`,
/// identical on every Fock level. With phase 0 a pi/2 pulse maps
/// |down> -> (|down> - i|up>)/sqrt(2).
JointState microwave_rotation(const JointState& state, double theta, double phase);

/// Spin-conditioned displacement: the up branch gets e^{i up_phase} D(alpha_up),
/// the down branch e^{i down_phase} D(alpha_down).
struct ConditionalDisplacement {
  Operator up;
  Operator down;
  double up_phase = 0.0;
  double down_phase = 0.0;

  bool truncation_warning() const { return up.truncation_warning() || down.truncation_warning(); }
  JointState apply(const JointState& state) const;
};

ConditionalDisplacement make_spin_selective_displacement(complex alpha, double epsilon, double phi_prime,
                                                         FockSpace space);

/// Up branch -> D(alpha e^{i phi'}), down branch -> D(epsilon alpha e^{i phi'}).
JointState spin_selective_displacement(const JointState& state, complex alpha, double epsilon,
                                       double phi_prime);

/// Second-order Magnus phase of a detuned drive,
///   -(eta^2 rabi^2 / 4) (delta t - sin(delta t)) / delta^2,
/// which vanishes as delta -> 0.
double magnus_phase(double eta, double rabi, double delta, double t);

ConditionalDisplacement make_drive(const PhysicalParams& params, double t, double drive_phase,
                                   bool apply_residual, FockSpace space);

/// Closed-form drive pulse: alpha = alpha_of_t(eta, rabi, delta, t) e^{i drive_phase}
/// on the up branch (with its Magnus phase), epsilon * alpha on the down branch
/// when the residual drive is enabled.
JointState drive_pulse(const JointState& state, const PhysicalParams& params, double t, double drive_phase,
                       bool apply_residual = true);

struct NumericDriveResult {
  JointState state;
  int steps = 0;
  bool converged = true;
  std::optional<double> step_change;  // |psi(2N) - psi(N)| when a tolerance was given
};

/// Integrates H(t) = i (f(t) a^dag - f^*(t) a), f(t) = (eta rabi / 2) e^{i(phi - delta t)},
/// on the up branch (and epsilon f on the down branch) with piecewise-constant
/// mid-point exponentials. Each step exponentiates the truncated generator via
/// an eigendecomposition of (a^dag - a), independent of the Laguerre closed form.
/// With a tolerance, the run is repeated with 2*steps and `converged` reports
/// whether the two results agree.
NumericDriveResult drive_numeric(const JointState& state, const PhysicalParams& params, double t,
                                 double drive_phase, int steps, std::optional<double> tolerance = std::nullopt,
                                 bool apply_residual = true);

/// Coupling of |down, n> <-> |up, n + order> to first order in eta:
/// order 0 -> rabi0 (1 - eta^2 (n + 1/2)), order +-1 -> rabi0 eta sqrt(max(n, n + order)).
/// Zero when n + order < 0.
double sideband_coupling(int n, int order, double rabi0, double eta);

/// Detuned Rabi transfer probability (c^2 / W^2) sin^2(W t / 2), W = sqrt(c^2 + detuning^2).
double rabi_transfer(double coupling, double detuning, double t);

/// Raman pulse on the sideband of the given order (-1, 0, +1). `detuning` is
/// measured from that sideband's resonance. Pairs reaching outside the
/// truncation are left untouched.
JointState raman_sideband_pulse(const JointState& state, double rabi0, double eta, double detuning, double t,
                                int order);

double population_up(const JointState& state);

/// Weighted up population with each component normalised to the norm it
/// kept inside the truncation.
double population_up(const JointMixture& state);

}  // namespace catsim
