#include "catsim/spin_motion.hpp"

#include <cmath>
#include <stdexcept>

#include "catsim/constants.hpp"

namespace catsim {

namespace {

constexpr complex I(0.0, 1.0);

void require_same_dim(const FockSpace& space, const Eigen::VectorXcd& v, const char* what) {
  if (v.size() != space.dim()) throw std::invalid_argument(std::string(what) + ": branch size mismatch");
}

}  // namespace

JointState::JointState(FockSpace space, Eigen::VectorXcd down, Eigen::VectorXcd up)
    : space_(space), down_(std::move(down)), up_(std::move(up)) {
  require_same_dim(space_, down_, "JointState(down)");
  require_same_dim(space_, up_, "JointState(up)");
}

JointState JointState::basis(FockSpace space, Spin spin, int n) {
  const StateVector fock = StateVector::fock(space, n);
  return spin == Spin::down ? product(1.0, 0.0, fock) : product(0.0, 1.0, fock);
}

JointState JointState::product(complex c_down, complex c_up, const StateVector& motion) {
  return JointState(motion.space(), c_down * motion.amplitudes(), c_up * motion.amplitudes());
}

double JointState::norm() const { return std::sqrt(down_.squaredNorm() + up_.squaredNorm()); }

complex JointState::overlap(const JointState& other) const {
  if (!(space_ == other.space_)) throw std::invalid_argument("JointState::overlap: FockSpace mismatch");
  return down_.dot(other.down_) + up_.dot(other.up_);
}

JointState JointState::scaled(complex factor) const { return JointState(space_, factor * down_, factor * up_); }

JointMixture joint_thermal(double nbar, FockSpace space, Spin spin) {
  const MixtureState motion = thermal_mixture(nbar, space);
  return motion.map([spin](const StateVector& s) {
    return spin == Spin::down ? JointState::product(1.0, 0.0, s) : JointState::product(0.0, 1.0, s);
  });
}

// ---------------------------------------------------------------------------

double PhysicalParams::z0() const {
  if (mass <= 0.0 || trap_omega <= 0.0) throw std::invalid_argument("PhysicalParams::z0: mass and omega must be > 0");
  return std::sqrt(constants::hbar / (2.0 * mass * trap_omega));
}

double PhysicalParams::epsilon_model() const {
  if (delta_s_hz + f_hf_hz == 0.0) return 0.0;
  return delta_s_hz / (delta_s_hz + f_hf_hz);
}

double PhysicalParams::recoil_for_period(double period_m, double mass_kg) {
  const double k = constants::pi / period_m;
  return constants::hbar * k * k / (2.0 * mass_kg);
}

PhysicalParams PhysicalParams::lab_defaults() {
  PhysicalParams p;
  p.trap_omega = constants::two_pi * 400e3;
  p.radial_omega = constants::two_pi * 3.5e3;
  p.drive_omega = p.trap_omega;
  p.eta = 0.20;
  p.rabi = 2.0 * 1.42 / (p.eta * 0.45e-6);
  p.delta_s_hz = 744e6;
  p.f_hf_hz = 3e9;
  p.mass = constants::rb85_mass;
  p.lattice_recoil = recoil_for_period(410.5e-9, p.mass);
  p.k_eff = p.eta / p.z0();
  return p;
}

// ---------------------------------------------------------------------------

JointState microwave_rotation(const JointState& state, double theta, double phase) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const complex to_down = -I * std::polar(s, phase);   // <down|R|up>
  const complex to_up = -I * std::polar(s, -phase);    // <up|R|down>
  return JointState(state.space(), c * state.down() + to_down * state.up(), to_up * state.down() + c * state.up());
}

JointState ConditionalDisplacement::apply(const JointState& state) const {
  if (!(state.space() == up.space())) throw std::invalid_argument("ConditionalDisplacement: FockSpace mismatch");
  return JointState(state.space(), std::polar(1.0, down_phase) * (down.matrix() * state.down()),
                    std::polar(1.0, up_phase) * (up.matrix() * state.up()));
}

ConditionalDisplacement make_spin_selective_displacement(complex alpha, double epsilon, double phi_prime,
                                                         FockSpace space) {
  const complex a = alpha * std::polar(1.0, phi_prime);
  return ConditionalDisplacement{displacement_operator(a, space), displacement_operator(epsilon * a, space)};
}

JointState spin_selective_displacement(const JointState& state, complex alpha, double epsilon, double phi_prime) {
  return make_spin_selective_displacement(alpha, epsilon, phi_prime, state.space()).apply(state);
}

double magnus_phase(double eta, double rabi, double delta, double t) {
  const double g2 = 0.25 * eta * eta * rabi * rabi;
  const double x = delta * t;
  if (std::abs(x) < 1e-3) {
    // (x - sin x)/delta^2 = t^2 (x/6 - x^3/120 + x^5/5040)
    return -g2 * t * t * (x / 6.0 - x * x * x / 120.0 + x * x * x * x * x / 5040.0);
  }
  return -g2 * (x - std::sin(x)) / (delta * delta);
}

ConditionalDisplacement make_drive(const PhysicalParams& params, double t, double drive_phase, bool apply_residual,
                                   FockSpace space) {
  if (t < 0.0) throw std::invalid_argument("drive_pulse: negative duration");
  const complex alpha = alpha_of_t(params.eta, params.rabi, params.delta(), t) * std::polar(1.0, drive_phase);
  const double phi = magnus_phase(params.eta, params.rabi, params.delta(), t);
  const double eps = apply_residual ? params.epsilon() : 0.0;
  return ConditionalDisplacement{displacement_operator(alpha, space), displacement_operator(eps * alpha, space), phi,
                                 eps * eps * phi};
}

JointState drive_pulse(const JointState& state, const PhysicalParams& params, double t, double drive_phase,
                       bool apply_residual) {
  return make_drive(params, t, drive_phase, apply_residual, state.space()).apply(state);
}

namespace {

// exp(s (a^dag - a)) = V exp(-i s L) V^dag with i(a^dag - a) = V L V^dag.
struct GeneratorBasis {
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd values;

  explicit GeneratorBasis(int dim) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
      const double r = std::sqrt(static_cast<double>(n));
      h(n, n - 1) = I * r;   // i a^dag
      h(n - 1, n) = -I * r;  // -i a
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    vectors = es.eigenvectors();
    values = es.eigenvalues();
  }
};

// One mid-point step exp((f a^dag - f^* a) dt) applied in place.
void force_step(const GeneratorBasis& gb, complex f, double dt, Eigen::VectorXcd& psi) {
  const double mag = std::abs(f) * dt;
  if (mag == 0.0) return;
  const double chi = std::arg(f);
  const int d = static_cast<int>(psi.size());
  // R^dag psi with R = diag(e^{i chi n})
  for (int n = 0; n < d; ++n) psi[n] *= std::polar(1.0, -chi * n);
  Eigen::VectorXcd w = gb.vectors.adjoint() * psi;
  for (int k = 0; k < d; ++k) w[k] *= std::polar(1.0, -mag * gb.values[k]);
  psi = gb.vectors * w;
  for (int n = 0; n < d; ++n) psi[n] *= std::polar(1.0, chi * n);
}

JointState integrate_drive(const GeneratorBasis& gb, const JointState& state, const PhysicalParams& params, double t,
                           double drive_phase, int steps, double eps) {
  Eigen::VectorXcd up = state.up();
  Eigen::VectorXcd down = state.down();
  const double g = 0.5 * params.eta * params.rabi;
  const double delta = params.delta();
  const double dt = t / steps;
  for (int k = 0; k < steps; ++k) {
    const double tm = (k + 0.5) * dt;
    const complex f = std::polar(g, drive_phase - delta * tm);
    force_step(gb, f, dt, up);
    if (eps != 0.0) force_step(gb, eps * f, dt, down);
  }
  return JointState(state.space(), std::move(down), std::move(up));
}

}  // namespace

NumericDriveResult drive_numeric(const JointState& state, const PhysicalParams& params, double t, double drive_phase,
                                 int steps, std::optional<double> tolerance, bool apply_residual) {
  if (steps < 100) throw std::invalid_argument("drive_numeric: steps must be >= 100");
  if (t < 0.0) throw std::invalid_argument("drive_numeric: negative duration");
  const GeneratorBasis gb(state.dim());
  const double eps = apply_residual ? params.epsilon() : 0.0;

  NumericDriveResult out{integrate_drive(gb, state, params, t, drive_phase, steps, eps), steps, true, std::nullopt};
  if (tolerance) {
    JointState fine = integrate_drive(gb, state, params, t, drive_phase, 2 * steps, eps);
    const double change = std::sqrt((fine.down() - out.state.down()).squaredNorm() +
                                    (fine.up() - out.state.up()).squaredNorm());
    out.state = std::move(fine);
    out.steps = 2 * steps;
    out.step_change = change;
    out.converged = change <= *tolerance;
  }
  return out;
}

// ---------------------------------------------------------------------------

double sideband_coupling(int n, int order, double rabi0, double eta) {
  if (order < -1 || order > 1) throw std::invalid_argument("sideband_coupling: order must be -1, 0 or +1");
  if (n < 0 || n + order < 0) return 0.0;
  if (order == 0) return rabi0 * (1.0 - eta * eta * (n + 0.5));
  return rabi0 * eta * std::sqrt(static_cast<double>(std::max(n, n + order)));
}

double rabi_transfer(double coupling, double detuning, double t) {
  const double w2 = coupling * coupling + detuning * detuning;
  if (w2 == 0.0) return 0.0;
  const double s = std::sin(0.5 * std::sqrt(w2) * t);
  return coupling * coupling / w2 * s * s;
}

JointState raman_sideband_pulse(const JointState& state, double rabi0, double eta, double detuning, double t,
                                int order) {
  if (order < -1 || order > 1) throw std::invalid_argument("raman_sideband_pulse: order must be -1, 0 or +1");
  Eigen::VectorXcd down = state.down();
  Eigen::VectorXcd up = state.up();
  const int d = state.dim();
  for (int n = 0; n < d; ++n) {
    const int m = n + order;
    if (m < 0 || m >= d) continue;
    const double c_n = sideband_coupling(n, order, rabi0, eta);
    const double w = std::sqrt(c_n * c_n + detuning * detuning);
    if (w == 0.0) continue;
    const double c = std::cos(0.5 * w * t);
    const double s = std::sin(0.5 * w * t);
    const complex dd(c, -detuning / w * s);
    const complex uu(c, detuning / w * s);
    const complex off = -I * (c_n / w * s);
    const complex a = state.down()[n];
    const complex b = state.up()[m];
    down[n] = dd * a + off * b;
    up[m] = off * a + uu * b;
  }
  return JointState(state.space(), std::move(down), std::move(up));
}

double population_up(const JointState& state) { return state.up().squaredNorm(); }

double population_up(const JointMixture& state) {
  double p = 0.0;
  for (const auto& c : state.components()) {
    const double n2 = c.state.norm() * c.state.norm();
    if (n2 > 0.0) p += c.weight * population_up(c.state) / n2;
  }
  return p;
}

// ---------------------------------------------------------------------------

PulseSequence::PulseSequence(std::vector<PulseDescriptor> pulses) : pulses_(std::move(pulses)) {
  for (const auto& p : pulses_) {
    if (const auto* d = std::get_if<DrivePulse>(&p); d && d->duration < 0.0) {
      throw std::invalid_argument("PulseSequence: negative drive duration");
    }
    if (const auto* w = std::get_if<WaitPulse>(&p); w && w->tau < 0.0) {
      throw std::invalid_argument("PulseSequence: negative wait");
    }
  }
}

PulseSequence& PulseSequence::microwave(double theta, double phase) {
  pulses_.emplace_back(MicrowavePulse{theta, phase});
  return *this;
}

PulseSequence& PulseSequence::drive(double duration, double drive_phase, bool apply_residual) {
  if (duration < 0.0) throw std::invalid_argument("PulseSequence::drive: negative duration");
  pulses_.emplace_back(DrivePulse{duration, drive_phase, apply_residual});
  return *this;
}

PulseSequence& PulseSequence::wait(double tau) {
  if (tau < 0.0) throw std::invalid_argument("PulseSequence::wait: negative wait");
  pulses_.emplace_back(WaitPulse{tau});
  return *this;
}

double PulseSequence::free_time_after_first_drive() const {
  bool driven = false;
  double elapsed = 0.0;
  for (const auto& p : pulses_) {
    if (std::holds_alternative<DrivePulse>(p)) driven = true;
    if (const auto* w = std::get_if<WaitPulse>(&p); w && driven) elapsed += w->tau;
  }
  return elapsed;
}

namespace {

// Visits the pulses in order, handing each one (with its bookkeeping phase
// already folded in for drives) to `sink`.
template <class Sink>
void walk(const std::vector<PulseDescriptor>& pulses, const PhysicalParams& params, Sink&& sink) {
  bool driven = false;
  double reference = 0.0;
  for (const auto& p : pulses) {
    if (const auto* m = std::get_if<MicrowavePulse>(&p)) {
      sink(*m);
    } else if (const auto* d = std::get_if<DrivePulse>(&p)) {
      driven = true;
      sink(DrivePulse{d->duration, d->drive_phase - reference, d->apply_residual});
    } else if (const auto* w = std::get_if<WaitPulse>(&p); w && driven) {
      reference += params.drive_omega * w->tau;
    }
  }
}

}  // namespace

JointState PulseSequence::apply(const JointState& state, const PhysicalParams& params) const {
  JointState s = state;
  walk(pulses_, params, [&](const auto& pulse) {
    using P = std::decay_t<decltype(pulse)>;
    if constexpr (std::is_same_v<P, MicrowavePulse>) {
      s = microwave_rotation(s, pulse.theta, pulse.phase);
    } else {
      s = drive_pulse(s, params, pulse.duration, pulse.drive_phase, pulse.apply_residual);
    }
  });
  return s;
}

JointMixture PulseSequence::apply(const JointMixture& state, const PhysicalParams& params) const {
  if (state.size() == 0) return state;
  const FockSpace space = state.components().front().state.space();
  JointMixture s = state;
  walk(pulses_, params, [&](const auto& pulse) {
    using P = std::decay_t<decltype(pulse)>;
    if constexpr (std::is_same_v<P, MicrowavePulse>) {
      s = s.map([&](const JointState& c) { return microwave_rotation(c, pulse.theta, pulse.phase); });
    } else {
      const ConditionalDisplacement op = make_drive(params, pulse.duration, pulse.drive_phase, pulse.apply_residual, space);
      s = s.map([&](const JointState& c) { return op.apply(c); });
    }
  });
  return s;
}

}  // namespace catsim
