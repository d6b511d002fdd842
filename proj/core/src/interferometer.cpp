#include "catsim/interferometer.hpp"

#include <cmath>
#include <stdexcept>

#include "catsim/constants.hpp"

namespace catsim {

int protocol_fock_dim(const CatProtocolConfig& cfg) {
  if (cfg.fock_dim) return *cfg.fock_dim;
  const double a = std::abs(alpha_of_t(cfg.params.eta, cfg.params.rabi, cfg.params.delta(), cfg.t_drive));
  // |beta| <= (1 + eps) |alpha|
  const double amax = (1.0 + std::abs(cfg.params.epsilon())) * a;
  int dim = default_fock_dim(amax);
  if (cfg.nbar0 > 0.0) {
    const double r = cfg.nbar0 / (cfg.nbar0 + 1.0);
    dim += static_cast<int>(std::ceil(std::log(1e-12) / std::log(r)));
  }
  return dim;
}

PulseSequence cat_pulse_sequence(const CatProtocolConfig& cfg) {
  if (cfg.wait_tau < 0.0) throw std::invalid_argument("cat protocol: wait_tau must be >= 0");
  PulseSequence seq;
  seq.microwave(constants::pi / 2.0, 0.0)
      .drive(cfg.t_drive, 0.0)
      .wait(cfg.wait_tau)
      .microwave(constants::pi, 0.0)
      .drive(cfg.t_drive, cfg.phi)
      .microwave(constants::pi / 2.0, cfg.delta_M);
  return seq;
}

CatResult run_cat_sequence(const CatProtocolConfig& cfg) {
  if (cfg.nbar0 < 0.0) throw std::invalid_argument("cat protocol: nbar0 must be >= 0");
  const FockSpace space(protocol_fock_dim(cfg));
  const PulseSequence seq = cat_pulse_sequence(cfg);
  const complex alpha = alpha_of_t(cfg.params.eta, cfg.params.rabi, cfg.params.delta(), cfg.t_drive);

  CatResult out;
  out.final_state = seq.apply(joint_thermal(cfg.nbar0, space, Spin::down), cfg.params);
  out.p_up = population_up(out.final_state);
  out.phi_f = seq.accumulated_drive_phase(cfg.params);
  out.truncation_warning = !truncation_reliable((1.0 + std::abs(cfg.params.epsilon())) * alpha, space);
  return out;
}

double fringe_ideal(double alpha_mag, double phi, double delta_M) {
  if (alpha_mag < 0.0) throw std::invalid_argument("fringe_ideal: alpha_mag must be >= 0");
  const double a2 = alpha_mag * alpha_mag;
  return 0.5 * (1.0 - std::exp(-a2 * (1.0 - std::cos(phi))) * std::cos(delta_M + a2 * std::sin(phi)));
}

BetaTheta beta_theta(complex alpha, double epsilon, double phi_prime) {
  const complex rot = std::polar(1.0, phi_prime);
  const complex q = 1.0 + epsilon * rot;
  if (std::abs(q) < 1e-15) return BetaTheta{complex(0.0, 0.0), 0.0};
  return BetaTheta{q * alpha, std::arg((rot + epsilon) / q)};
}

double fringe_model(double alpha_mag, double C, double phi_f, double epsilon, double nbar0, double phi,
                    double delta_M) {
  if (nbar0 < 0.0) throw std::invalid_argument("fringe_model: nbar0 must be >= 0");
  const BetaTheta bt = beta_theta(complex(alpha_mag, 0.0), epsilon, phi - phi_f);
  const double b2 = std::norm(bt.beta);
  const double decay = std::exp(-(2.0 * nbar0 + 1.0) * b2 * (1.0 - std::cos(bt.theta)));
  return 0.5 * (1.0 - C * decay * std::cos(delta_M + b2 * std::sin(bt.theta)));
}

double apply_contrast(double p_up, double C) { return 0.5 + C * (p_up - 0.5); }

double normalize_to_drive_off(double p_up, double p_up_drive_off) {
  if (p_up_drive_off <= 0.0) throw std::invalid_argument("normalize_to_drive_off: drive-off population must be > 0");
  return 0.5 * p_up / p_up_drive_off;
}

ParityWeights cat_parity_weights(const CatProtocolConfig& cfg) {
  const CatResult r = run_cat_sequence(cfg);
  ParityWeights w;
  for (const auto& c : r.final_state.components()) {
    const Eigen::VectorXcd& up = c.state.up();
    const double n2 = c.state.norm() * c.state.norm();
    if (!(n2 > 0.0)) continue;
    for (int n = 0; n < up.size(); ++n) {
      (n % 2 == 0 ? w.even_up : w.odd_up) += c.weight * std::norm(up[n]) / n2;
    }
  }
  return w;
}

double wavepacket_separation(double alpha_mag, const PhysicalParams& params) {
  if (alpha_mag < 0.0) throw std::invalid_argument("wavepacket_separation: alpha_mag must be >= 0");
  return 2.0 * std::sqrt(2.0) * alpha_mag * params.z0();
}

double fidelity_from_contrast(double C) {
  if (C < 0.0 || C > 1.0) throw std::invalid_argument("fidelity_from_contrast: C must lie in [0, 1]");
  return std::sqrt(C);
}

}  // namespace catsim
