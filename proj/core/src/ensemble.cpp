#include "catsim/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "catsim/constants.hpp"
#include "catsim/interferometer.hpp"

namespace catsim {

double cloud_radius(double mode_radius, double temperature, double trap_depth) {
  if (mode_radius <= 0.0 || temperature < 0.0 || trap_depth <= 0.0) {
    throw std::invalid_argument("cloud_radius: W and U must be > 0, T_r >= 0");
  }
  return mode_radius * std::sqrt(constants::boltzmann * temperature / (2.0 * trap_depth));
}

double RadialParams::cloud_radius() const { return catsim::cloud_radius(mode_radius, temperature, trap_depth); }

double RadialParams::trap_depth_for(double mode_radius, double temperature, double cloud_radius) {
  if (cloud_radius <= 0.0) throw std::invalid_argument("trap_depth_for: cloud radius must be > 0");
  return mode_radius * mode_radius * constants::boltzmann * temperature / (2.0 * cloud_radius * cloud_radius);
}

RadialProfile radial_profiles(double r, const PhysicalParams& base, double mode_radius) {
  if (r < 0.0) throw std::invalid_argument("radial_profiles: r must be >= 0");
  const double u = r * r / (mode_radius * mode_radius);
  RadialProfile p;
  p.trap_omega = base.trap_omega * std::exp(-u);
  p.eta = base.eta * std::exp(0.5 * u);
  p.rabi = base.rabi * std::exp(-2.0 * u);
  p.delta = p.trap_omega - base.drive_omega;
  return p;
}

namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

double simpson_recurse(const std::function<double(double)>& f, const Panel& p, double eps, int depth,
                       int budget, QuadratureResult& acc) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  acc.evaluations += 2;
  const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double diff = left + right - p.whole;
  if (std::abs(diff) <= 15.0 * eps) {
    acc.error_estimate += std::abs(diff) / 15.0;
    return left + right + diff / 15.0;
  }
  if (depth <= 0 || acc.evaluations >= budget) {
    acc.converged = false;
    acc.error_estimate += std::abs(diff) / 15.0;
    return left + right + diff / 15.0;
  }
  return simpson_recurse(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * eps, depth - 1, budget, acc) +
         simpson_recurse(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * eps, depth - 1, budget, acc);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  int max_depth, int max_evaluations) {
  QuadratureResult out;
  if (a == b) return out;

  // Coarse pass over fixed panels sets the absolute target.
  constexpr int panels = 16;
  const double h = (b - a) / panels;
  std::vector<Panel> ps;
  ps.reserve(panels);
  double coarse = 0.0;
  double f_left = f(a);
  out.evaluations = 1;
  for (int i = 0; i < panels; ++i) {
    const double pa = a + i * h;
    const double pb = (i + 1 == panels) ? b : pa + h;
    const double fm = f(0.5 * (pa + pb));
    const double fb = f(pb);
    out.evaluations += 2;
    const double whole = (pb - pa) / 6.0 * (f_left + 4.0 * fm + fb);
    ps.push_back({pa, pb, f_left, fm, fb, whole});
    coarse += whole;
    f_left = fb;
  }
  const double eps = rel_tol * std::max(std::abs(coarse), 1e-300) / panels;
  for (const Panel& p : ps) out.value += simpson_recurse(f, p, eps, max_depth, max_evaluations, out);
  return out;
}

QuadratureResult radial_weight_norm(double w_a, double rel_tol) {
  if (w_a <= 0.0) throw std::invalid_argument("radial_weight_norm: cloud radius must be > 0");
  const double inv = 1.0 / (w_a * w_a);
  return adaptive_simpson([&](double r) { return constants::two_pi * r * std::exp(-r * r * inv); }, 0.0, 5.0 * w_a,
                          rel_tol);
}

namespace {

double local_alpha(const PhysicalParams& base, const RadialParams& radial, double t_drive, double r, bool radial_detuning) {
  const RadialProfile p = radial_profiles(r, base, radial.mode_radius);
  const double delta = radial_detuning ? p.delta : base.delta();
  return std::abs(alpha_of_t(p.eta, p.rabi, delta, t_drive));
}

}  // namespace

AveragedFringe averaged_fringe(const PhysicalParams& base, const RadialParams& radial, double t_drive, double C,
                               double nbar0, double phi, double delta_M, const AveragingOptions& options) {
  const double eps = base.epsilon();
  const double w_a = radial.temperature > 0.0 ? radial.cloud_radius() : 0.0;
  if (w_a == 0.0) {
    const double a = local_alpha(base, radial, t_drive, 0.0, options.radial_detuning);
    return AveragedFringe{fringe_model(a, C, options.phi_f, eps, nbar0, phi, delta_M), true, 0.0};
  }

  const double inv = 1.0 / (w_a * w_a);
  auto weight = [&](double r) { return constants::two_pi * r * std::exp(-r * r * inv); };
  const QuadratureResult num = adaptive_simpson(
      [&](double r) {
        const double a = local_alpha(base, radial, t_drive, r, options.radial_detuning);
        return weight(r) * fringe_model(a, C, options.phi_f, eps, nbar0, phi, delta_M);
      },
      0.0, 5.0 * w_a, options.rel_tol);
  const QuadratureResult den = adaptive_simpson(weight, 0.0, 5.0 * w_a, options.rel_tol);

  AveragedFringe out;
  out.p_up = num.value / den.value;
  out.converged = num.converged && den.converged;
  out.error_estimate = std::abs(out.p_up) * (num.error_estimate / std::abs(num.value) + den.error_estimate / den.value);
  return out;
}

double averaged_feature_depth(const PhysicalParams& base, const RadialParams& radial, double t_drive, double C,
                              double nbar0, const AveragingOptions& options) {
  const double at_pi = averaged_fringe(base, radial, t_drive, C, nbar0, options.phi_f + constants::pi, 0.0, options).p_up;
  const double at_zero = averaged_fringe(base, radial, t_drive, C, nbar0, options.phi_f, 0.0, options).p_up;
  return at_pi - at_zero;
}

}  // namespace catsim
