#include "catsim/thermometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "catsim/constants.hpp"
#include "catsim/fock.hpp"
#include "catsim/spin_motion.hpp"

namespace catsim {

double anharmonic_splitting(int n, double omega, double omega_rec) {
  if (n < 0) throw std::invalid_argument("anharmonic_splitting: n must be >= 0");
  return omega - omega_rec * (1.0 + n);
}

namespace {

int thermal_dim(double nbar) {
  if (nbar <= 0.0) return 4;
  const double r = nbar / (nbar + 1.0);
  return 4 + static_cast<int>(std::ceil(std::log(1e-12) / std::log(r)));
}

}  // namespace

std::vector<SpectrumPoint> sideband_spectrum(double nbar, double rabi0, double eta, double t_pulse,
                                             double trap_omega, const std::vector<double>& detunings,
                                             const SpectrumOptions& options) {
  if (t_pulse < 0.0) throw std::invalid_argument("sideband_spectrum: negative pulse duration");
  const int dim = options.fock_dim.value_or(thermal_dim(nbar));
  std::vector<double> p = thermal_weights(nbar, dim);
  double total = 0.0;
  for (double w : p) total += w;
  for (double& w : p) w /= total;

  const double rec = options.anharmonic ? options.lattice_recoil : 0.0;
  struct Line {
    double weight, coupling, resonance;
  };
  std::vector<Line> lines;
  for (int n = 0; n < dim; ++n) {
    if (p[n] < 1e-16) continue;
    lines.push_back({p[n], sideband_coupling(n, 0, rabi0, eta), 0.0});
    if (n + 1 < dim) lines.push_back({p[n], sideband_coupling(n, +1, rabi0, eta), anharmonic_splitting(n, trap_omega, rec)});
    if (n > 0) lines.push_back({p[n], sideband_coupling(n, -1, rabi0, eta), -anharmonic_splitting(n - 1, trap_omega, rec)});
  }

  std::vector<SpectrumPoint> out;
  out.reserve(detunings.size());
  for (double det : detunings) {
    double tr = 0.0;
    for (const Line& l : lines) tr += l.weight * rabi_transfer(l.coupling, det - l.resonance, t_pulse);
    tr = std::clamp(tr, 0.0, 1.0);
    out.push_back({det, tr, tr * options.od_max});
  }
  return out;
}

double nbar_from_ratio(double ratio) {
  if (ratio < 0.0) throw std::invalid_argument("nbar_from_ratio: negative ratio");
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return ratio / (1.0 - ratio);
}

namespace {

double window_area(const std::vector<SpectrumPoint>& sorted, double lo, double hi) {
  double area = 0.0;
  const SpectrumPoint* prev = nullptr;
  for (const auto& pt : sorted) {
    if (pt.detuning < lo || pt.detuning > hi) continue;
    if (prev) area += 0.5 * (pt.transfer + prev->transfer) * (pt.detuning - prev->detuning);
    prev = &pt;
  }
  return area;
}

}  // namespace

ThermometryResult extract_nbar(const std::vector<SpectrumPoint>& spectrum, double trap_omega) {
  std::vector<SpectrumPoint> sorted = spectrum;
  std::sort(sorted.begin(), sorted.end(),
            [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.detuning < b.detuning; });
  const double half = 0.5 * trap_omega;
  ThermometryResult r;
  r.red_area = window_area(sorted, -trap_omega - half, -trap_omega + half);
  r.blue_area = window_area(sorted, trap_omega - half, trap_omega + half);
  if (!(r.blue_area > 0.0)) throw std::domain_error("extract_nbar: blue sideband area is not positive");
  r.ratio = r.red_area / r.blue_area;
  r.saturated = r.ratio >= 1.0;
  r.nbar = nbar_from_ratio(r.ratio);
  return r;
}

// ---------------------------------------------------------------------------

double CoolingModelParams::heating() const {
  const double h = heating_prob_per_cycle.value_or(eta_op * eta_op * photons_per_cycle);
  if (h < 0.0 || h > 1.0) throw std::invalid_argument("CoolingModelParams: heating probability outside [0, 1]");
  return h;
}

double rsc_transfer_probability(int n, const CoolingModelParams& model, double eta, double rabi0) {
  if (n <= 0) return 0.0;
  const double target = sideband_coupling(model.pi_pulse_target_n, -1, rabi0, eta);
  if (target <= 0.0) throw std::invalid_argument("rsc: pi-pulse target level must be >= 1");
  const double x = 0.5 * constants::pi * sideband_coupling(n, -1, rabi0, eta) / target;
  const double s = model.rabi_spread;
  return 0.5 * (1.0 - std::cos(2.0 * x) * std::exp(-2.0 * s * s * x * x));
}

std::vector<CoolingStep> rsc_simulate(double nbar_init, const CoolingModelParams& model, double eta, double rabi0) {
  if (!(nbar_init >= 0.0)) throw std::invalid_argument("rsc_simulate: nbar_init must be >= 0");
  if (model.cycles < 0) throw std::invalid_argument("rsc_simulate: cycles must be >= 0");
  const int dim = model.fock_dim;
  const double h = model.heating();

  std::vector<double> p = thermal_weights(nbar_init, dim);
  std::vector<double> transfer(static_cast<std::size_t>(dim));
  for (int n = 0; n < dim; ++n) transfer[n] = rsc_transfer_probability(n, model, eta, rabi0);

  auto normalise_and_record = [&](int cycle, std::vector<CoolingStep>& out) {
    double total = 0.0;
    for (double w : p) total += w;
    double mean = 0.0;
    for (int n = 0; n < dim; ++n) {
      p[n] /= total;
      mean += n * p[n];
    }
    out.push_back({cycle, mean, p});
  };

  std::vector<CoolingStep> out;
  out.reserve(static_cast<std::size_t>(model.cycles) + 1);
  normalise_and_record(0, out);
  std::vector<double> next(static_cast<std::size_t>(dim));
  for (int cycle = 1; cycle <= model.cycles; ++cycle) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int n = 0; n < dim; ++n) {
      const double moved = p[n] * transfer[n];
      next[n] += p[n] - moved;
      if (moved == 0.0) continue;
      next[n - 1] += moved * (1.0 - h);
      next[n] += moved * h;  // recoil puts the atom back where it started
    }
    p.swap(next);
    normalise_and_record(cycle, out);
  }
  return out;
}

// ---------------------------------------------------------------------------

double od_from_transmission(double transmission) {
  if (!(transmission > 0.0) || transmission > 1.0) {
    throw std::invalid_argument("od_from_transmission: transmission must lie in (0, 1]");
  }
  return -std::log(transmission);
}

double atoms_from_od(double od, const DetectionParams& det) {
  if (!(det.atoms_per_unit_od > 0.0)) throw std::invalid_argument("atoms_from_od: atoms_per_unit_od must be > 0");
  return od * det.atoms_per_unit_od;
}

}  // namespace catsim
