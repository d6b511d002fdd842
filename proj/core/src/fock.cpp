#include "catsim/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace catsim {

namespace {

void require_finite(complex alpha, const char* what) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw std::invalid_argument(std::string(what) + ": non-finite amplitude");
  }
}

}  // namespace

FockSpace::FockSpace(int dim) : dim_(dim) {
  if (dim < 2) throw std::invalid_argument("FockSpace: dim must be >= 2, got " + std::to_string(dim));
}

int default_fock_dim(double alpha_max) {
  const double a = std::abs(alpha_max);
  return static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0));
}

bool truncation_reliable(complex alpha, const FockSpace& space) {
  return std::norm(alpha) <= space.dim() / 4.0;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(FockSpace space, Eigen::VectorXcd amplitudes, double norm_deficiency)
    : space_(space), amplitudes_(std::move(amplitudes)), norm_deficiency_(norm_deficiency) {
  if (amplitudes_.size() != space_.dim()) {
    throw std::invalid_argument("StateVector: amplitude count does not match FockSpace dim");
  }
}

StateVector StateVector::fock(FockSpace space, int n) {
  if (n < 0 || n >= space.dim()) throw std::out_of_range("StateVector::fock: level outside truncation");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dim());
  v[n] = 1.0;
  return StateVector(space, std::move(v));
}

std::vector<double> StateVector::populations() const {
  std::vector<double> p(static_cast<std::size_t>(dim()));
  for (int n = 0; n < dim(); ++n) p[n] = std::norm(amplitudes_[n]);
  return p;
}

complex StateVector::overlap(const StateVector& other) const {
  if (!(space_ == other.space_)) throw std::invalid_argument("overlap: FockSpace mismatch");
  return amplitudes_.dot(other.amplitudes_);  // conjugates the left operand
}

// ---------------------------------------------------------------------------

Operator::Operator(FockSpace space, Eigen::MatrixXcd entries, bool truncation_warning)
    : space_(space), entries_(std::move(entries)), truncation_warning_(truncation_warning) {
  if (entries_.rows() != space_.dim() || entries_.cols() != space_.dim()) {
    throw std::invalid_argument("Operator: matrix shape does not match FockSpace dim");
  }
}

Operator Operator::identity(FockSpace space) {
  return Operator(space, Eigen::MatrixXcd::Identity(space.dim(), space.dim()));
}

Operator Operator::adjoint() const { return Operator(space_, entries_.adjoint(), truncation_warning_); }

StateVector Operator::apply(const StateVector& state) const {
  if (!(space_ == state.space())) throw std::invalid_argument("Operator::apply: FockSpace mismatch");
  return StateVector(space_, entries_ * state.amplitudes());
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  if (!(lhs.space_ == rhs.space_)) throw std::invalid_argument("Operator product: FockSpace mismatch");
  return Operator(lhs.space_, lhs.entries_ * rhs.entries_,
                  lhs.truncation_warning_ || rhs.truncation_warning_);
}

Operator annihilation(FockSpace space) {
  const int d = space.dim();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(space, std::move(a));
}

Operator creation(FockSpace space) { return annihilation(space).adjoint(); }

Operator number_operator(FockSpace space) {
  const int d = space.dim();
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return Operator(space, std::move(n));
}

// ---------------------------------------------------------------------------

StateVector coherent_state(complex alpha, FockSpace space) {
  require_finite(alpha, "coherent_state");
  const int d = space.dim();
  Eigen::VectorXcd c(d);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < d; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  const double captured = c.squaredNorm();
  c /= std::sqrt(captured);
  return StateVector(space, std::move(c), 1.0 - captured);
}

double laguerre(int n, int k, double x) {
  if (n < 0) throw std::invalid_argument("laguerre: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + k - x;
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

Operator displacement_operator(complex alpha, FockSpace space) {
  require_finite(alpha, "displacement_operator");
  const int d = space.dim();
  const bool warn = !truncation_reliable(alpha, space);
  if (alpha == complex(0.0, 0.0)) return Operator(space, Eigen::MatrixXcd::Identity(d, d), warn);

  const double x = std::norm(alpha);
  const double log_abs = std::log(std::abs(alpha));
  const double arg = std::arg(alpha);
  Eigen::MatrixXcd D(d, d);

  // Walk each diagonal offset k = |m - n|: the Laguerre recurrence runs along
  // the lower index, so every diagonal costs O(dim).
  for (int k = 0; k < d; ++k) {
    const complex phase_lower = std::polar(1.0, k * arg);                         // alpha^k
    const complex phase_upper = (k % 2 == 0 ? 1.0 : -1.0) * std::polar(1.0, -k * arg);  // (-alpha^*)^k
    double prev = 0.0;
    double cur = 1.0;
    for (int lo = 0; lo + k < d; ++lo) {
      if (lo == 1) {
        prev = 1.0;
        cur = 1.0 + k - x;
      } else if (lo > 1) {
        const int j = lo - 1;
        const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
      }
      double value = 0.0;
      if (cur != 0.0) {
        const double log_mag = 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + k + 1.0)) + k * log_abs -
                               0.5 * x + std::log(std::abs(cur));
        value = std::copysign(std::exp(log_mag), cur);
      }
      D(lo + k, lo) = value * phase_lower;
      if (k > 0) D(lo, lo + k) = value * phase_upper;
    }
  }
  return Operator(space, std::move(D), warn);
}

std::vector<double> thermal_weights(double nbar, int dim) {
  if (!std::isfinite(nbar) || nbar < 0.0) {
    throw std::invalid_argument("thermal_weights: nbar must be finite and >= 0");
  }
  std::vector<double> p(static_cast<std::size_t>(dim), 0.0);
  if (nbar == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double ratio = nbar / (nbar + 1.0);
  p[0] = 1.0 / (nbar + 1.0);
  for (int n = 1; n < dim; ++n) p[n] = p[n - 1] * ratio;
  return p;
}

MixtureState thermal_mixture(double nbar, FockSpace space) {
  const std::vector<double> p = thermal_weights(nbar, space.dim());
  double captured = 0.0;
  for (double w : p) captured += w;

  std::vector<MixtureState::Component> comps;
  for (int n = 0; n < space.dim(); ++n) {
    if (p[n] <= 0.0) continue;
    comps.push_back({p[n] / captured, StateVector::fock(space, n)});
  }
  return MixtureState(std::move(comps), 1.0 - captured);
}

namespace {

void require_normalized(double norm2, const char* what) {
  if (std::abs(norm2 - 1.0) > 1e-8) {
    throw std::invalid_argument(std::string(what) + ": state is not normalised (|psi|^2 = " +
                                std::to_string(norm2) + ")");
  }
}

double mean_phonon_unchecked(const StateVector& state) {
  double m = 0.0;
  for (int n = 1; n < state.dim(); ++n) m += n * std::norm(state[n]);
  return m;
}

}  // namespace

double mean_phonon(const StateVector& state) {
  require_normalized(state.amplitudes().squaredNorm(), "mean_phonon");
  return mean_phonon_unchecked(state);
}

double mean_phonon(const MixtureState& state) {
  require_normalized(state.total_weight(), "mean_phonon(mixture)");
  // Far-tail components may leak out of the truncation; only the weighted
  // norm has to hold.
  double m = 0.0, norm = 0.0;
  for (const auto& c : state.components()) {
    norm += c.weight * c.state.amplitudes().squaredNorm();
    m += c.weight * mean_phonon_unchecked(c.state);
  }
  require_normalized(norm, "mean_phonon(mixture)");
  return m;
}

complex alpha_of_t(double eta, double rabi, double delta, double t) {
  if (t < 0.0) throw std::invalid_argument("alpha_of_t: negative duration");
  const double x = delta * t;
  double envelope;  // (eta rabi / delta) sin(x/2), written as (eta rabi t / 2) sinc(x/2)
  if (std::abs(x) < 1e-4) {
    envelope = 0.5 * eta * rabi * t * (1.0 - x * x / 24.0 + x * x * x * x / 1920.0);
  } else {
    envelope = eta * rabi / delta * std::sin(0.5 * x);
  }
  return std::polar(1.0, -0.5 * x) * envelope;
}

}  // namespace catsim
