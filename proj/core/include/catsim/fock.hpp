#pragma once

// Truncated single-oscillator Hilbert space: Fock states, ladder operators,
// coherent and thermal states, the displacement operator and the analytic
// drive amplitude of a spin-conditioned forced oscillator.
//
// All objects are immutable values once constructed.

#include <complex>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace catsim {

using complex = std::complex<double>;

/// Truncation of the oscillator to the levels |0>, ..., |dim-1>.
class FockSpace {
 public:
  explicit FockSpace(int dim);

  int dim() const { return dim_; }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int dim_;
};

/// Truncation dimension ceil(|alpha|^2 + 6|alpha| + 10), which keeps the
/// coherent-state tail below 1e-8 for |alpha| <= 2.
int default_fock_dim(double alpha_max);

/// False when |alpha|^2 > dim/4, i.e. the truncated D(alpha) is no longer a
/// good approximation of the untruncated operator on the low levels.
bool truncation_reliable(complex alpha, const FockSpace& space);

class StateVector {
 public:
  StateVector(FockSpace space, Eigen::VectorXcd amplitudes, double norm_deficiency = 0.0);

  /// Number state |n>.
  static StateVector fock(FockSpace space, int n);

  const FockSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  complex operator[](int n) const { return amplitudes_[n]; }

  double norm() const { return amplitudes_.norm(); }

  /// 1 - sum |c_n|^2 of the untruncated expansion before renormalisation.
  /// Zero for states that are exact on the truncated space.
  double norm_deficiency() const { return norm_deficiency_; }

  /// Fock distribution P(n) = |c_n|^2.
  std::vector<double> populations() const;

  complex overlap(const StateVector& other) const;

 private:
  FockSpace space_;
  Eigen::VectorXcd amplitudes_;
  double norm_deficiency_;
};

class Operator {
 public:
  Operator(FockSpace space, Eigen::MatrixXcd entries, bool truncation_warning = false);

  static Operator identity(FockSpace space);

  const FockSpace& space() const { return space_; }
  const Eigen::MatrixXcd& matrix() const { return entries_; }
  complex operator()(int row, int col) const { return entries_(row, col); }

  /// Set by displacement_operator when |alpha|^2 > dim/4.
  bool truncation_warning() const { return truncation_warning_; }

  Operator adjoint() const;
  StateVector apply(const StateVector& state) const;

  friend Operator operator*(const Operator& lhs, const Operator& rhs);

 private:
  FockSpace space_;
  Eigen::MatrixXcd entries_;
  bool truncation_warning_;
};

Operator annihilation(FockSpace space);
Operator creation(FockSpace space);
Operator number_operator(FockSpace space);

/// Weighted collection of pure states representing a classical mixture.
/// Weights sum to one; `discarded_weight` records what was removed from the
/// distribution before renormalising (e.g. a truncated thermal tail).
template <class State>
class Mixture {
 public:
  struct Component {
    double weight;
    State state;
  };

  Mixture() = default;
  Mixture(std::vector<Component> components, double discarded_weight = 0.0)
      : components_(std::move(components)), discarded_weight_(discarded_weight) {}

  static Mixture pure(State state) { return Mixture({Component{1.0, std::move(state)}}); }

  const std::vector<Component>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  double discarded_weight() const { return discarded_weight_; }

  double total_weight() const {
    double s = 0.0;
    for (const auto& c : components_) s += c.weight;
    return s;
  }

  /// Applies a pure-state map to every component, keeping the weights.
  template <class F>
  auto map(F&& f) const -> Mixture<std::decay_t<decltype(f(std::declval<const State&>()))>> {
    using Out = std::decay_t<decltype(f(std::declval<const State&>()))>;
    std::vector<typename Mixture<Out>::Component> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back({c.weight, f(c.state)});
    return Mixture<Out>(std::move(out), discarded_weight_);
  }

 private:
  std::vector<Component> components_;
  double discarded_weight_ = 0.0;
};

using MixtureState = Mixture<StateVector>;

/// |alpha> = exp(-|alpha|^2/2) sum_n alpha^n / sqrt(n!) |n>, renormalised on the
/// truncated space. The pre-renormalisation deficiency is kept on the state.
StateVector coherent_state(complex alpha, FockSpace space);

/// Matrix elements of D(alpha) = exp(alpha a^dag - alpha^* a) from the
/// closed-form associated-Laguerre expression (log-gamma arithmetic):
///   <m|D|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^(m-n)(|alpha|^2),  m >= n
///   <m|D|n> = sqrt(m!/n!) (-alpha^*)^(n-m) e^{-|alpha|^2/2} L_m^(n-m)(|alpha|^2), m < n
Operator displacement_operator(complex alpha, FockSpace space);

/// Bose-Einstein weights p_n = nbar^n / (nbar+1)^(n+1) for n < dim, before
/// renormalisation.
std::vector<double> thermal_weights(double nbar, int dim);

/// Mixture of number states with thermal weights, renormalised over the
/// truncation; the discarded tail is recorded.
MixtureState thermal_mixture(double nbar, FockSpace space);

double mean_phonon(const StateVector& state);
double mean_phonon(const MixtureState& state);

/// Drive-frame displacement of a forced oscillator after time t:
///   alpha = (eta * rabi / delta) sin(delta t / 2) e^{-i delta t / 2},
/// with the analytic limit eta * rabi * t / 2 as delta -> 0. The drive phase
/// is applied separately by the caller.
complex alpha_of_t(double eta, double rabi, double delta, double t);

/// Generalised Laguerre polynomial L_n^(k)(x) by the three-term recurrence.
double laguerre(int n, int k, double x);

}  // namespace catsim
