#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) least squares and the fit models
// used on interferometer data.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace catsim {

struct DataRow {
  double x = 0.0;
  double y = 0.0;
  double sigma = 1.0;
};

/// Rows of (x, y, sigma). For fringe data x is phi in rad and y is P_up; for
/// two-pulse data y is the mean phonon number.
struct Dataset {
  std::vector<DataRow> rows;

  std::size_t size() const { return rows.size(); }

  /// Throws unless there are at least n_params + 2 rows with finite values
  /// and sigma > 0.
  void validate(std::size_t n_params) const;
};

using FringeDataset = Dataset;

struct FitModel {
  std::vector<std::string> names;
  std::function<double(double x, std::span<const double> params)> value;
  // Optional analytic gradient d value / d params; central differences otherwise.
  std::function<void(double x, std::span<const double> params, std::span<double> grad)> gradient;
};

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct FitOptions {
  int max_iterations = 200;
  double cost_rtol = 1e-10;      // relative cost change of an accepted step
  double step_rtol = 1e-10;      // relative parameter step paired with cost_rtol
  double gradient_tol = 1e-8;    // infinity norm of J^T r
  double initial_damping = 1e-3;
};

enum class FitStatus { converged, max_iterations, singular_jacobian };

const char* to_string(FitStatus status);

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::MatrixXd covariance;  // (J^T W J)^{-1} at the solution, not rescaled by chi^2
  double residual_norm = 0.0;  // sqrt(sum ((y - f) / sigma)^2)
  bool converged = false;
  FitStatus status = FitStatus::max_iterations;
  int iterations = 0;
  std::map<std::string, double> extras;

  double value(const std::string& name) const;
  double sigma(const std::string& name) const;
  std::size_t index(const std::string& name) const;
};

/// Central-difference Jacobian d f(x_i) / d p_j of the raw model values.
Eigen::MatrixXd central_difference_jacobian(const FitModel& model, std::span<const double> xs,
                                            std::span<const double> params);

/// Levenberg-Marquardt with Marquardt diagonal scaling. Parameters are
/// projected onto the bounds after every trial step. Accepted steps never
/// increase the cost.
FitResult least_squares(const FitModel& model, const Dataset& data, std::vector<double> initial,
                        const std::optional<Bounds>& bounds = std::nullopt, const FitOptions& options = {});

/// Wraps to (-pi, pi].
double wrap_phase(double phase);

/// Shifts each value by a multiple of 2 pi to minimise the jump from its predecessor.
std::vector<double> unwrap_phases(const std::vector<double>& phases);

/// Residual-drive fringe with the non-fitted inputs held fixed;
/// parameters (alpha, C, phi_f).
FitModel residual_fringe_model(double epsilon, double nbar0, double delta_M);

/// Deterministic start point: alpha as given, C from the observed
/// peak-to-peak relative to the C = 1 model, phi_f from a 64-point scan of
/// the cost.
std::array<double, 3> seed_residual_fringe(const FringeDataset& data, double epsilon, double nbar0, double delta_M,
                                      double alpha_guess);

/// Fits (alpha, C, phi_f). alpha is reported as |alpha|; phi_f is wrapped to
/// (-pi, pi] with the removed turns in extras["phi_f_winding"] and the
/// unwrapped value in extras["phi_f_unwrapped"].
FitResult fit_residual_fringe(const FringeDataset& data, double epsilon, double nbar0, double delta_M,
                         const std::array<double, 3>& initial);

/// y = offset + amplitude cos(x + phase), amplitude >= 0. extras["contrast"]
/// is amplitude / offset (peak-to-peak over twice the mean). Constant data
/// returns amplitude 0 with extras["phase_degenerate"] = 1.
FitResult fit_sinusoid(const Dataset& data);

/// <n> = nbar0 + 2|alpha|^2 (1 + cos phi); parameters (nbar0, alpha), alpha >= 0.
FitResult fit_two_pulse(const Dataset& data);

}  // namespace catsim
