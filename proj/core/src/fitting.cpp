#include "catsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "catsim/constants.hpp"
#include "catsim/interferometer.hpp"

namespace catsim {

void Dataset::validate(std::size_t n_params) const {
  if (rows.size() < n_params + 2) {
    throw std::invalid_argument("dataset: need at least " + std::to_string(n_params + 2) + " rows, got " +
                                std::to_string(rows.size()));
  }
  for (const DataRow& r : rows) {
    if (!std::isfinite(r.x) || !std::isfinite(r.y)) throw std::invalid_argument("dataset: non-finite value");
    if (!(r.sigma > 0.0) || !std::isfinite(r.sigma)) throw std::invalid_argument("dataset: sigma must be > 0");
  }
}

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::singular_jacobian: return "singular_jacobian";
  }
  return "unknown";
}

std::size_t FitResult::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("FitResult: no parameter named " + name);
  return static_cast<std::size_t>(it - names.begin());
}

double FitResult::value(const std::string& name) const { return values[static_cast<Eigen::Index>(index(name))]; }

double FitResult::sigma(const std::string& name) const {
  const auto i = static_cast<Eigen::Index>(index(name));
  return std::sqrt(covariance(i, i));
}

namespace {

double fd_step(double p) { return 6e-6 * std::max(1.0, std::abs(p)); }

}  // namespace

Eigen::MatrixXd central_difference_jacobian(const FitModel& model, std::span<const double> xs,
                                            std::span<const double> params) {
  const auto m = static_cast<Eigen::Index>(xs.size());
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd J(m, n);
  std::vector<double> p(params.begin(), params.end());
  if (model.gradient) {
    std::vector<double> g(params.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      model.gradient(xs[i], p, g);
      for (Eigen::Index j = 0; j < n; ++j) J(i, j) = g[j];
    }
    return J;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = fd_step(params[j]);
    p[j] = params[j] + h;
    const double hp = p[j] - params[j];
    std::vector<double> plus(xs.size());
    for (Eigen::Index i = 0; i < m; ++i) plus[i] = model.value(xs[i], p);
    p[j] = params[j] - h;
    const double hm = params[j] - p[j];
    for (Eigen::Index i = 0; i < m; ++i) J(i, j) = (plus[i] - model.value(xs[i], p)) / (hp + hm);
    p[j] = params[j];
  }
  return J;
}

namespace {

struct Problem {
  const FitModel& model;
  std::vector<double> xs, ys, inv_sigma;

  Eigen::VectorXd residuals(const std::vector<double>& p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) r[i] = (ys[i] - model.value(xs[i], p)) * inv_sigma[i];
    return r;
  }

  // Jacobian of the weighted residuals (y - f) / sigma.
  Eigen::MatrixXd jacobian(const std::vector<double>& p) const {
    Eigen::MatrixXd J = central_difference_jacobian(model, xs, p);
    for (std::size_t i = 0; i < xs.size(); ++i) J.row(static_cast<Eigen::Index>(i)) *= -inv_sigma[i];
    return J;
  }
};

void project(std::vector<double>& p, const std::optional<Bounds>& b) {
  if (!b) return;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j < b->lower.size()) p[j] = std::max(p[j], b->lower[j]);
    if (j < b->upper.size()) p[j] = std::min(p[j], b->upper[j]);
  }
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& A, bool& singular) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double cut = top * 1e-13 * static_cast<double>(A.rows());
  Eigen::VectorXd inv(ev.size());
  singular = !(top > 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut && top > 0.0) {
      inv[i] = 1.0 / ev[i];
    } else {
      inv[i] = 0.0;
      singular = true;
    }
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FitResult least_squares(const FitModel& model, const Dataset& data, std::vector<double> initial,
                        const std::optional<Bounds>& bounds, const FitOptions& options) {
  const std::size_t n = model.names.size();
  if (initial.size() != n) throw std::invalid_argument("least_squares: initial guess has the wrong length");
  data.validate(n);

  Problem prob{model, {}, {}, {}};
  for (const DataRow& r : data.rows) {
    prob.xs.push_back(r.x);
    prob.ys.push_back(r.y);
    prob.inv_sigma.push_back(1.0 / r.sigma);
  }

  std::vector<double> p = std::move(initial);
  project(p, bounds);
  Eigen::VectorXd r = prob.residuals(p);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) throw std::domain_error("least_squares: model is not finite at the initial guess");

  FitResult out;
  out.names = model.names;
  double lambda = options.initial_damping;
  bool done = false;
  int it = 0;
  Eigen::MatrixXd J;
  while (!done && it < options.max_iterations) {
    ++it;
    J = prob.jacobian(p);
    const Eigen::VectorXd g = J.transpose() * r;
    if (cost == 0.0 || g.lpNorm<Eigen::Infinity>() < options.gradient_tol) {
      done = true;
      break;
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    const double diag_floor = 1e-12 * std::max(A.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd M = A;
      for (Eigen::Index j = 0; j < M.rows(); ++j) M(j, j) += lambda * std::max(A(j, j), diag_floor);
      const Eigen::VectorXd dp = M.ldlt().solve(-g);
      std::vector<double> trial = p;
      for (std::size_t j = 0; j < n; ++j) trial[j] += dp[static_cast<Eigen::Index>(j)];
      project(trial, bounds);
      const Eigen::VectorXd r_trial = prob.residuals(trial);
      const double cost_trial = 0.5 * r_trial.squaredNorm();

      if (std::isfinite(cost_trial) && cost_trial <= cost && dp.allFinite()) {
        double step = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          step = std::max(step, std::abs(trial[j] - p[j]));
          scale = std::max(scale, std::abs(trial[j]));
        }
        const double rel_cost = (cost - cost_trial) / std::max(cost, std::numeric_limits<double>::min());
        p = std::move(trial);
        r = r_trial;
        cost = cost_trial;
        lambda = std::max(lambda * 0.1, 1e-15);
        accepted = true;
        if (rel_cost < options.cost_rtol && step <= options.step_rtol * std::max(scale, 1e-12)) done = true;
      } else {
        lambda *= 10.0;
        // No downhill step at any damping: a minimum to working precision.
        if (lambda > 1e16) {
          done = true;
          break;
        }
      }
    }
  }

  J = prob.jacobian(p);
  bool singular = false;
  out.covariance = pseudo_inverse(J.transpose() * J, singular);
  out.values = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(n));
  out.residual_norm = std::sqrt(2.0 * cost);
  out.iterations = it;
  if (singular) {
    out.status = FitStatus::singular_jacobian;
  } else {
    out.status = done ? FitStatus::converged : FitStatus::max_iterations;
  }
  out.converged = out.status == FitStatus::converged;
  out.extras["chi2"] = 2.0 * cost;
  out.extras["dof"] = static_cast<double>(data.size()) - static_cast<double>(n);
  return out;
}

double wrap_phase(double phase) {
  double w = std::remainder(phase, constants::two_pi);  // [-pi, pi]
  if (w <= -constants::pi) w += constants::two_pi;
  return w;
}

std::vector<double> unwrap_phases(const std::vector<double>& phases) {
  std::vector<double> out = phases;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double jump = out[i] - out[i - 1];
    out[i] -= constants::two_pi * std::round(jump / constants::two_pi);
  }
  return out;
}

FitModel residual_fringe_model(double epsilon, double nbar0, double delta_M) {
  FitModel m;
  m.names = {"alpha", "C", "phi_f"};
  m.value = [=](double phi, std::span<const double> p) {
    return fringe_model(std::abs(p[0]), p[1], p[2], epsilon, nbar0, phi, delta_M);
  };
  return m;
}

std::array<double, 3> seed_residual_fringe(const FringeDataset& data, double epsilon, double nbar0, double delta_M,
                                      double alpha_guess) {
  data.validate(3);
  const FitModel m = residual_fringe_model(epsilon, nbar0, delta_M);
  double lo = data.rows.front().y, hi = lo;
  for (const DataRow& r : data.rows) {
    lo = std::min(lo, r.y);
    hi = std::max(hi, r.y);
  }

  // Peak-to-peak of the C = 1 model over a full turn of phi' is independent of phi_f.
  double mlo = 1.0, mhi = 0.0;
  for (int k = 0; k < 256; ++k) {
    const std::array<double, 3> p{alpha_guess, 1.0, 0.0};
    const double v = m.value(constants::two_pi * k / 256.0, p);
    mlo = std::min(mlo, v);
    mhi = std::max(mhi, v);
  }
  const double C = (mhi - mlo) > 1e-12 ? std::clamp((hi - lo) / (mhi - mlo), 0.05, 1.0) : 1.0;

  double best_phi = 0.0, best_cost = std::numeric_limits<double>::infinity();
  constexpr int scan = 64;
  for (int k = 0; k < scan; ++k) {
    const double phi_f = -constants::pi + constants::two_pi * (k + 0.5) / scan;
    const std::array<double, 3> p{alpha_guess, C, phi_f};
    double c = 0.0;
    for (const DataRow& r : data.rows) {
      const double d = (r.y - m.value(r.x, p)) / r.sigma;
      c += d * d;
    }
    if (c < best_cost) {
      best_cost = c;
      best_phi = phi_f;
    }
  }
  return {alpha_guess, C, best_phi};
}

FitResult fit_residual_fringe(const FringeDataset& data, double epsilon, double nbar0, double delta_M,
                         const std::array<double, 3>& initial) {
  const FitModel m = residual_fringe_model(epsilon, nbar0, delta_M);
  FitResult res = least_squares(m, data, {initial.begin(), initial.end()});
  res.values[0] = std::abs(res.values[0]);
  const double raw = res.values[2];
  const double wrapped = wrap_phase(raw);
  res.values[2] = wrapped;
  res.extras["phi_f_unwrapped"] = raw;
  res.extras["phi_f_winding"] = std::round((raw - wrapped) / constants::two_pi);
  return res;
}

FitResult fit_sinusoid(const Dataset& data) {
  data.validate(3);
  double xmin = data.rows.front().x, xmax = xmin;
  for (const DataRow& r : data.rows) {
    xmin = std::min(xmin, r.x);
    xmax = std::max(xmax, r.x);
  }
  if (data.size() < 5 || xmax - xmin < constants::pi) {
    throw std::invalid_argument("fit_sinusoid: need >= 5 points spanning at least half a period");
  }

  // Linear weighted fit of o + a cos x + b sin x.
  const auto m = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const DataRow& r = data.rows[static_cast<std::size_t>(i)];
    const double w = 1.0 / r.sigma;
    X(i, 0) = w;
    X(i, 1) = w * std::cos(r.x);
    X(i, 2) = w * std::sin(r.x);
    y[i] = w * r.y;
  }
  const Eigen::Vector3d lin = X.colPivHouseholderQr().solve(y);
  const double amp0 = std::hypot(lin[1], lin[2]);

  FitModel model;
  model.names = {"amplitude", "phase", "offset"};
  model.value = [](double x, std::span<const double> p) { return p[2] + p[0] * std::cos(x + p[1]); };
  model.gradient = [](double x, std::span<const double> p, std::span<double> g) {
    g[0] = std::cos(x + p[1]);
    g[1] = -p[0] * std::sin(x + p[1]);
    g[2] = 1.0;
  };

  if (amp0 <= 1e-12 * std::max(1.0, std::abs(lin[0]))) {
    FitResult res;
    res.names = model.names;
    res.values = Eigen::Vector3d(0.0, 0.0, lin[0]);
    bool singular = false;
    const Eigen::MatrixXd lin_cov = pseudo_inverse(X.transpose() * X, singular);
    res.covariance = Eigen::Matrix3d::Zero();
    res.covariance(0, 0) = 0.5 * (lin_cov(1, 1) + lin_cov(2, 2));
    res.covariance(1, 1) = std::numeric_limits<double>::infinity();
    res.covariance(2, 2) = lin_cov(0, 0);
    res.residual_norm = (X * lin - y).norm();
    res.converged = true;
    res.status = FitStatus::converged;
    res.extras["phase_degenerate"] = 1.0;
    res.extras["contrast"] = 0.0;
    return res;
  }

  // a cos x + b sin x = A cos(x + phase) with A cos(phase) = a, -A sin(phase) = b.
  FitResult res = least_squares(model, data, {amp0, std::atan2(-lin[2], lin[1]), lin[0]});
  if (res.values[0] < 0.0) {
    res.values[0] = -res.values[0];
    res.values[1] += constants::pi;
    // Covariances involving the amplitude change sign with it.
    res.covariance.row(0) *= -1.0;
    res.covariance.col(0) *= -1.0;
  }
  res.values[1] = wrap_phase(res.values[1]);
  res.extras["phase_degenerate"] = 0.0;
  res.extras["contrast"] = res.values[2] != 0.0 ? res.values[0] / res.values[2] : 0.0;
  return res;
}

FitResult fit_two_pulse(const Dataset& data) {
  data.validate(2);
  double lo = data.rows.front().y, hi = lo;
  for (const DataRow& r : data.rows) {
    lo = std::min(lo, r.y);
    hi = std::max(hi, r.y);
  }
  FitModel model;
  model.names = {"nbar0", "alpha"};
  model.value = [](double phi, std::span<const double> p) { return p[0] + 2.0 * p[1] * p[1] * (1.0 + std::cos(phi)); };
  model.gradient = [](double phi, std::span<const double> p, std::span<double> g) {
    g[0] = 1.0;
    g[1] = 4.0 * p[1] * (1.0 + std::cos(phi));
  };
  FitResult res = least_squares(model, data, {lo, std::sqrt(std::max(hi - lo, 1e-6) / 4.0)});
  if (res.values[1] < 0.0) {
    res.values[1] = -res.values[1];
    res.covariance.row(1) *= -1.0;
    res.covariance.col(1) *= -1.0;
  }
  return res;
}

}  // namespace catsim
