#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "catsim/constants.hpp"
#include "catsim/fitting.hpp"
#include "catsim/interferometer.hpp"

using namespace catsim;
using constants::pi;

namespace {

std::vector<double> phase_grid(int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(2.0 * pi * i / n);
  return xs;
}

Dataset sample(const std::function<double(double)>& f, const std::vector<double>& xs, double sigma = 1.0) {
  Dataset d;
  for (double x : xs) d.rows.push_back({x, f(x), sigma});
  return d;
}

// Five-point stencil, independent of the library's difference scheme.
double stencil(const FitModel& m, double x, std::vector<double> p, std::size_t j) {
  const double h = 1e-3 * std::max(1.0, std::abs(p[j]));
  auto at = [&](double shift) {
    std::vector<double> q = p;
    q[j] += shift;
    return m.value(x, q);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

}  // namespace

TEST(LeastSquares, LinearModelIsExact) {
  FitModel line{{"a"}, [](double x, std::span<const double> p) { return p[0] * x; }, {}};
  const Dataset d = sample([](double x) { return 2.5 * x; }, {1, 2, 3, 4, 5});
  const FitResult r = least_squares(line, d, {0.1});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.status, FitStatus::converged);
  EXPECT_NEAR(r.value("a"), 2.5, 1e-10);
  EXPECT_NEAR(r.residual_norm, 0.0, 1e-9);
  // (J^T J)^{-1} = 1 / sum x^2
  EXPECT_NEAR(r.covariance(0, 0), 1.0 / 55.0, 1e-12);
  EXPECT_THROW(r.value("b"), std::out_of_range);
}

TEST(LeastSquares, BoundsAreRespected) {
  FitModel line{{"a"}, [](double x, std::span<const double> p) { return p[0] * x; }, {}};
  const Dataset d = sample([](double x) { return 2.5 * x; }, {1, 2, 3, 4, 5});
  const FitResult r = least_squares(line, d, {0.1}, Bounds{{0.0}, {2.0}});
  EXPECT_LE(r.value("a"), 2.0);
}

TEST(LeastSquares, SingularDirectionIsReported) {
  FitModel redundant{{"a", "b"}, [](double x, std::span<const double> p) { return (p[0] + p[1]) * x; }, {}};
  const Dataset d = sample([](double x) { return 3.0 * x; }, {1, 2, 3, 4, 5});
  const FitResult r = least_squares(redundant, d, {1.0, 1.0});
  EXPECT_EQ(r.status, FitStatus::singular_jacobian);
  EXPECT_NEAR(r.value("a") + r.value("b"), 3.0, 1e-8);
}

TEST(Dataset, Validation) {
  Dataset d = sample([](double x) { return x; }, {1, 2, 3, 4});
  EXPECT_NO_THROW(d.validate(2));
  EXPECT_THROW(d.validate(3), std::invalid_argument);
  d.rows[1].sigma = 0.0;
  EXPECT_THROW(d.validate(1), std::invalid_argument);
  d.rows[1].sigma = 1.0;
  d.rows[2].y = NAN;
  EXPECT_THROW(d.validate(1), std::invalid_argument);
}

TEST(FringeFit, NoiselessRecoveryFromOffsetStart) {
  const double eps = 0.19, n0 = 0.25, dM = pi / 2.0;
  const Dataset d = sample([&](double x) { return fringe_model(1.42, 0.85, 0.6, eps, n0, x, dM); }, phase_grid(64));
  for (double scale : {0.7, 1.3}) {
    const FitResult r = fit_residual_fringe(d, eps, n0, dM, {1.42 * scale, 0.85 * scale, 0.6 * scale});
    ASSERT_TRUE(r.converged) << scale;
    EXPECT_NEAR(r.value("alpha"), 1.42, 1e-8);
    EXPECT_NEAR(r.value("C"), 0.85, 1e-8);
    EXPECT_NEAR(r.value("phi_f"), 0.6, 1e-8);
  }
}

TEST(FringeFit, PhaseIsWrapped) {
  const double eps = 0.19, n0 = 0.25, dM = pi / 2.0;
  const Dataset d = sample([&](double x) { return fringe_model(1.0, 1.0, 2.0 * pi + 0.4, eps, n0, x, dM); },
                           phase_grid(48));
  const FitResult r = fit_residual_fringe(d, eps, n0, dM, {1.0, 1.0, 2.0 * pi + 0.45});
  EXPECT_NEAR(r.value("phi_f"), 0.4, 1e-8);
  EXPECT_NEAR(r.extras.at("phi_f_unwrapped") - 2.0 * pi * r.extras.at("phi_f_winding"), 0.4, 1e-8);
}

TEST(FringeFit, NoisyCoverage) {
  const double eps = 0.19, n0 = 0.25, dM = pi / 2.0, sigma = 0.01;
  const std::array<double, 3> truth = {1.42, 0.9, 0.3};
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> noise(0.0, sigma);
  const int reps = 40;
  std::array<int, 3> covered{};
  std::array<double, 3> mean{};
  for (int rep = 0; rep < reps; ++rep) {
    Dataset d;
    for (double x : phase_grid(64)) {
      d.rows.push_back({x, fringe_model(truth[0], truth[1], truth[2], eps, n0, x, dM) + noise(rng), sigma});
    }
    const FitResult r = fit_residual_fringe(d, eps, n0, dM, {1.3 * truth[0], 0.7 * truth[1], 1.3 * truth[2]});
    ASSERT_TRUE(r.converged);
    for (int j = 0; j < 3; ++j) {
      mean[j] += r.values[j] / reps;
      if (std::abs(r.values[j] - truth[j]) <= 2.0 * std::sqrt(r.covariance(j, j))) ++covered[j];
    }
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(mean[j], truth[j], 0.05 * truth[j]) << j;
    EXPECT_GE(covered[j], 32) << j;
  }
}

TEST(FringeFit, JacobianMatchesStencilProperty) {
  const FitModel m = residual_fringe_model(0.19, 0.25, pi / 2.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> p = {0.3 + 1.5 * u(rng), 0.2 + 0.8 * u(rng), 2.0 * pi * u(rng)};
    const std::vector<double> xs = {2.0 * pi * u(rng)};
    const Eigen::MatrixXd J = central_difference_jacobian(m, xs, p);
    for (std::size_t j = 0; j < 3; ++j) {
      const double ref = stencil(m, xs[0], p, j);
      EXPECT_NEAR(J(0, j), ref, 1e-5 * std::max(1e-3, std::abs(ref))) << trial << " " << j;
    }
  }
}

TEST(FringeFit, RefitIsIdempotent) {
  const double eps = 0.19, n0 = 0.25, dM = pi / 2.0;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.01);
  Dataset d;
  for (double x : phase_grid(64)) d.rows.push_back({x, fringe_model(1.2, 0.8, 1.0, eps, n0, x, dM) + noise(rng), 0.01});
  const FitResult first = fit_residual_fringe(d, eps, n0, dM, {1.0, 0.7, 1.2});
  const FitResult again = fit_residual_fringe(d, eps, n0, dM, {first.values[0], first.values[1], first.values[2]});
  EXPECT_LE(again.iterations, 2);
  EXPECT_LT((again.values - first.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FringeFit, SeedLandsNearTruth) {
  const double eps = 0.19, n0 = 0.25, dM = pi / 2.0;
  const Dataset d = sample([&](double x) { return fringe_model(1.42, 0.8, -1.0, eps, n0, x, dM); }, phase_grid(64));
  const auto s = seed_residual_fringe(d, eps, n0, dM, 1.42);
  EXPECT_EQ(s[0], 1.42);
  EXPECT_NEAR(s[1], 0.8, 0.05);
  EXPECT_NEAR(wrap_phase(s[2] + 1.0), 0.0, 2.0 * pi / 64.0);
}

TEST(Sinusoid, ContrastAndPhase) {
  const Dataset d = sample([](double x) { return 0.5 + 0.185 * std::cos(x + pi / 3.0); }, phase_grid(32));
  const FitResult r = fit_sinusoid(d);
  EXPECT_NEAR(r.extras.at("contrast"), 0.37, 1e-10);
  EXPECT_NEAR(r.value("phase"), pi / 3.0, 1e-8);
  EXPECT_NEAR(r.value("amplitude"), 0.185, 1e-10);
  EXPECT_NEAR(r.value("offset"), 0.5, 1e-10);
}

TEST(Sinusoid, NegativeAmplitudeIsFolded) {
  const Dataset d = sample([](double x) { return 1.0 - 0.3 * std::cos(x + 0.2); }, phase_grid(24));
  const FitResult r = fit_sinusoid(d);
  EXPECT_NEAR(r.value("amplitude"), 0.3, 1e-10);
  EXPECT_NEAR(wrap_phase(r.value("phase") - 0.2 - pi), 0.0, 1e-8);
}

TEST(Sinusoid, ConstantDataIsDegenerate) {
  const Dataset d = sample([](double) { return 0.4; }, phase_grid(16));
  const FitResult r = fit_sinusoid(d);
  EXPECT_EQ(r.value("amplitude"), 0.0);
  EXPECT_EQ(r.extras.at("phase_degenerate"), 1.0);
  EXPECT_EQ(r.extras.at("contrast"), 0.0);
  EXPECT_TRUE(std::isinf(r.sigma("phase")));
}

TEST(Sinusoid, ScaleEquivarianceProperty) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 0.02);
  Dataset d;
  for (double x : phase_grid(40)) d.rows.push_back({x, 0.6 + 0.2 * std::cos(x - 0.7) + noise(rng), 1.0});
  const FitResult base = fit_sinusoid(d);
  for (double k : {0.1, 3.0, 250.0}) {
    Dataset scaled = d;
    for (auto& row : scaled.rows) row.y *= k;
    const FitResult r = fit_sinusoid(scaled);
    EXPECT_NEAR(r.value("amplitude"), k * base.value("amplitude"), 1e-9 * k);
    EXPECT_NEAR(r.value("offset"), k * base.value("offset"), 1e-9 * k);
    EXPECT_NEAR(r.value("phase"), base.value("phase"), 1e-8);
    EXPECT_NEAR(r.extras.at("contrast"), base.extras.at("contrast"), 1e-9);
  }
}

TEST(Sinusoid, NeedsEnoughPhaseCoverage) {
  EXPECT_THROW(fit_sinusoid(sample([](double x) { return x; }, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5})),
               std::invalid_argument);
  EXPECT_THROW(fit_sinusoid(sample([](double x) { return x; }, {0.0, 1.0, 2.0, 4.0})), std::invalid_argument);
}

TEST(TwoPulse, ExactRecovery) {
  const Dataset d = sample([](double x) { return 0.25 + 2.0 * 0.36 * 0.36 * (1.0 + std::cos(x)); }, phase_grid(32));
  const FitResult r = fit_two_pulse(d);
  EXPECT_NEAR(r.value("nbar0"), 0.25, 1e-10);
  EXPECT_NEAR(r.value("alpha"), 0.36, 1e-10);
}

TEST(TwoPulse, SimulationOracle) {
  // Two resonant drives on the up spin; the second one at phase phi.
  PhysicalParams p = PhysicalParams::lab_defaults();
  const double t = 0.45e-6, alpha = 1.0, nbar0 = 0.25;
  p.rabi = 2.0 * alpha / (p.eta * t);
  const FockSpace space(60);
  const JointMixture start = joint_thermal(nbar0, space, Spin::up);
  Dataset d;
  for (double phi : phase_grid(24)) {
    PulseSequence seq;
    seq.drive(t, 0.0).drive(t, phi);
    const JointMixture out = seq.apply(start, p);
    double mean = 0.0;
    for (const auto& c : out.components()) {
      const Eigen::VectorXcd& up = c.state.up();
      double n = 0.0;
      for (int k = 0; k < space.dim(); ++k) n += k * std::norm(up[k]);
      mean += c.weight * n / up.squaredNorm();
    }
    d.rows.push_back({phi, mean, 1.0});
  }
  const FitResult r = fit_two_pulse(d);
  EXPECT_NEAR(r.value("alpha"), alpha, 1e-4);
  EXPECT_NEAR(r.value("nbar0"), nbar0, 1e-4);
}

TEST(Phases, WrapAndUnwrap) {
  EXPECT_NEAR(wrap_phase(3.0 * pi), pi, 1e-15);
  EXPECT_NEAR(wrap_phase(-pi), pi, 1e-15);
  EXPECT_NEAR(wrap_phase(0.3 - 4.0 * pi), 0.3, 1e-14);
  const std::vector<double> u = unwrap_phases({3.0, -3.0, -1.0, 2.5});
  EXPECT_NEAR(u[1], -3.0 + 2.0 * pi, 1e-15);
  EXPECT_NEAR(u[2], -1.0 + 2.0 * pi, 1e-15);
  EXPECT_NEAR(u[3], 2.5, 1e-15);
}
