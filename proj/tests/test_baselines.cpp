#include <doctest.h>

#include <cmath>
#include <vector>

#include "cisim/baselines.hpp"
#include "cisim/model.hpp"
#include "cisim/rng.hpp"

using namespace cisim;

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  double sum = 0.0, sumsq = 0.0;
  for (double x : v) {
    sum += x;
    sumsq += x * x;
  }
  const double n = static_cast<double>(v.size());
  MeanSe r;
  r.mean = sum / n;
  r.se = std::sqrt(std::max(0.0, (sumsq / n - r.mean * r.mean)) / n);
  return r;
}

double ou_true_mean(double rho, double mu, double x0, double T) {
  return mu + (x0 - mu) * std::exp(-rho * T);
}

}  // namespace

TEST_CASE("Euler is exact for constant coefficients at any step count") {
  Vec b0(2);
  b0 << 0.3, -0.2;
  Mat s0(2, 2);
  s0 << 0.9, 0.0, 0.1, 0.5;
  const DiffusionModel m = constant_coeff(b0, s0);
  const Vec x0 = Vec::Zero(2);
  const double T = 1.5;
  // one step with the same normals reproduces the m-step endpoint in law;
  // check first and second moments against the exact Gaussian
  const Mat cov = T * (s0 * s0.transpose());
  Mat emp_cov = Mat::Zero(2, 2);
  const int n = 100000;
  Vec mean_acc = Vec::Zero(2);
  std::vector<Vec> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) {
    RngStream rng(71, i);
    xs.push_back(euler_simulate(m, x0, T, 7, rng));
    mean_acc += xs.back();
  }
  const Vec mean = mean_acc / n;
  for (const Vec& x : xs) emp_cov += (x - mean) * (x - mean).transpose();
  emp_cov /= n - 1;
  for (int k = 0; k < 2; ++k) {
    const double se = std::sqrt(cov(k, k) / n);
    CHECK(std::abs(mean[k] - T * b0[k]) < 4.0 * se);
  }
  CHECK((emp_cov - cov).norm() < 0.02 * cov.norm() + 4.0 * cov.norm() /
                                                         std::sqrt(n));
}

TEST_CASE("Euler bias on OU shrinks with the step count") {
  const double rho = 0.5, mu = 1.0, sigma = 0.4, T = 1.0, x0v = 2.0;
  const DiffusionModel m = ou1d(rho, mu, sigma);
  const Vec x0 = Vec::Constant(1, x0v);
  // Euler on OU has an exact discrete mean: mu + (x0-mu)(1-rho h)^m
  for (int m_steps : {1, 2, 8, 64}) {
    const double h = T / m_steps;
    const double disc = mu + (x0v - mu) * std::pow(1.0 - rho * h, m_steps);
    std::vector<double> ends;
    for (int i = 0; i < 20000; ++i) {
      RngStream rng(72, i);
      ends.push_back(euler_simulate(m, x0, T, m_steps, rng)[0]);
    }
    const MeanSe r = mean_se(ends);
    CHECK(std::abs(r.mean - disc) < 4.0 * r.se);
  }
  // the m = 64 discretised mean is close to the exact one, m = 1 is not
  const double exact = ou_true_mean(rho, mu, x0v, T);
  CHECK(std::abs(mu + (x0v - mu) * std::pow(1.0 - rho / 64, 64) - exact) <
        std::abs(mu + (x0v - mu) * (1.0 - rho) - exact));
}

TEST_CASE("Euler respects the domain guard") {
  const DiffusionModel m =
      cir2d({0.1, 2.0, 0.4, 0.2, 3.0, 0.3, 0.5});
  Vec bad(2);
  bad << -1.0, 2.0;
  RngStream rng(73, 0);
  CHECK_THROWS_AS(euler_simulate(m, bad, 1.0, 4, rng), DomainError);
}

TEST_CASE("DG with one step is the one-step Euler density") {
  const DiffusionModel m = ou1d(0.5, 1.0, 0.4);
  const Vec x0 = Vec::Constant(1, 2.0);
  const Vec y = Vec::Constant(1, 1.6);
  const double T = 0.5;
  RngStream rng(74, 0);
  const std::uint64_t before = rng.draws();
  const double est = dg_density_replicate(m, x0, y, T, 1, rng);
  CHECK(rng.draws() == before);  // no imputation, fully deterministic
  const CoefficientBundle c = eval_model(m, x0);
  const ProposalParams q(c.b, c.gamma);
  CHECK(est == doctest::Approx(copycat_density(q, x0, y, T)).epsilon(1e-14));
}

TEST_CASE("DG is exact for constant coefficients, any step count") {
  Vec b0(1);
  b0 << 0.25;
  Mat s0(1, 1);
  s0 << 0.7;
  const DiffusionModel m = constant_coeff(b0, s0);
  const Vec x0 = Vec::Constant(1, 0.0);
  const Vec y = Vec::Constant(1, 0.6);
  const double T = 1.0;
  const double truth = constant_coeff_transition_density(b0, s0)(x0, y, T);
  // chained Gaussian ratios telescope: every replicate equals the truth
  for (int m_steps : {2, 5, 16}) {
    for (int i = 0; i < 50; ++i) {
      RngStream rng(75, i);
      CHECK(dg_density_replicate(m, x0, y, T, m_steps, rng) ==
            doctest::Approx(truth).epsilon(1e-10));
    }
  }
}

TEST_CASE("DG estimates approach the OU density as the grid refines") {
  const double rho = 0.5, mu = 1.0, sigma = 0.4, T = 1.0;
  const DiffusionModel m = ou1d(rho, mu, sigma);
  const Vec x0 = Vec::Constant(1, 2.0);
  const Vec y = Vec::Constant(1, 1.4);
  const double truth = ou1d_transition_density(rho, mu, sigma)(x0, y, T);
  double prev_err = 1e30;
  for (int m_steps : {1, 4, 16, 64}) {
    std::vector<double> est;
    for (int i = 0; i < 20000; ++i) {
      RngStream rng(76, i);
      est.push_back(dg_density_replicate(m, x0, y, T, m_steps, rng));
    }
    const MeanSe r = mean_se(est);
    const double err = std::abs(r.mean - truth);
    CHECK(err < prev_err + 4.0 * r.se);
    prev_err = err;
    if (m_steps == 64) CHECK(err < 0.01 * truth + 4.0 * r.se);
  }
}

TEST_CASE("fixed-anchor DG stays a valid estimator") {
  const double rho = 0.5, mu = 1.0, sigma = 0.4, T = 1.0;
  const DiffusionModel m = ou1d(rho, mu, sigma);
  const Vec x0 = Vec::Constant(1, 2.0);
  const Vec y = Vec::Constant(1, 1.4);
  const double truth = ou1d_transition_density(rho, mu, sigma)(x0, y, T);
  std::vector<double> est;
  for (int i = 0; i < 20000; ++i) {
    RngStream rng(77, i);
    est.push_back(dg_density_replicate(m, x0, y, T, 32, rng,
                                       /*fixed_anchor_scale=*/true));
  }
  const MeanSe r = mean_se(est);
  CHECK(std::abs(r.mean - truth) < 0.01 * truth + 4.0 * r.se);
}

TEST_CASE("SIS with exact weights reproduces OU functionals") {
  const double rho = 0.5, mu = 1.0, sigma = 0.4, T = 1.0, x0v = 2.0;
  const DiffusionModel m = ou1d(rho, mu, sigma);
  const TransitionDensity p = ou1d_transition_density(rho, mu, sigma);
  const Vec x0 = Vec::Constant(1, x0v);
  for (int m_steps : {1, 5}) {
    std::vector<double> wx, w;
    for (int i = 0; i < 40000; ++i) {
      RngStream rng(78, i);
      const auto [x, wt] = sis_known_density(p, m, x0, T, m_steps, rng);
      wx.push_back(wt * x[0]);
      w.push_back(wt);
    }
    const MeanSe rw = mean_se(w);
    CHECK(std::abs(rw.mean - 1.0) < 4.0 * rw.se);  // weights are mean one
    const MeanSe rx = mean_se(wx);
    CHECK(std::abs(rx.mean - ou_true_mean(rho, mu, x0v, T)) < 4.0 * rx.se);
  }
}

TEST_CASE("SIS with the exact one-step density has unit weights") {
  const double rho = 0.5, mu = 1.0, sigma = 0.4;
  const DiffusionModel m = ou1d(rho, mu, sigma);
  // feed the copycat density itself as the "target": weights telescope to 1
  const TransitionDensity q_as_target = [&m](const Vec& x, const Vec& y,
                                             double t) {
    const CoefficientBundle c = eval_model(m, x);
    return copycat_density(ProposalParams(c.b, c.gamma), x, y, t);
  };
  RngStream rng(79, 0);
  const auto [x, w] =
      sis_known_density(q_as_target, m, Vec::Constant(1, 2.0), 1.0, 8, rng);
  CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
}
