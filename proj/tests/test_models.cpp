#include <doctest.h>

#include <cmath>

#include "cisim/baselines.hpp"
#include "cisim/model.hpp"
#include "cisim/rng.hpp"

using namespace cisim;

namespace {
const Cir2dParams kCir{0.6, 2.5, 0.45, 0.3, 3.0, 0.35, 0.5};
}

TEST_CASE("constant-coefficient model evaluates trivially") {
  Vec b0 = Vec::Zero(2);
  const DiffusionModel m = constant_coeff(b0, Mat::Identity(2, 2));
  Vec x(2);
  x << 3.0, -1.0;
  const CoefficientBundle c = eval_model(m, x);
  CHECK(c.b.isZero());
  CHECK(c.gamma.isApprox(Mat::Identity(2, 2)));
  CHECK(c.b1.isZero());
  CHECK(c.g1.isZero());
  CHECK(c.g2.isZero());
  CHECK(check_derivatives(m, x, 1e-5) == 0.0);
}

TEST_CASE("SV gamma at x1=0 is the identity for sigma=(1,1/2)") {
  const DiffusionModel m = sv_model(1.0, 0.5);
  Vec x(2);
  x << 0.0, 7.3;
  const Mat g = m.gamma(x);
  CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g(0, 1) == 0.0);
}

TEST_CASE("CIR2D gamma matches hand arithmetic at (2.5, 3)") {
  const DiffusionModel m = cir2d(kCir);
  Vec x(2);
  x << 2.5, 3.0;
  const Mat g = m.gamma(x);
  CHECK(g(0, 0) == doctest::Approx(0.50625).epsilon(1e-14));
  CHECK(g(1, 1) == doctest::Approx(0.3675).epsilon(1e-14));
  CHECK(g(0, 1) ==
        doctest::Approx(0.5 * 0.45 * 0.35 * std::sqrt(7.5)).epsilon(1e-14));
}

TEST_CASE("CIR2D domain guard rejects nonpositive coordinates") {
  const DiffusionModel m = cir2d(kCir);
  Vec x(2);
  x << -0.1, 1.0;
  CHECK_THROWS_AS(eval_model(m, x), DomainError);
  x << 1.0, 0.0;
  CHECK_THROWS_AS(eval_model(m, x), DomainError);
}

TEST_CASE("derivative bundles match finite differences on random points") {
  RngStream rng(7, 0);
  struct Case {
    DiffusionModel model;
    bool positive_domain;
  };
  const Case cases[] = {{ou1d(0.5, 1.0, 0.4), false},
                        {sv_model(1.0, 0.5), false},
                        {cir2d(kCir), true},
                        {log_cir2d(kCir), false}};
  for (const Case& c : cases) {
    for (int i = 0; i < 100; ++i) {
      Vec x(c.model.dim);
      for (int k = 0; k < c.model.dim; ++k)
        x[k] = c.positive_domain ? 1.0 + 3.0 * rng.uniform()
                                 : 1.5 * rng.normal();
      CHECK(check_derivatives(c.model, x, 1e-5) < 1e-6);
      // gamma must stay positive definite on the domain
      const Eigen::SelfAdjointEigenSolver<Mat> es(c.model.gamma(x));
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("OU drift derivative is exact") {
  const DiffusionModel m = ou1d(0.7, -1.0, 0.3);
  const Vec x = Vec::Constant(1, 0.4);
  CHECK(m.drift_diag_deriv(x)[0] == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(check_derivatives(m, x, 1e-5) < 1e-9);
}

TEST_CASE("finite-difference fallback reproduces analytic bundles") {
  DiffusionModel m = sv_model(1.0, 0.5);
  DiffusionModel fd = m;
  attach_fd_derivatives(fd, 1e-5);
  Vec x(2);
  x << 1.0, 0.0;
  CHECK((fd.drift_diag_deriv(x) - m.drift_diag_deriv(x)).cwiseAbs().maxCoeff() <
        1e-6);
  CHECK((fd.gamma_first_deriv(x) - m.gamma_first_deriv(x))
            .cwiseAbs()
            .maxCoeff() < 1e-6);
  CHECK((fd.gamma_second_deriv(x) - m.gamma_second_deriv(x))
            .cwiseAbs()
            .maxCoeff() < 1e-5);
}

// Ito identity for the log transform: fine-step Euler of CIR, pushed through
// log, must match fine-step Euler of the transformed model in first and
// second moments at desk scale.
TEST_CASE("log-CIR coefficients are the Ito transform of CIR") {
  const DiffusionModel raw = cir2d(kCir);
  const DiffusionModel logm = log_cir2d(kCir);
  Vec x0(2);
  x0 << 2.5, 3.0;
  const Vec y0 = x0.array().log().matrix();
  const double T = 0.5;
  const int steps = 256, n = 20000;
  Vec mean_a = Vec::Zero(2), mean_b = Vec::Zero(2);
  Vec sq_a = Vec::Zero(2), sq_b = Vec::Zero(2);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    RngStream r1(101, i), r2(202, i);
    try {
      const Vec xa = euler_simulate(raw, x0, T, steps, r1);
      const Vec ya = xa.array().log().matrix();
      const Vec yb = euler_simulate(logm, y0, T, steps, r2);
      mean_a += ya;
      mean_b += yb;
      sq_a += ya.cwiseProduct(ya);
      sq_b += yb.cwiseProduct(yb);
      ++kept;
    } catch (const DomainError&) {
    }
  }
  mean_a /= kept;
  mean_b /= kept;
  sq_a /= kept;
  sq_b /= kept;
  for (int k = 0; k < 2; ++k) {
    const double se =
        std::sqrt((sq_a[k] - mean_a[k] * mean_a[k]) / kept) * 2.0;
    CHECK(std::abs(mean_a[k] - mean_b[k]) < 4.0 * se + 2e-3);
    CHECK(std::abs(sq_a[k] - sq_b[k]) < 0.05);
  }
}
