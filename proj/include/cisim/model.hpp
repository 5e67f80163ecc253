#ifndef CISIM_MODEL_HPP
#define CISIM_MODEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "cisim/errors.hpp"

namespace cisim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Diffusion dX = b(X)dt + sigma(X)dB together with the derivative bundles
// consumed by the incremental-weight formula:
//   [b1(x)]_i    = d b_i / d x_i
//   [g1(x)]_ij   = d gamma_ij / d x_j
//   [g2(x)]_ij   = d^2 gamma_ij / d x_i d x_j
// where gamma = sigma sigma^T.
struct DiffusionModel {
  int dim = 0;
  std::function<Vec(const Vec&)> drift;
  std::function<Mat(const Vec&)> diffusion;
  std::function<Mat(const Vec&)> gamma;
  std::function<Vec(const Vec&)> drift_diag_deriv;
  std::function<Mat(const Vec&)> gamma_first_deriv;
  std::function<Mat(const Vec&)> gamma_second_deriv;
  // Returns false where the coefficient functions are undefined; default
  // domain is all of R^d.
  std::function<bool(const Vec&)> in_domain = [](const Vec&) { return true; };

  void require_in_domain(const Vec& x) const {
    if (!in_domain(x)) throw DomainError("state outside model domain");
  }
};

struct CoefficientBundle {
  Vec b;
  Mat sigma;
  Mat gamma;
  Vec b1;
  Mat g1;
  Mat g2;
};

inline CoefficientBundle eval_model(const DiffusionModel& m, const Vec& x) {
  m.require_in_domain(x);
  return CoefficientBundle{m.drift(x),          m.diffusion(x),
                           m.gamma(x),          m.drift_diag_deriv(x),
                           m.gamma_first_deriv(x), m.gamma_second_deriv(x)};
}

// Worst relative discrepancy (relative to max(1,|value|)) between the
// analytic derivative bundles and central finite differences of b / gamma.
inline double check_derivatives(const DiffusionModel& m, const Vec& x,
                                double h = 1e-5) {
  const int d = m.dim;
  double worst = 0.0;
  auto rel = [](double approx, double exact) {
    return std::abs(approx - exact) / std::max(1.0, std::abs(exact));
  };

  const Vec b1 = m.drift_diag_deriv(x);
  const Mat g1 = m.gamma_first_deriv(x);
  const Mat g2 = m.gamma_second_deriv(x);

  for (int j = 0; j < d; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    m.require_in_domain(xp);
    m.require_in_domain(xm);
    const Vec bp = m.drift(xp), bm = m.drift(xm);
    worst = std::max(worst, rel((bp[j] - bm[j]) / (2.0 * h), b1[j]));
    const Mat gp = m.gamma(xp), gm = m.gamma(xm);
    for (int i = 0; i < d; ++i)
      worst = std::max(worst, rel((gp(i, j) - gm(i, j)) / (2.0 * h), g1(i, j)));
  }

  // d^2 gamma_ij / dx_i dx_j: diagonal (i==j) via the 3-point stencil,
  // off-diagonal via the 4-point cross stencil. Second differences need a
  // wider step than first differences: the roundoff term scales like
  // eps / h^2, so h below ~1e-4 loses accuracy instead of gaining it.
  const double h2 = std::max(h, 1e-4);
  const Mat g0 = m.gamma(x);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double fd;
      if (i == j) {
        Vec xp = x, xm = x;
        xp[i] += h2;
        xm[i] -= h2;
        fd = (m.gamma(xp)(i, j) - 2.0 * g0(i, j) + m.gamma(xm)(i, j)) /
             (h2 * h2);
      } else {
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h2;
        xpp[j] += h2;
        xpm[i] += h2;
        xpm[j] -= h2;
        xmp[i] -= h2;
        xmp[j] += h2;
        xmm[i] -= h2;
        xmm[j] -= h2;
        fd = (m.gamma(xpp)(i, j) - m.gamma(xpm)(i, j) - m.gamma(xmp)(i, j) +
              m.gamma(xmm)(i, j)) /
             (4.0 * h2 * h2);
      }
      worst = std::max(worst, rel(fd, g2(i, j)));
    }
  }
  return worst;
}

// Fills in the derivative bundles of a model by central finite differences,
// for user models that only provide drift and diffusion. Accuracy is O(h^2).
inline void attach_fd_derivatives(DiffusionModel& m, double h = 1e-5) {
  auto drift = m.drift;
  auto gamma = m.gamma;
  const int d = m.dim;
  m.drift_diag_deriv = [drift, h, d](const Vec& x) {
    Vec out(d);
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      out[i] = (drift(xp)[i] - drift(xm)[i]) / (2.0 * h);
    }
    return out;
  };
  m.gamma_first_deriv = [gamma, h, d](const Vec& x) {
    Mat out(d, d);
    for (int j = 0; j < d; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      out.col(j) = (gamma(xp).col(j) - gamma(xm).col(j)) / (2.0 * h);
    }
    return out;
  };
  // wider step for second differences: roundoff scales like eps / h^2
  const double h2 = std::max(h, 1e-4);
  m.gamma_second_deriv = [gamma, h = h2, d](const Vec& x) {
    Mat out(d, d);
    const Mat g0 = gamma(x);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (i == j) {
          Vec xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          out(i, j) =
              (gamma(xp)(i, j) - 2.0 * g0(i, j) + gamma(xm)(i, j)) / (h * h);
        } else {
          Vec xpp = x, xpm = x, xmp = x, xmm = x;
          xpp[i] += h;
          xpp[j] += h;
          xpm[i] += h;
          xpm[j] -= h;
          xmp[i] -= h;
          xmp[j] += h;
          xmm[i] -= h;
          xmm[j] -= h;
          out(i, j) = (gamma(xpp)(i, j) - gamma(xpm)(i, j) -
                       gamma(xmp)(i, j) + gamma(xmm)(i, j)) /
                      (4.0 * h * h);
        }
      }
    }
    return out;
  };
}

// ---------------------------------------------------------------------
// Built-in models
// ---------------------------------------------------------------------

inline DiffusionModel constant_coeff(const Vec& b0, const Mat& sigma0) {
  DiffusionModel m;
  const int d = static_cast<int>(b0.size());
  m.dim = d;
  const Mat g0 = sigma0 * sigma0.transpose();
  m.drift = [b0](const Vec&) { return b0; };
  m.diffusion = [sigma0](const Vec&) { return sigma0; };
  m.gamma = [g0](const Vec&) { return g0; };
  m.drift_diag_deriv = [d](const Vec&) { return Vec::Zero(d).eval(); };
  m.gamma_first_deriv = [d](const Vec&) { return Mat::Zero(d, d).eval(); };
  m.gamma_second_deriv = [d](const Vec&) { return Mat::Zero(d, d).eval(); };
  return m;
}

// dX = -rho (X - mu) dt + sigma dB.
inline DiffusionModel ou1d(double rho, double mu, double sigma) {
  DiffusionModel m;
  m.dim = 1;
  m.drift = [rho, mu](const Vec& x) {
    return Vec::Constant(1, -rho * (x[0] - mu)).eval();
  };
  m.diffusion = [sigma](const Vec&) {
    return Mat::Constant(1, 1, sigma).eval();
  };
  m.gamma = [sigma](const Vec&) {
    return Mat::Constant(1, 1, sigma * sigma).eval();
  };
  m.drift_diag_deriv = [rho](const Vec&) {
    return Vec::Constant(1, -rho).eval();
  };
  m.gamma_first_deriv = [](const Vec&) { return Mat::Zero(1, 1).eval(); };
  m.gamma_second_deriv = [](const Vec&) { return Mat::Zero(1, 1).eval(); };
  return m;
}

// Bivariate stochastic volatility model:
//   dX1 = -(s1^2/2) tanh(X1) dt + s1 dB1
//   dX2 = s2 (2 + tanh(X1)) dB2
inline DiffusionModel sv_model(double s1, double s2) {
  DiffusionModel m;
  m.dim = 2;
  m.drift = [s1](const Vec& x) {
    Vec b(2);
    b << -0.5 * s1 * s1 * std::tanh(x[0]), 0.0;
    return b;
  };
  m.diffusion = [s1, s2](const Vec& x) {
    Mat s = Mat::Zero(2, 2);
    s(0, 0) = s1;
    s(1, 1) = s2 * (2.0 + std::tanh(x[0]));
    return s;
  };
  m.gamma = [s1, s2](const Vec& x) {
    Mat g = Mat::Zero(2, 2);
    const double v = 2.0 + std::tanh(x[0]);
    g(0, 0) = s1 * s1;
    g(1, 1) = s2 * s2 * v * v;
    return g;
  };
  m.drift_diag_deriv = [s1](const Vec& x) {
    const double c = std::cosh(x[0]);
    Vec b1(2);
    b1 << -0.5 * s1 * s1 / (c * c), 0.0;
    return b1;
  };
  // gamma_11 is constant and gamma_22 depends on x1 only, so both
  // directional bundles vanish identically.
  m.gamma_first_deriv = [](const Vec&) { return Mat::Zero(2, 2).eval(); };
  m.gamma_second_deriv = [](const Vec&) { return Mat::Zero(2, 2).eval(); };
  return m;
}

struct Cir2dParams {
  double rho1, mu1, sigma1;
  double rho2, mu2, sigma2;
  double rho;  // instantaneous correlation
};

// Bivariate CIR:
//   dX1 = -rho1 (X1 - mu1) dt + sigma1 sqrt(X1) dW
//   dX2 = -rho2 (X2 - mu2) dt + sigma2 sqrt(X2) (rho dW + sqrt(1-rho^2) dB)
// Coefficients are only defined for strictly positive coordinates.
inline DiffusionModel cir2d(const Cir2dParams& p) {
  DiffusionModel m;
  m.dim = 2;
  m.in_domain = [](const Vec& x) { return x[0] > 0.0 && x[1] > 0.0; };
  m.drift = [p](const Vec& x) {
    Vec b(2);
    b << -p.rho1 * (x[0] - p.mu1), -p.rho2 * (x[1] - p.mu2);
    return b;
  };
  m.diffusion = [p](const Vec& x) {
    Mat s = Mat::Zero(2, 2);
    s(0, 0) = p.sigma1 * std::sqrt(x[0]);
    s(1, 0) = p.rho * p.sigma2 * std::sqrt(x[1]);
    s(1, 1) = std::sqrt(1.0 - p.rho * p.rho) * p.sigma2 * std::sqrt(x[1]);
    return s;
  };
  m.gamma = [p](const Vec& x) {
    Mat g(2, 2);
    g(0, 0) = p.sigma1 * p.sigma1 * x[0];
    g(1, 1) = p.sigma2 * p.sigma2 * x[1];
    g(0, 1) = g(1, 0) = p.rho * p.sigma1 * p.sigma2 * std::sqrt(x[0] * x[1]);
    return g;
  };
  m.drift_diag_deriv = [p](const Vec&) {
    Vec b1(2);
    b1 << -p.rho1, -p.rho2;
    return b1;
  };
  m.gamma_first_deriv = [p](const Vec& x) {
    const double c = p.rho * p.sigma1 * p.sigma2;
    Mat g1(2, 2);
    g1(0, 0) = p.sigma1 * p.sigma1;
    g1(1, 1) = p.sigma2 * p.sigma2;
    g1(0, 1) = 0.5 * c * std::sqrt(x[0] / x[1]);
    g1(1, 0) = 0.5 * c * std::sqrt(x[1] / x[0]);
    return g1;
  };
  m.gamma_second_deriv = [p](const Vec& x) {
    const double c = p.rho * p.sigma1 * p.sigma2;
    Mat g2 = Mat::Zero(2, 2);
    g2(0, 1) = g2(1, 0) = 0.25 * c / std::sqrt(x[0] * x[1]);
    return g2;
  };
  return m;
}

// Coordinatewise log transform Y = log X of the bivariate CIR, with
// coefficients obtained by Ito's formula:
//   b~_i(y)   = b_i(e^y) e^{-y_i} - gamma_ii(e^y) e^{-2 y_i} / 2
//             = -rho_i (1 - mu_i e^{-y_i}) - sigma_i^2 e^{-y_i} / 2
//   gamma~_ij = gamma_ij(e^y) e^{-y_i} e^{-y_j}
// so gamma~_11 = sigma1^2 e^{-y1}, gamma~_22 = sigma2^2 e^{-y2} and
// gamma~_12 = rho sigma1 sigma2 e^{-(y1+y2)/2}. Defined on all of R^2.
inline DiffusionModel log_cir2d(const Cir2dParams& p) {
  DiffusionModel m;
  m.dim = 2;
  m.drift = [p](const Vec& y) {
    Vec b(2);
    b << -p.rho1 * (1.0 - p.mu1 * std::exp(-y[0])) -
             0.5 * p.sigma1 * p.sigma1 * std::exp(-y[0]),
        -p.rho2 * (1.0 - p.mu2 * std::exp(-y[1])) -
            0.5 * p.sigma2 * p.sigma2 * std::exp(-y[1]);
    return b;
  };
  m.diffusion = [p](const Vec& y) {
    Mat s = Mat::Zero(2, 2);
    s(0, 0) = p.sigma1 * std::exp(-0.5 * y[0]);
    s(1, 0) = p.rho * p.sigma2 * std::exp(-0.5 * y[1]);
    s(1, 1) =
        std::sqrt(1.0 - p.rho * p.rho) * p.sigma2 * std::exp(-0.5 * y[1]);
    return s;
  };
  m.gamma = [p](const Vec& y) {
    Mat g(2, 2);
    g(0, 0) = p.sigma1 * p.sigma1 * std::exp(-y[0]);
    g(1, 1) = p.sigma2 * p.sigma2 * std::exp(-y[1]);
    g(0, 1) = g(1, 0) =
        p.rho * p.sigma1 * p.sigma2 * std::exp(-0.5 * (y[0] + y[1]));
    return g;
  };
  m.drift_diag_deriv = [p](const Vec& y) {
    // d/dy_i of [-rho_i + rho_i mu_i e^{-y_i} - sigma_i^2 e^{-y_i}/2]
    Vec b1(2);
    b1 << (-p.rho1 * p.mu1 + 0.5 * p.sigma1 * p.sigma1) * std::exp(-y[0]),
        (-p.rho2 * p.mu2 + 0.5 * p.sigma2 * p.sigma2) * std::exp(-y[1]);
    return b1;
  };
  m.gamma_first_deriv = [p](const Vec& y) {
    const double g12 =
        p.rho * p.sigma1 * p.sigma2 * std::exp(-0.5 * (y[0] + y[1]));
    Mat g1(2, 2);
    g1(0, 0) = -p.sigma1 * p.sigma1 * std::exp(-y[0]);
    g1(1, 1) = -p.sigma2 * p.sigma2 * std::exp(-y[1]);
    g1(0, 1) = -0.5 * g12;
    g1(1, 0) = -0.5 * g12;
    return g1;
  };
  m.gamma_second_deriv = [p](const Vec& y) {
    const double g12 =
        p.rho * p.sigma1 * p.sigma2 * std::exp(-0.5 * (y[0] + y[1]));
    Mat g2(2, 2);
    g2(0, 0) = p.sigma1 * p.sigma1 * std::exp(-y[0]);
    g2(1, 1) = p.sigma2 * p.sigma2 * std::exp(-y[1]);
    g2(0, 1) = g2(1, 0) = 0.25 * g12;
    return g2;
  };
  return m;
}

}  // namespace cisim

#endif  // CISIM_MODEL_HPP
