#ifndef CISIM_PROPOSAL_HPP
#define CISIM_PROPOSAL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "cisim/errors.hpp"
#include "cisim/model.hpp"
#include "cisim/rng.hpp"

namespace cisim {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Proposal parameters theta = (b(x_k), sigma(x_k)) frozen at the most
// recent event. The inverse, Cholesky factor and log-determinant of
// gamma(x_k) are cached because the sampler, the density and the
// log-density derivatives all reuse them within one inter-event segment.
class ProposalParams {
 public:
  ProposalParams() = default;

  ProposalParams(Vec drift, Mat gamma)
      : drift_(std::move(drift)), gamma_(std::move(gamma)) {
    const Eigen::LLT<Mat> llt(gamma_);
    if (llt.info() != Eigen::Success)
      throw SingularCovariance("proposal covariance is not positive definite");
    chol_ = llt.matrixL();
    gamma_inv_ = llt.solve(Mat::Identity(gamma_.rows(), gamma_.cols()));
    log_det_gamma_ = 2.0 * chol_.diagonal().array().log().sum();
  }

  const Vec& drift() const { return drift_; }
  const Mat& gamma() const { return gamma_; }
  const Mat& gamma_inv() const { return gamma_inv_; }
  const Mat& chol() const { return chol_; }
  double log_det_gamma() const { return log_det_gamma_; }
  int dim() const { return static_cast<int>(drift_.size()); }

 private:
  Vec drift_;
  Mat gamma_;
  Mat gamma_inv_;
  Mat chol_;  // lower-triangular factor of gamma
  double log_det_gamma_ = 0.0;
};

// Gradient and Hessian-over-density ratio of the copycat Gaussian
// q(x, y, u) = N(y; x + u b, u gamma):
//   Lambda = grad_y log q = -gamma^{-1} (y - x - u b) / u
//   K      = (H_y q) / q = Lambda Lambda^T - gamma^{-1} / u
struct LogDensityDerivs {
  Vec lambda_vec;
  Mat k_mat;
};

inline LogDensityDerivs log_density_derivs(const ProposalParams& p,
                                           const Vec& x, const Vec& y,
                                           double u) {
  const Vec r = y - x - u * p.drift();
  LogDensityDerivs d;
  d.lambda_vec = -(p.gamma_inv() * r) / u;
  d.k_mat = d.lambda_vec * d.lambda_vec.transpose() - p.gamma_inv() / u;
  return d;
}

inline double log_copycat_density(const ProposalParams& p, const Vec& x,
                                  const Vec& y, double u) {
  const int d = p.dim();
  const Vec r = y - x - u * p.drift();
  const double quad = r.dot(p.gamma_inv() * r) / u;
  return -0.5 * (d * (kLog2Pi + std::log(u)) + p.log_det_gamma() + quad);
}

inline double copycat_density(const ProposalParams& p, const Vec& x,
                              const Vec& y, double u) {
  return std::exp(log_copycat_density(p, x, y, u));
}

// y = x + u b + sqrt(u) L z with L the Cholesky factor of gamma.
inline Vec copycat_sample(const ProposalParams& p, const Vec& x, double u,
                          const Vec& z) {
  return x + u * p.drift() + std::sqrt(u) * (p.chol() * z);
}

inline Vec copycat_sample(const ProposalParams& p, const Vec& x, double u,
                          RngStream& rng) {
  Vec z(p.dim());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return copycat_sample(p, x, u, z);
}

// Scaled (modified) Brownian bridge pinned at x_T at time T. For
// 0 <= s < t < T the value at t given x_s is Gaussian with
//   mean (x_s (T-t) + x_T (t-s)) / (T-s),
//   cov  a (T-t)(t-s) / (T-s).
struct BridgeProposal {
  Vec x_terminal;
  double horizon;
  Mat scale;

  void moments(double s, const Vec& x_s, double t, Vec& mean,
               double& cov_factor) const {
    if (!(t < horizon))
      throw DegenerateBridge("bridge variance collapses at t >= T");
    const double span = horizon - s;
    mean = (x_s * (horizon - t) + x_terminal * (t - s)) / span;
    cov_factor = (horizon - t) * (t - s) / span;
  }

  double log_density(double s, const Vec& x_s, double t,
                     const Vec& x_t) const {
    Vec mean;
    double c;
    moments(s, x_s, t, mean, c);
    const ProposalParams g(Vec::Zero(x_s.size()), scale);
    const int d = g.dim();
    const Vec r = x_t - mean;
    const double quad = r.dot(g.gamma_inv() * r) / c;
    return -0.5 * (d * (kLog2Pi + std::log(c)) + g.log_det_gamma() + quad);
  }

  double density(double s, const Vec& x_s, double t, const Vec& x_t) const {
    return std::exp(log_density(s, x_s, t, x_t));
  }

  Vec sample(double s, const Vec& x_s, double t, RngStream& rng) const {
    Vec mean;
    double c;
    moments(s, x_s, t, mean, c);
    const Eigen::LLT<Mat> llt(scale);
    Vec z(x_s.size());
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + std::sqrt(c) * (Mat(llt.matrixL()) * z);
  }
};

}  // namespace cisim

#endif  // CISIM_PROPOSAL_HPP
