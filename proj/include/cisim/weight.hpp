#ifndef CISIM_WEIGHT_HPP
#define CISIM_WEIGHT_HPP

#include <cmath>

#include "cisim/errors.hpp"
#include "cisim/model.hpp"
#include "cisim/proposal.hpp"
#include "cisim/renewal.hpp"

namespace cisim {

// (K - K_theta) q / q for the Gaussian proposal with parameters
// theta = (beta, Gamma) anchored at x, evaluated at the new value y after
// elapsed time u. K is the forward operator of the target diffusion and
// K_theta that of the constant-coefficient proposal process:
//   K q / q      = (1/2)[gamma(y) : Kmat + g2(y) : 1]
//                  + [g1(y) 1 - b(y)] . Lambda - b1(y) . 1
//   K_theta q / q = (1/2) Gamma : Kmat - beta . Lambda
// The incremental weight is 1 plus this ratio divided by lambda(u).
inline double operator_difference_ratio(const DiffusionModel& model,
                                        const ProposalParams& params,
                                        const Vec& x, const Vec& y,
                                        double u) {
  const CoefficientBundle c = eval_model(model, y);
  const LogDensityDerivs d = log_density_derivs(params, x, y, u);
  const double trace_term =
      0.5 * (((c.gamma - params.gamma()).array() * d.k_mat.array()).sum() +
             c.g2.sum());
  const Vec drift_term = c.g1.rowwise().sum() - c.b + params.drift();
  return trace_term + drift_term.dot(d.lambda_vec) - c.b1.sum();
}

// (L - L_theta) ptilde(x, y, u) / ptilde, where L is the Kolmogorov
// backward operator of the target acting on the *first* argument x and
// L_theta its constant-coefficient counterpart. Since ptilde depends on x
// only through y - x - u beta, the x-derivatives are sign-flipped (first
// order) or equal (second order) to the y-derivatives:
//   (L - L_theta) ptilde / ptilde
//     = -[b(x) - beta] . Lambda + (1/2)[gamma(x) - Gamma] : Kmat.
// This is the expansion kernel of the integral-equation (Wagner) density
// representation; no coefficient derivatives appear.
inline double backward_difference_ratio(const DiffusionModel& model,
                                        const ProposalParams& params,
                                        const Vec& x, const Vec& y,
                                        double u) {
  const CoefficientBundle c = eval_model(model, x);
  const LogDensityDerivs d = log_density_derivs(params, x, y, u);
  return -(c.b - params.drift()).dot(d.lambda_vec) +
         0.5 * ((c.gamma - params.gamma()).array() * d.k_mat.array()).sum();
}

inline double incremental_weight(const DiffusionModel& model,
                                 const ProposalParams& params, const Vec& x,
                                 const Vec& y, double u,
                                 const RenewalRate& rate) {
  return 1.0 + operator_difference_ratio(model, params, x, y, u) / rate(u);
}

// Univariate closed form; gamma'(y) = g1(y) and gamma''(y) = g2(y) when
// d = 1. Kept as an independent route for cross-checking the matrix form.
inline double incremental_weight_1d(const DiffusionModel& model,
                                    const ProposalParams& params,
                                    const Vec& x, const Vec& y, double u,
                                    const RenewalRate& rate) {
  if (model.dim != 1)
    throw DimensionError("incremental_weight_1d requires a univariate model");
  const CoefficientBundle c = eval_model(model, y);
  const double gx = params.gamma()(0, 0);
  const double bx = params.drift()[0];
  const double r = y[0] - x[0] - u * bx;
  const double inner =
      0.5 * (c.gamma(0, 0) - gx) * (r * r / (gx * u) - 1.0) +
      (c.b[0] - bx - c.g1(0, 0)) * r;
  return 1.0 +
         (inner / (gx * u) + 0.5 * c.g2(0, 0) - c.b1[0]) / rate(u);
}

}  // namespace cisim

#endif  // CISIM_WEIGHT_HPP
