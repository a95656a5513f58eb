#pragma once

#include "subibp/pathsolver.hpp"

namespace subibp {

struct DegeneratePathError : std::runtime_error {
  DegeneratePathError() : std::runtime_error("S(T) = 0: weight undefined") {}
};

// The integration-by-parts weight split into its stochastic-integral part
// and the trace-correction part; total = term1 + term2 and the breakdown is
// linear in the direction v.
struct WeightBreakdown {
  double term1 = 0.0;
  double term2 = 0.0;
  double total = 0.0;
  VectorXd direction;
};

// Production evaluation, O(n d^3):
//   term1 = (1/S_T) sum_k < sigma_{t_{k+1}}^{-1} Jt_{k+1} J_T^{-1} v, dW_k >,
//   term2 = (1/S_T) sum_k dS_k Phi_{k+1},
//     Phi_i = sum_{j >= i} Tr{ Jinv_j (grad_{u_j} B_{t_j})(X_j) Jt_j } dt,
//     u_j = J_j J_T^{-1} v.
// The stochastic sum is pathwise and anticipative: J_T^{-1} sees the whole
// path. The trace term uses the cyclic reduction that cancels every
// t-dependent factor; compute_weight_literal keeps the uncancelled form as
// the cross-check.
WeightBreakdown compute_weight(const ModelSpec& model,
                               const TrajectoryBundle& bundle,
                               const VectorXd& v);

// Direct O(n^2 d^3) evaluation of the double integral with
// J_{t,r}^{-1} = J_t J_r^{-1} and Jt_{t,r} = Jt_r Jt_t^{-1}. Reference
// implementation for validating the trace simplification.
WeightBreakdown compute_weight_literal(const ModelSpec& model,
                                       const TrajectoryBundle& bundle,
                                       const VectorXd& v);

// Closed-form bound on E |M_T^v|:
//   |v| ( lambda2 e^{T K1} E S(T)^{-1/2} + d T lambda1 lambda2 K2 e^{3T K1} ).
// Requires a spec with an analytic negative half-moment.
double weight_moment_bound(const ModelSpec& model, double T, const VectorXd& v,
                           const BernsteinSpec& spec);

}  // namespace subibp
