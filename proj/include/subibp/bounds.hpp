#pragma once

#include "subibp/estimators.hpp"

namespace subibp {

// beta(T) = d T lambda1(T) lambda2(T) K2(T) e^{3 T K1(T)}.
double beta_T(const ModelSpec& model, double T);

// Gamma_{T,p}(r) = E exp[ p^2 lambda2^2 e^{2 T K1} r^2 / (2 (p-1)^2 S(T)) ].
// Exact for deterministic subordinators, Monte Carlo otherwise.
MCEstimate gamma_Tp(const ModelSpec& model, const BernsteinSpec& spec, double T,
                    double p, double r, std::size_t n_samples,
                    std::uint64_t seed);

struct BoundCheckRow {
  std::string check;
  std::string model_name;
  std::string f_name;
  std::string x0_desc;
  double T = 0.0;
  double p = 0.0;
  double v_norm = 0.0;
  double delta = 0.0;
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  double margin = 0.0;  // (rhs + 3 rhs_se) - (lhs - 3 lhs_se)
  bool pass = true;
  bool unstable = false;
};

// Gradient bound: |P_T(grad_v f)| <= |v| ||f||_inf
//   (lambda2 e^{T K1} E S(T)^{-1/2} + beta(T)), checked with 3-standard-error
// slack for every f in the family and every start point.
std::vector<BoundCheckRow> check_gradient_bound(
    const ModelSpec& model, const BernsteinSpec& spec, double T,
    const VectorXd& v, const std::vector<TestFunction>& family,
    const std::vector<VectorXd>& x0s, const EnsembleOptions& opts);

// L^p gradient bound ratio. The constant C(p) is unquantified, so the check
// reports the empirical ratio
//   |P_T(grad f)| / [(P_T |f|^p)^{1/p} (lambda2 e^{T K1} (E
//   S^{-p/(2(p-1))})^{(p-1)/p} + beta)]
// across the T grid; no pass/fail.
std::vector<BoundCheckRow> check_lp_gradient_bound(
    const ModelSpec& model, const BernsteinSpec& spec,
    const std::vector<double>& Ts, double p,
    const std::vector<TestFunction>& family, const VectorXd& x0,
    const EnsembleOptions& opts);

// Entropy bound: |P_T(grad_v f)| <= delta Ent(f) + (P_T f)(beta |v| +
// delta log E exp[lambda2^2 |v|^2 e^{2 T K1} / (2 delta^2 S(T))]).
std::vector<BoundCheckRow> check_entropy_bound(
    const ModelSpec& model, const BernsteinSpec& spec, double T,
    const VectorXd& v, double delta, const TestFunction& f,
    const std::vector<VectorXd>& x0s, const EnsembleOptions& opts);

// Shift Harnack inequality: (P_T f)^p <= exp[p (log p) beta |v| / (p-1) +
// ((p-1)/p) log Gamma_{T,p}(|v|)] P_T(f^p(v + .)).
std::vector<BoundCheckRow> shift_harnack_check(
    const ModelSpec& model, const BernsteinSpec& spec, double T, double p,
    const std::vector<VectorXd>& vs, const TestFunction& f,
    const std::vector<VectorXd>& x0s, const EnsembleOptions& opts);

struct ScalingRow {
  double T = 0.0;
  double analytic_term = 0.0;   // bound bracket, exact power law when K1 = 0
  double empirical_ratio = 0.0; // |E grad f| / (E |f|^p)^{1/p}
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double analytic_slope = 0.0;
  double analytic_r2 = 0.0;
  double empirical_slope = 0.0;
  double empirical_r2 = 0.0;
  double alpha = 0.0;  // 2 rho
};

// Small-time scaling study for Stable(rho): log-log slopes of the analytic
// bound bracket and of the empirical gradient ratio against T; the reference
// rate is -1/alpha with alpha = 2 rho.
ScalingResult stable_scaling_study(const ModelSpec& model, double rho,
                                   const std::vector<double>& Ts, double p,
                                   const TestFunction& f, const VectorXd& x0,
                                   const EnsembleOptions& opts);

}  // namespace subibp
