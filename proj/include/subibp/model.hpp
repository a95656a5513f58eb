#pragma once

#include <functional>
#include <map>
#include <string>

#include "subibp/linalg.hpp"
#include "subibp/rng.hpp"

namespace subibp {

// Problem definition for the state equation: constant d x d generator A of a
// contraction semigroup, drift b_t(x) with derivatives, invertible diffusion
// sigma_t, optional deterministic perturbation V_t, and the hypothesis
// constants used by all closed-form bounds (time-flattened to their values
// at the horizon, since they enter the formulas only through T).
struct ModelSpec {
  int d = 1;
  MatrixXd A;
  bool a_is_zero = true;

  std::function<void(double t, const VectorXd& x, VectorXd& out)> drift;
  std::function<void(double t, const VectorXd& x, MatrixXd& out)> drift_jacobian;
  // Directional derivative (grad_u grad b_t)(x); empty -> finite differences.
  std::function<void(double t, const VectorXd& x, const VectorXd& u,
                     MatrixXd& out)>
      drift_second;
  std::function<MatrixXd(double t)> sigma;
  std::function<MatrixXd(double t)> sigma_inverse;
  // Deterministic V_t with V_0 = 0; empty -> 0.
  std::function<VectorXd(double t)> v_path;

  double K1 = 0.0;       // sup ||B_t||,        B_t = e^{-At} (grad b_t) e^{At}
  double K2 = 0.0;       // sup ||grad B_t|| per unit direction
  double lambda1 = 1.0;  // sup ||sigma_t||
  double lambda2 = 1.0;  // sup ||sigma_t^{-1}||
  double grad_norm_bound = 0.0;  // sup ||grad b_t||, defaults to K1

  // grad b independent of x: flow matrices are deterministic and can be
  // shared across paths.
  bool linear_drift = false;

  std::string name;
  std::map<std::string, double> params;

  bool has_second_order() const { return K2 > 0.0; }
};

// e^{-At} (grad b_t)(x) e^{At}.
void field_B(const ModelSpec& model, double t, const VectorXd& x,
             MatrixXd& out);

// (grad_u B_t)(x) = e^{-At} (grad_u grad b_t)(x) e^{At}; linear in u. Falls
// back to a central difference of the drift Jacobian when drift_second is
// not supplied.
void directional_dB(const ModelSpec& model, double t, const VectorXd& x,
                    const VectorXd& u, MatrixXd& out);

struct ValidationReport {
  bool ok = true;
  std::string failure;
  double contraction_margin = 0.0;  // max eigenvalue of sym(A); must be <= 0
  double worst_sigma_inverse_err = 0.0;
  double worst_sigma_ratio = 0.0;      // ||sigma|| / lambda1
  double worst_sigma_inv_ratio = 0.0;  // ||sigma^{-1}|| / lambda2
  double worst_b_ratio = 0.0;          // ||B|| / K1
  double worst_db_ratio = 0.0;         // ||grad_u B|| / (K2 |u|)
};

// Randomized spot-check of the hypothesis constants on
// [0, T] x [-radius, radius]^d x unit sphere. Fails on the first violated
// bound, naming it together with the witness point.
ValidationReport validate(const ModelSpec& model, double T, int spot_checks,
                          RngStream& rng, double radius = 10.0);

// Built-in catalog: "zero", "ou" (kappa), "rotation" (omega), "sine" (eps).
// Common parameters: sigma_scale, a_decay / a_skew select
// A = -a_decay I + a_skew * block-skew (a contraction whose conjugation
// preserves spectral norms).
ModelSpec make_model(const std::string& name, int d,
                     const std::map<std::string, double>& params = {});

}  // namespace subibp
