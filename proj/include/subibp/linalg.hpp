#pragma once

#include <Eigen/Dense>

namespace subibp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Matrix exponential exp(A t). Closed form for d <= 2, scaling-and-squaring
// Pade otherwise; relative accuracy well below 1e-10 for ||A t|| <= 10.
MatrixXd matrix_exp(const MatrixXd& A, double t = 1.0);

// In-place variant used by the path solver's per-cell flow updates.
void matrix_exp_into(const MatrixXd& M, MatrixXd& out);

// Largest eigenvalue of the symmetric part (A + A^T)/2; <= 0 certifies
// ||exp(A t)|| <= 1 in the Euclidean norm.
double log_norm(const MatrixXd& A);

// Spectral (operator 2-) norm.
double spectral_norm(const MatrixXd& A);

// Block-diagonal skew matrix with 2x2 blocks [[0, w], [-w, 0]]; the last
// dimension stays zero when d is odd.
MatrixXd block_skew(int d, double w);

}  // namespace subibp
