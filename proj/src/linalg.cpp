#include "subibp/linalg.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace subibp {

namespace {

// exp of a traceless 2x2 matrix N: N^2 = theta2 * I with theta2 = -det(N),
// so exp(N) = c(theta2) I + s(theta2) N where c = cosh, s = sinh(x)/x for
// theta2 = x^2 > 0 and the cos/sinc pair for theta2 < 0.
void exp2_traceless(double n00, double n01, double n10, double n11, double& c,
                    double& s) {
  const double theta2 = -(n00 * n11 - n01 * n10);
  if (std::abs(theta2) < 1e-8) {
    // series in theta2, accurate to ~1e-32 at the cutoff
    c = 1.0 + theta2 * (0.5 + theta2 / 24.0);
    s = 1.0 + theta2 * (1.0 / 6.0 + theta2 / 120.0);
  } else if (theta2 > 0.0) {
    const double th = std::sqrt(theta2);
    c = std::cosh(th);
    s = std::sinh(th) / th;
  } else {
    const double om = std::sqrt(-theta2);
    c = std::cos(om);
    s = std::sin(om) / om;
  }
}

}  // namespace

void matrix_exp_into(const MatrixXd& M, MatrixXd& out) {
  const auto d = M.rows();
  if (d == 1) {
    out.resize(1, 1);
    out(0, 0) = std::exp(M(0, 0));
    return;
  }
  if (d == 2) {
    const double mu = 0.5 * (M(0, 0) + M(1, 1));
    const double n00 = M(0, 0) - mu;
    const double n11 = M(1, 1) - mu;
    double c, s;
    exp2_traceless(n00, M(0, 1), M(1, 0), n11, c, s);
    const double emu = std::exp(mu);
    out.resize(2, 2);
    out(0, 0) = emu * (c + s * n00);
    out(0, 1) = emu * s * M(0, 1);
    out(1, 0) = emu * s * M(1, 0);
    out(1, 1) = emu * (c + s * n11);
    return;
  }
  out = M.exp();
}

MatrixXd matrix_exp(const MatrixXd& A, double t) {
  MatrixXd out;
  if (t == 0.0) {
    out = MatrixXd::Identity(A.rows(), A.cols());
    return out;
  }
  MatrixXd At = A * t;
  matrix_exp_into(At, out);
  return out;
}

double log_norm(const MatrixXd& A) {
  const MatrixXd sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm(const MatrixXd& A) {
  if (A.rows() == 1 && A.cols() == 1) return std::abs(A(0, 0));
  Eigen::JacobiSVD<MatrixXd> svd(A);
  return svd.singularValues()(0);
}

MatrixXd block_skew(int d, double w) {
  MatrixXd M = MatrixXd::Zero(d, d);
  for (int i = 0; i + 1 < d; i += 2) {
    M(i, i + 1) = w;
    M(i + 1, i) = -w;
  }
  return M;
}

}  // namespace subibp
