#include "subibp/weight.hpp"

#include <cmath>

namespace subibp {

namespace {

double trace_product(const MatrixXd& A, const MatrixXd& B) {
  // Tr(A B) without forming the product
  return (A.array() * B.transpose().array()).sum();
}

}  // namespace

WeightBreakdown compute_weight(const ModelSpec& model,
                               const TrajectoryBundle& bundle,
                               const VectorXd& v) {
  if (bundle.ST <= 0.0) throw DegeneratePathError();
  const int n = bundle.n();
  const GridCache& cache = *bundle.grid;
  const FlowSet& fl = *bundle.flows;

  WeightBreakdown out;
  out.direction = v;
  const VectorXd w = fl.Jinv[static_cast<std::size_t>(n)] * v;

  double term1 = 0.0;
  VectorXd integrand(model.d);
  for (int k = 0; k < n; ++k) {
    const std::size_t node = static_cast<std::size_t>(k) + 1;
    if (bundle.dS[static_cast<std::size_t>(k)] == 0.0) continue;
    integrand.noalias() = fl.Jt[node] * w;
    term1 += (cache.sigma_inv[node] * integrand).dot(bundle.dW.col(k));
  }
  out.term1 = term1 / bundle.ST;

  double term2 = 0.0;
  if (model.has_second_order()) {
    std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
    MatrixXd db(model.d, model.d), prod(model.d, model.d);
    VectorXd u(model.d);
    for (int j = n - 1; j >= 0; --j) {
      const std::size_t js = static_cast<std::size_t>(j);
      u.noalias() = fl.J[js] * w;
      directional_dB(model, cache.times[js], bundle.X.col(j), u, db);
      prod.noalias() = db * fl.Jt[js];
      suffix[js] = suffix[js + 1] + trace_product(fl.Jinv[js], prod) * cache.dt;
    }
    for (int k = 0; k < n; ++k)
      term2 += bundle.dS[static_cast<std::size_t>(k)] *
               suffix[static_cast<std::size_t>(k) + 1];
    term2 /= bundle.ST;
  }
  out.term2 = term2;
  out.total = out.term1 + out.term2;
  return out;
}

WeightBreakdown compute_weight_literal(const ModelSpec& model,
                                       const TrajectoryBundle& bundle,
                                       const VectorXd& v) {
  if (bundle.ST <= 0.0) throw DegeneratePathError();
  const int n = bundle.n();
  const GridCache& cache = *bundle.grid;
  const FlowSet& fl = *bundle.flows;

  WeightBreakdown out;
  out.direction = v;
  const VectorXd w = fl.Jinv[static_cast<std::size_t>(n)] * v;

  double term1 = 0.0;
  for (int k = 0; k < n; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) + 1;
    if (bundle.dS[static_cast<std::size_t>(k)] == 0.0) continue;
    const VectorXd integrand = cache.sigma_inv[i] * (cache.exp_a[i] * (fl.J[i] * w));
    term1 += integrand.dot(bundle.dW.col(k));
  }
  out.term1 = term1 / bundle.ST;

  double term2 = 0.0;
  if (model.has_second_order()) {
    // inner integrands depend on r = t_j only; precompute per node
    std::vector<MatrixXd> inner(static_cast<std::size_t>(n));
    MatrixXd db(model.d, model.d);
    VectorXd u(model.d);
    for (int j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      u.noalias() = fl.J[js] * w;
      directional_dB(model, cache.times[js], bundle.X.col(j), u, db);
      inner[js] = fl.Jinv[js] * db * fl.Jt[js];
    }
    for (int k = 0; k < n; ++k) {
      const double ds = bundle.dS[static_cast<std::size_t>(k)];
      if (ds == 0.0) continue;
      const std::size_t i = static_cast<std::size_t>(k) + 1;
      const MatrixXd left =
          cache.sigma_inv[i] * cache.exp_a[i] * fl.J[i];
      const MatrixXd right = fl.Jtinv[i] * cache.sigma[i];
      double integral = 0.0;
      for (int j = k + 1; j < n; ++j) {
        const MatrixXd m = left * inner[static_cast<std::size_t>(j)] * right;
        integral += m.trace() * cache.dt;
      }
      term2 += ds * integral;
    }
    term2 /= bundle.ST;
  }
  out.term2 = term2;
  out.total = out.term1 + out.term2;
  return out;
}

double weight_moment_bound(const ModelSpec& model, double T, const VectorXd& v,
                           const BernsteinSpec& spec) {
  const double m_half = neg_moment(spec, 0.5, T);
  const double beta = model.d * T * model.lambda1 * model.lambda2 * model.K2 *
                      std::exp(3.0 * T * model.K1);
  return v.norm() *
         (model.lambda2 * std::exp(T * model.K1) * m_half + beta);
}

}  // namespace subibp
