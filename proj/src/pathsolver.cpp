#include "subibp/pathsolver.hpp"

#include <cmath>

namespace subibp {

namespace {

// inverse of a small dense matrix; adjugate for d <= 2
void invert_into(const MatrixXd& M, MatrixXd& out) {
  const auto d = M.rows();
  if (d == 1) {
    out.resize(1, 1);
    out(0, 0) = 1.0 / M(0, 0);
    return;
  }
  if (d == 2) {
    const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
    out.resize(2, 2);
    out(0, 0) = M(1, 1) / det;
    out(0, 1) = -M(0, 1) / det;
    out(1, 0) = -M(1, 0) / det;
    out(1, 1) = M(0, 0) / det;
    return;
  }
  out = M.inverse();
}

// Integrate the flow pair (J, Jinv) along given states, then set
// Jt_i = e^{A t_i} J_i and its inverse.
void integrate_flows(const ModelSpec& model, const GridCache& cache,
                     const MatrixXd* states, FlowSet& flows) {
  const int d = model.d;
  const int n = cache.n;
  flows.J.assign(static_cast<std::size_t>(n) + 1, MatrixXd());
  flows.Jinv.assign(static_cast<std::size_t>(n) + 1, MatrixXd());
  flows.Jt.assign(static_cast<std::size_t>(n) + 1, MatrixXd());
  flows.Jtinv.assign(static_cast<std::size_t>(n) + 1, MatrixXd());
  flows.J[0] = MatrixXd::Identity(d, d);
  flows.Jinv[0] = MatrixXd::Identity(d, d);
  flows.Jt[0] = MatrixXd::Identity(d, d);
  flows.Jtinv[0] = MatrixXd::Identity(d, d);

  MatrixXd grad(d, d), b_field(d, d), step(d, d), step_inv(d, d), scaled(d, d);
  VectorXd x = VectorXd::Zero(d);
  for (int k = 0; k < n; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    if (states) x = states->col(k);
    model.drift_jacobian(cache.times[ks], x, grad);
    if (model.a_is_zero) {
      b_field = grad;
    } else {
      b_field.noalias() = cache.exp_a_inv[ks] * grad * cache.exp_a[ks];
    }
    scaled = b_field * cache.dt;
    matrix_exp_into(scaled, step);
    invert_into(step, step_inv);
    flows.J[ks + 1].noalias() = step * flows.J[ks];
    flows.Jinv[ks + 1].noalias() = flows.Jinv[ks] * step_inv;
    if (model.a_is_zero) {
      flows.Jt[ks + 1] = flows.J[ks + 1];
      flows.Jtinv[ks + 1] = flows.Jinv[ks + 1];
    } else {
      flows.Jt[ks + 1].noalias() = cache.exp_a[ks + 1] * flows.J[ks + 1];
      flows.Jtinv[ks + 1].noalias() = flows.Jinv[ks + 1] * cache.exp_a_inv[ks + 1];
    }
  }
}

}  // namespace

std::shared_ptr<const GridCache> GridCache::make(const ModelSpec& model,
                                                 double T, int n) {
  if (T <= 0.0) throw std::invalid_argument("T must be positive");
  if (n < 1) throw std::invalid_argument("grid size must be >= 1");
  auto cache = std::make_shared<GridCache>();
  cache->T = T;
  cache->n = n;
  cache->dt = T / n;
  cache->times.resize(static_cast<std::size_t>(n) + 1);
  cache->exp_a.resize(static_cast<std::size_t>(n) + 1);
  cache->exp_a_inv.resize(static_cast<std::size_t>(n) + 1);
  cache->sigma.resize(static_cast<std::size_t>(n) + 1);
  cache->sigma_inv.resize(static_cast<std::size_t>(n) + 1);
  cache->v_increment.resize(static_cast<std::size_t>(n));
  const MatrixXd eye = MatrixXd::Identity(model.d, model.d);
  for (int i = 0; i <= n; ++i) {
    const std::size_t is = static_cast<std::size_t>(i);
    cache->times[is] = T * i / n;
    if (model.a_is_zero) {
      cache->exp_a[is] = eye;
      cache->exp_a_inv[is] = eye;
    } else {
      cache->exp_a[is] = matrix_exp(model.A, cache->times[is]);
      cache->exp_a_inv[is] = matrix_exp(model.A, -cache->times[is]);
    }
    cache->sigma[is] = model.sigma(cache->times[is]);
    cache->sigma_inv[is] = model.sigma_inverse(cache->times[is]);
  }
  cache->exp_at = cache->exp_a[static_cast<std::size_t>(n)];
  VectorXd v_prev = model.v_path ? model.v_path(0.0) : VectorXd::Zero(model.d);
  for (int i = 0; i < n; ++i) {
    const std::size_t is = static_cast<std::size_t>(i);
    if (model.v_path) {
      VectorXd v_next = model.v_path(cache->times[is + 1]);
      cache->v_increment[is] = v_next - v_prev;
      v_prev = std::move(v_next);
    } else {
      cache->v_increment[is] = VectorXd::Zero(model.d);
    }
  }
  if (model.linear_drift) {
    auto flows = std::make_shared<FlowSet>();
    integrate_flows(model, *cache, nullptr, *flows);
    cache->shared_flows = std::move(flows);
  }
  return cache;
}

MatrixXd sample_brownian_increments(const std::vector<double>& dS, int d,
                                    RngStream& rng) {
  MatrixXd dW(d, static_cast<Eigen::Index>(dS.size()));
  for (std::size_t k = 0; k < dS.size(); ++k) {
    if (dS[k] < 0.0)
      throw std::invalid_argument("subordinator increments must be >= 0");
    if (dS[k] == 0.0) {
      dW.col(static_cast<Eigen::Index>(k)).setZero();
      continue;
    }
    const double sd = std::sqrt(dS[k]);
    for (int i = 0; i < d; ++i)
      dW(i, static_cast<Eigen::Index>(k)) = sd * rng.normal();
  }
  return dW;
}

TrajectoryBundle simulate(const ModelSpec& model, const SubordinatorPath& sub,
                          const MatrixXd& dW, const VectorXd& x0,
                          std::shared_ptr<const GridCache> cache) {
  const int n = cache->n;
  const int d = model.d;
  if (sub.cells() != n) throw std::invalid_argument("grid mismatch: S path");
  if (dW.cols() != n || dW.rows() != d)
    throw std::invalid_argument("grid mismatch: Brownian increments");

  TrajectoryBundle bundle;
  bundle.grid = cache;
  bundle.dS = sub.increments;
  bundle.dW = dW;
  bundle.X.resize(d, n + 1);
  bundle.X.col(0) = x0;
  bundle.ST = 0.0;
  for (double ds : bundle.dS) bundle.ST += ds;

  const MatrixXd exp_a_dt =
      model.a_is_zero ? MatrixXd::Identity(d, d) : matrix_exp(model.A, cache->dt);

  VectorXd b(d), step(d);
  for (int k = 0; k < n; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    model.drift(cache->times[ks], bundle.X.col(k), b);
    step = bundle.X.col(k) + cache->dt * b;
    step.noalias() += cache->sigma[ks] * dW.col(k);
    if (model.a_is_zero) {
      bundle.X.col(k + 1) = step + cache->v_increment[ks];
    } else {
      bundle.X.col(k + 1).noalias() = exp_a_dt * step;
      bundle.X.col(k + 1) += cache->v_increment[ks];
    }
    if (!bundle.X.col(k + 1).allFinite()) throw SimulationDiverged(k);
  }

  if (model.linear_drift && cache->shared_flows) {
    bundle.flows = cache->shared_flows;
  } else {
    auto flows = std::make_shared<FlowSet>();
    integrate_flows(model, *cache, &bundle.X, *flows);
    bundle.flows = std::move(flows);
  }
  return bundle;
}

TrajectoryBundle simulate_random(const ModelSpec& model,
                                 const BernsteinSpec& spec, double T,
                                 const VectorXd& x0, RngStream& rng,
                                 std::shared_ptr<const GridCache> cache) {
  const SubordinatorPath sub = sample_path(spec, T, cache->n, rng);
  const MatrixXd dW = sample_brownian_increments(sub.increments, model.d, rng);
  return simulate(model, sub, dW, x0, cache);
}

}  // namespace subibp
