#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "subibp/model.hpp"
#include "subibp/rng.hpp"
#include "subibp/subordinator.hpp"

namespace subibp {

struct SimulationDiverged : std::runtime_error {
  explicit SimulationDiverged(int step)
      : std::runtime_error("simulation diverged at step " +
                           std::to_string(step)),
        step(step) {}
  int step;
};

// The four flow matrix sequences at every grid node. Jt is constructed as
// e^{A t_i} J_i, which keeps the identity Jt = e^{At} J exact on the grid
// (Jt and J then share one integration error).
struct FlowSet {
  std::vector<MatrixXd> J, Jinv, Jt, Jtinv;
};

// Per-(model, T, n) precomputation shared by all paths: grid times,
// semigroup and diffusion values at the nodes, and - for drifts with
// state-independent Jacobian - the deterministic flow set itself.
struct GridCache {
  double T = 0.0;
  int n = 0;
  double dt = 0.0;
  std::vector<double> times;                 // n + 1
  std::vector<MatrixXd> exp_a, exp_a_inv;    // e^{A t_i}, e^{-A t_i}
  std::vector<MatrixXd> sigma, sigma_inv;    // sigma_{t_i}, sigma_{t_i}^{-1}
  std::vector<VectorXd> v_increment;         // V_{t_{i+1}} - V_{t_i}, size n
  MatrixXd exp_at;                           // e^{A T}
  std::shared_ptr<const FlowSet> shared_flows;  // linear-drift models only

  static std::shared_ptr<const GridCache> make(const ModelSpec& model, double T,
                                               int n);
};

// One realized path: the subordinator increments, the Brownian increments,
// the state at every node, and the flows. dS[k] and dW.col(k) cover the cell
// (t_k, t_{k+1}]; X.col(k) is the state at t_k.
struct TrajectoryBundle {
  std::shared_ptr<const GridCache> grid;
  std::vector<double> dS;
  MatrixXd dW;  // d x n
  MatrixXd X;   // d x (n + 1)
  std::shared_ptr<const FlowSet> flows;
  double ST = 0.0;

  int n() const { return grid->n; }
  int d() const { return static_cast<int>(X.rows()); }
};

// Independent N(0, dS_k I_d) vectors, exactly zero where dS_k = 0.
MatrixXd sample_brownian_increments(const std::vector<double>& dS, int d,
                                    RngStream& rng);

// Integrate the state equation and the flow ODEs on the path's grid.
// State step (left-point exponential Euler):
//   X_{k+1} = e^{A dt} (X_k + b_{t_k}(X_k) dt + sigma_{t_k} dW_k) + dV_k,
// flow step per cell: J_{k+1} = exp(B_{t_k}(X_k) dt) J_k with the inverse
// factor applied to Jinv, so J Jinv = I holds to machine precision.
TrajectoryBundle simulate(const ModelSpec& model, const SubordinatorPath& sub,
                          const MatrixXd& dW, const VectorXd& x0,
                          std::shared_ptr<const GridCache> cache);

// Convenience: sample subordinator + Brownian increments from one stream and
// simulate.
TrajectoryBundle simulate_random(const ModelSpec& model,
                                 const BernsteinSpec& spec, double T,
                                 const VectorXd& x0, RngStream& rng,
                                 std::shared_ptr<const GridCache> cache);

}  // namespace subibp
