#pragma once

#include <optional>
#include <span>
#include <vector>

#include "subibp/mc_stats.hpp"
#include "subibp/parallel.hpp"
#include "subibp/testfunctions.hpp"
#include "subibp/weight.hpp"

namespace subibp {

struct ConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnsembleOptions {
  std::size_t n_paths = 10000;
  int n_steps = 512;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = runtime default
};

// Simulate n_paths independent trajectories (or n_paths Brownian paths over
// one fixed subordinator path) and record `slots` doubles per accepted path.
// Per-path random streams are keyed by (seed, kPaths, path index), so the
// ensemble is independent of thread scheduling. Paths with S(T) = 0 are
// rejected and counted; the visitor sees only accepted paths.
struct EnsembleResult {
  // columns[s][i]: slot s of accepted path i, in path-index order
  std::vector<std::vector<double>> columns;
  std::size_t rejected = 0;
  std::size_t accepted = 0;
};

using PathVisitor =
    std::function<void(const TrajectoryBundle&, std::span<double> out)>;

EnsembleResult run_ensemble(const ModelSpec& model, const BernsteinSpec& spec,
                            double T, const VectorXd& x0,
                            const EnsembleOptions& opts, int slots,
                            const PathVisitor& visit);

EnsembleResult run_ensemble_fixed(const ModelSpec& model,
                                  const SubordinatorPath& ell,
                                  const VectorXd& x0,
                                  const EnsembleOptions& opts, int slots,
                                  const PathVisitor& visit);

// Paired Monte Carlo test of the identity
//   E < grad f(X_T), e^{AT} v > = E f(X_T) M_T^v:
// both sides come from the same bundle, z is the paired-difference z-score.
// The ablated variant drops the trace-correction term from the weight.
struct IbpResult {
  MCEstimate lhs, rhs, diff;
  double z = 0.0;
  MCEstimate rhs_ablated, diff_ablated;
  double z_ablated = 0.0;
  std::size_t rejected = 0;
};

IbpResult mc_ibp(const ModelSpec& model, const BernsteinSpec& spec, double T,
                 const VectorXd& x0, const VectorXd& v, const TestFunction& f,
                 const EnsembleOptions& opts);

// Theorem-2.1 mode: the subordinator path is the given pure-jump ell for
// every sample; only the Brownian path varies. The grid must contain every
// jump time and ell(T) must be positive.
IbpResult mc_ibp_fixed_path(const ModelSpec& model, const SubordinatorPath& ell,
                            const VectorXd& x0, const VectorXd& v,
                            const TestFunction& f, const EnsembleOptions& opts);

// Small-jump truncation study: for each eps, simulate X^{l_eps} coupled to
// X^l through shared per-jump Gaussian increments and report
// E |M^{l_eps,v} - M^{l,v}| and E sup_t |X^{l_eps} - X^l|^2.
struct TruncationRow {
  double eps = 0.0;
  std::size_t kept_jumps = 0;
  MCEstimate weight_gap;  // E |M^eps - M|
  MCEstimate state_gap;   // E sup |X^eps - X|^2
};

std::vector<TruncationRow> truncation_convergence(
    const ModelSpec& model, const FixedPathSpec& ell,
    const std::vector<double>& eps_list, double T, const VectorXd& x0,
    const VectorXd& v, const EnsembleOptions& opts);

// Plug-in estimate of Ent(f) = E f log f - (E f) log E f with a delta-method
// standard error. f must be strictly positive on the sampled paths.
MCEstimate entropy_mc(const ModelSpec& model, const BernsteinSpec& spec,
                      double T, const VectorXd& x0, const TestFunction& f,
                      const EnsembleOptions& opts);

// Regular product grid, row-major flattening of axes.
struct GridSpec {
  std::vector<std::vector<double>> axes;
  std::size_t points() const {
    std::size_t p = 1;
    for (const auto& a : axes) p *= a.size();
    return p;
  }
  VectorXd point(std::size_t flat) const;
};

GridSpec auto_grid(const MatrixXd& samples, int points_per_dim,
                   double pad_fraction = 0.1);

struct DensityResult {
  GridSpec grid;
  std::vector<double> p_hat;
  VectorXd bandwidth;
  double mass = 0.0;  // Riemann integral of p_hat over the grid
};

// Gaussian-product-kernel density estimate of X_T's law; bandwidth defaults
// to Silverman's rule per coordinate. d <= 3.
DensityResult density_kde(const ModelSpec& model, const BernsteinSpec& spec,
                          double T, const VectorXd& x0,
                          const EnsembleOptions& opts,
                          std::optional<GridSpec> grid = std::nullopt,
                          std::optional<VectorXd> bandwidth = std::nullopt,
                          int points_per_dim = 101);

struct GradLogDensityResult {
  GridSpec grid;
  std::vector<double> grad_hat;   // NaN where masked
  std::vector<double> n_eff;      // Kish effective sample size per point
  std::vector<bool> masked;
  VectorXd bandwidth;
};

// Nadaraya-Watson regression of -M_T^v on X_T over the grid:
//   grad_v log p_T(x0, .)(y) ~= -sum K_h(y - X_k) M_k / sum K_h(y - X_k).
// Points with effective sample weight below `min_eff` are reported missing
// rather than extrapolated. Requires A = 0 and d <= 2.
GradLogDensityResult grad_log_density(const ModelSpec& model,
                                      const BernsteinSpec& spec, double T,
                                      const VectorXd& x0, const VectorXd& v,
                                      const EnsembleOptions& opts,
                                      std::optional<GridSpec> grid = std::nullopt,
                                      std::optional<VectorXd> bandwidth = std::nullopt,
                                      int points_per_dim = 81,
                                      double min_eff = 30.0);

}  // namespace subibp
