#include "subibp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace subibp {

namespace {

EnsembleResult compact(std::vector<double>&& flat, std::vector<char>&& ok,
                       std::size_t n_paths, int slots) {
  EnsembleResult res;
  res.columns.assign(static_cast<std::size_t>(slots), {});
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < n_paths; ++i) accepted += ok[i] ? 1u : 0u;
  for (auto& col : res.columns) col.reserve(accepted);
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (!ok[i]) continue;
    for (int s = 0; s < slots; ++s)
      res.columns[static_cast<std::size_t>(s)].push_back(
          flat[i * static_cast<std::size_t>(slots) + static_cast<std::size_t>(s)]);
  }
  res.accepted = accepted;
  res.rejected = n_paths - accepted;
  return res;
}

void check_jumps_on_grid(const SubordinatorPath& ell) {
  if (!ell.jump_list)
    throw ConfigurationError("fixed-path mode requires a pure-jump path");
  const double T = ell.grid.back();
  const int n = ell.cells();
  for (const auto& [t, s] : *ell.jump_list) {
    const double idx = t * n / T;
    if (std::abs(idx - std::round(idx)) > 1e-9 * n)
      throw ConfigurationError(
          "fixed-path mode requires every jump time on the grid");
  }
}

}  // namespace

EnsembleResult run_ensemble(const ModelSpec& model, const BernsteinSpec& spec,
                            double T, const VectorXd& x0,
                            const EnsembleOptions& opts, int slots,
                            const PathVisitor& visit) {
  const auto cache = GridCache::make(model, T, opts.n_steps);
  std::vector<double> flat(opts.n_paths * static_cast<std::size_t>(slots), 0.0);
  std::vector<char> ok(opts.n_paths, 0);
  parallel_for_index(opts.n_paths, opts.threads, [&](std::size_t i) {
    RngStream rng(opts.seed, purpose::kPaths, i);
    TrajectoryBundle bundle = simulate_random(model, spec, T, x0, rng, cache);
    if (bundle.ST <= 0.0) return;
    visit(bundle, std::span<double>(
                      flat.data() + i * static_cast<std::size_t>(slots),
                      static_cast<std::size_t>(slots)));
    ok[i] = 1;
  });
  return compact(std::move(flat), std::move(ok), opts.n_paths, slots);
}

EnsembleResult run_ensemble_fixed(const ModelSpec& model,
                                  const SubordinatorPath& ell,
                                  const VectorXd& x0,
                                  const EnsembleOptions& opts, int slots,
                                  const PathVisitor& visit) {
  if (ell.total() <= 0.0)
    throw DegeneratePathError();
  const double T = ell.grid.back();
  const auto cache = GridCache::make(model, T, ell.cells());
  std::vector<double> flat(opts.n_paths * static_cast<std::size_t>(slots), 0.0);
  std::vector<char> ok(opts.n_paths, 0);
  parallel_for_index(opts.n_paths, opts.threads, [&](std::size_t i) {
    RngStream rng(opts.seed, purpose::kPaths, i);
    const MatrixXd dW =
        sample_brownian_increments(ell.increments, model.d, rng);
    TrajectoryBundle bundle = simulate(model, ell, dW, x0, cache);
    visit(bundle, std::span<double>(
                      flat.data() + i * static_cast<std::size_t>(slots),
                      static_cast<std::size_t>(slots)));
    ok[i] = 1;
  });
  return compact(std::move(flat), std::move(ok), opts.n_paths, slots);
}

namespace {

IbpResult summarize_ibp(const EnsembleResult& ens) {
  IbpResult res;
  const auto& lhs = ens.columns[0];
  const auto& rhs = ens.columns[1];
  const auto& rhs_ab = ens.columns[2];
  res.lhs = summarize(lhs);
  res.rhs = summarize(rhs);
  res.diff = summarize_diff(lhs, rhs);
  res.z = res.diff.std_error > 0.0 ? res.diff.mean / res.diff.std_error : 0.0;
  res.rhs_ablated = summarize(rhs_ab);
  res.diff_ablated = summarize_diff(lhs, rhs_ab);
  res.z_ablated = res.diff_ablated.std_error > 0.0
                      ? res.diff_ablated.mean / res.diff_ablated.std_error
                      : 0.0;
  res.rejected = ens.rejected;
  return res;
}

}  // namespace

IbpResult mc_ibp(const ModelSpec& model, const BernsteinSpec& spec, double T,
                 const VectorXd& x0, const VectorXd& v, const TestFunction& f,
                 const EnsembleOptions& opts) {
  if (opts.n_paths < 100)
    throw ConfigurationError("mc_ibp needs at least 100 paths");
  if (has_zero_atom(spec, T))
    throw ConfigurationError(
        "subordinator " + describe(spec) +
        " has an atom at zero and violates E S(T)^{-1/2} < infinity");

  const auto cache = GridCache::make(model, T, opts.n_steps);
  const VectorXd direction = cache->exp_at * v;
  auto visitor = [&](const TrajectoryBundle& bundle, std::span<double> out) {
    const WeightBreakdown wb = compute_weight(model, bundle, v);
    const VectorXd xT = bundle.X.col(bundle.n());
    const double fx = f.f(xT);
    out[0] = f.gradient(xT).dot(direction);
    out[1] = fx * wb.total;
    out[2] = fx * wb.term1;
  };
  EnsembleResult ens = run_ensemble(model, spec, T, x0, opts, 3, visitor);
  if (ens.rejected * 100 > opts.n_paths)
    throw ConfigurationError("more than 1% of paths had S(T) = 0");
  return summarize_ibp(ens);
}

IbpResult mc_ibp_fixed_path(const ModelSpec& model, const SubordinatorPath& ell,
                            const VectorXd& x0, const VectorXd& v,
                            const TestFunction& f,
                            const EnsembleOptions& opts) {
  if (opts.n_paths < 100)
    throw ConfigurationError("mc_ibp needs at least 100 paths");
  check_jumps_on_grid(ell);
  if (ell.total() <= 0.0) throw DegeneratePathError();

  const double T = ell.grid.back();
  const auto cache = GridCache::make(model, T, ell.cells());
  const VectorXd direction = cache->exp_at * v;
  auto visitor = [&](const TrajectoryBundle& bundle, std::span<double> out) {
    const WeightBreakdown wb = compute_weight(model, bundle, v);
    const VectorXd xT = bundle.X.col(bundle.n());
    const double fx = f.f(xT);
    out[0] = f.gradient(xT).dot(direction);
    out[1] = fx * wb.total;
    out[2] = fx * wb.term1;
  };
  EnsembleResult ens = run_ensemble_fixed(model, ell, x0, opts, 3, visitor);
  return summarize_ibp(ens);
}

std::vector<TruncationRow> truncation_convergence(
    const ModelSpec& model, const FixedPathSpec& ell,
    const std::vector<double>& eps_list, double T, const VectorXd& x0,
    const VectorXd& v, const EnsembleOptions& opts) {
  if (ell.jumps.size() < 3)
    throw ConfigurationError("truncation study needs at least 3 jumps");
  RngStream dummy(0, 0, 0);
  const SubordinatorPath base =
      sample_path(BernsteinSpec(ell), T, opts.n_steps, dummy);
  check_jumps_on_grid(base);
  if (base.total() <= 0.0) throw DegeneratePathError();

  const std::size_t n_eps = eps_list.size();
  std::vector<SubordinatorPath> truncated;
  truncated.reserve(n_eps);
  for (double eps : eps_list) {
    truncated.push_back(truncate_jumps(base, eps));
    if (truncated.back().total() <= 0.0)
      throw DegeneratePathError();
  }

  const auto cache = GridCache::make(model, T, opts.n_steps);
  const std::size_t m = ell.jumps.size();
  const int n = opts.n_steps;
  const int d = model.d;

  // Map each original jump to its grid cell.
  std::vector<int> jump_cell(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double idx = ell.jumps[j].first * n / T;
    jump_cell[j] = static_cast<int>(std::round(idx)) - 1;
  }

  const int slots = static_cast<int>(2 * n_eps);
  std::vector<double> flat(opts.n_paths * static_cast<std::size_t>(slots), 0.0);
  std::vector<char> ok(opts.n_paths, 0);

  parallel_for_index(opts.n_paths, opts.threads, [&](std::size_t i) {
    RngStream rng(opts.seed, purpose::kPaths, i);
    // one Gaussian block per original jump, shared across eps levels
    MatrixXd xi(d, static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
      for (int r = 0; r < d; ++r)
        xi(r, static_cast<Eigen::Index>(j)) = rng.normal();

    auto build_dw = [&](const SubordinatorPath& path) {
      MatrixXd dW = MatrixXd::Zero(d, n);
      for (std::size_t j = 0; j < m; ++j) {
        // kept iff the jump survives in this path's list
        bool kept = false;
        for (const auto& [t, s] : *path.jump_list)
          if (t == ell.jumps[j].first) {
            kept = true;
            break;
          }
        if (kept)
          dW.col(jump_cell[j]) =
              std::sqrt(ell.jumps[j].second) * xi.col(static_cast<Eigen::Index>(j));
      }
      return dW;
    };

    const TrajectoryBundle base_bundle =
        simulate(model, base, build_dw(base), x0, cache);
    const double m_base = compute_weight(model, base_bundle, v).total;

    double* row = flat.data() + i * static_cast<std::size_t>(slots);
    for (std::size_t e = 0; e < n_eps; ++e) {
      const TrajectoryBundle eb =
          simulate(model, truncated[e], build_dw(truncated[e]), x0, cache);
      const double m_eps = compute_weight(model, eb, v).total;
      double sup2 = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double dev = (eb.X.col(k) - base_bundle.X.col(k)).squaredNorm();
        sup2 = std::max(sup2, dev);
      }
      row[2 * e] = std::abs(m_eps - m_base);
      row[2 * e + 1] = sup2;
    }
    ok[i] = 1;
  });

  EnsembleResult ens = compact(std::move(flat), std::move(ok), opts.n_paths, slots);
  std::vector<TruncationRow> rows;
  rows.reserve(n_eps);
  for (std::size_t e = 0; e < n_eps; ++e) {
    TruncationRow row;
    row.eps = eps_list[e];
    row.kept_jumps = truncated[e].jump_list->size();
    row.weight_gap = summarize(ens.columns[2 * e]);
    row.state_gap = summarize(ens.columns[2 * e + 1]);
    rows.push_back(row);
  }
  return rows;
}

MCEstimate entropy_mc(const ModelSpec& model, const BernsteinSpec& spec,
                      double T, const VectorXd& x0, const TestFunction& f,
                      const EnsembleOptions& opts) {
  auto visitor = [&](const TrajectoryBundle& bundle, std::span<double> out) {
    const double fx = f.f(bundle.X.col(bundle.n()));
    out[0] = fx;
    out[1] = fx > 0.0 ? fx * std::log(fx)
                      : std::numeric_limits<double>::quiet_NaN();
  };
  EnsembleResult ens = run_ensemble(model, spec, T, x0, opts, 2, visitor);
  const auto& fs = ens.columns[0];
  const auto& gs = ens.columns[1];
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (!(fs[i] > 0.0) || !std::isfinite(gs[i]))
      throw std::domain_error("entropy requires strictly positive f");

  const std::size_t nn = fs.size();
  const MCEstimate fbar = summarize(fs);
  const MCEstimate gbar = summarize(gs);
  MCEstimate est;
  est.n = nn;
  est.mean = gbar.mean - fbar.mean * std::log(fbar.mean);
  // delta method: gradient (1, -(1 + log m)) wrt (E g, E f)
  const double c = 1.0 + std::log(fbar.mean);
  double cov = 0.0;
  for (std::size_t i = 0; i < nn; ++i)
    cov += (gs[i] - gbar.mean) * (fs[i] - fbar.mean);
  cov /= static_cast<double>(nn - 1);
  const double var_g = gbar.std_error * gbar.std_error * static_cast<double>(nn);
  const double var_f = fbar.std_error * fbar.std_error * static_cast<double>(nn);
  const double var_ent = var_g - 2.0 * c * cov + c * c * var_f;
  est.std_error = std::sqrt(std::max(0.0, var_ent) / static_cast<double>(nn));
  return est;
}

VectorXd GridSpec::point(std::size_t flat) const {
  VectorXd p(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t dim = axes.size(); dim-- > 0;) {
    const std::size_t sz = axes[dim].size();
    p(static_cast<Eigen::Index>(dim)) = axes[dim][flat % sz];
    flat /= sz;
  }
  return p;
}

GridSpec auto_grid(const MatrixXd& samples, int points_per_dim,
                   double pad_fraction) {
  GridSpec grid;
  const int d = static_cast<int>(samples.rows());
  const std::size_t m = static_cast<std::size_t>(samples.cols());
  grid.axes.resize(static_cast<std::size_t>(d));
  std::vector<double> coord(m);
  for (int dim = 0; dim < d; ++dim) {
    for (std::size_t k = 0; k < m; ++k)
      coord[k] = samples(dim, static_cast<Eigen::Index>(k));
    std::sort(coord.begin(), coord.end());
    const double lo_q = coord[static_cast<std::size_t>(0.0005 * (m - 1))];
    const double hi_q = coord[static_cast<std::size_t>(std::ceil(0.9995 * (m - 1)))];
    const double pad = pad_fraction * std::max(hi_q - lo_q, 1e-12);
    const double lo = lo_q - pad;
    const double hi = hi_q + pad;
    auto& axis = grid.axes[static_cast<std::size_t>(dim)];
    axis.resize(static_cast<std::size_t>(points_per_dim));
    for (int i = 0; i < points_per_dim; ++i)
      axis[static_cast<std::size_t>(i)] =
          lo + (hi - lo) * i / (points_per_dim - 1);
  }
  return grid;
}

namespace {

MatrixXd collect_samples(const ModelSpec& model, const BernsteinSpec& spec,
                         double T, const VectorXd& x0,
                         const EnsembleOptions& opts,
                         const VectorXd* weight_dir,
                         std::vector<double>* weights) {
  const int d = model.d;
  const int slots = d + (weight_dir ? 1 : 0);
  auto visitor = [&](const TrajectoryBundle& bundle, std::span<double> out) {
    const VectorXd xT = bundle.X.col(bundle.n());
    for (int r = 0; r < d; ++r) out[static_cast<std::size_t>(r)] = xT(r);
    if (weight_dir)
      out[static_cast<std::size_t>(d)] =
          compute_weight(model, bundle, *weight_dir).total;
  };
  EnsembleResult ens = run_ensemble(model, spec, T, x0, opts, slots, visitor);
  MatrixXd samples(d, static_cast<Eigen::Index>(ens.accepted));
  for (int r = 0; r < d; ++r)
    for (std::size_t k = 0; k < ens.accepted; ++k)
      samples(r, static_cast<Eigen::Index>(k)) =
          ens.columns[static_cast<std::size_t>(r)][k];
  if (weights) *weights = std::move(ens.columns[static_cast<std::size_t>(d)]);
  return samples;
}

VectorXd silverman_bandwidth(const MatrixXd& samples) {
  const int d = static_cast<int>(samples.rows());
  const double m = static_cast<double>(samples.cols());
  VectorXd h(d);
  const double factor =
      std::pow(4.0 / ((d + 2.0) * m), 1.0 / (d + 4.0));
  std::vector<double> coord(static_cast<std::size_t>(samples.cols()));
  for (int dim = 0; dim < d; ++dim) {
    const double mean = samples.row(dim).mean();
    const double sd = std::sqrt(
        (samples.row(dim).array() - mean).square().sum() / (m - 1.0));
    // robust scale: heavy-tailed laws blow up the sample variance
    for (Eigen::Index k = 0; k < samples.cols(); ++k)
      coord[static_cast<std::size_t>(k)] = samples(dim, k);
    std::sort(coord.begin(), coord.end());
    const double iqr =
        coord[static_cast<std::size_t>(0.75 * (m - 1))] -
        coord[static_cast<std::size_t>(0.25 * (m - 1))];
    const double scale = std::min(sd, iqr / 1.349);
    h(dim) = std::max(factor * scale, 1e-12);
  }
  return h;
}

}  // namespace

DensityResult density_kde(const ModelSpec& model, const BernsteinSpec& spec,
                          double T, const VectorXd& x0,
                          const EnsembleOptions& opts,
                          std::optional<GridSpec> grid,
                          std::optional<VectorXd> bandwidth,
                          int points_per_dim) {
  if (model.d > 3)
    throw ConfigurationError("density_kde supports d <= 3");
  const MatrixXd samples =
      collect_samples(model, spec, T, x0, opts, nullptr, nullptr);
  if (samples.cols() < 2) throw ConfigurationError("too few samples");

  DensityResult res;
  res.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  res.grid = grid ? *grid : auto_grid(samples, points_per_dim);
  if (res.grid.points() == 0) throw ConfigurationError("empty grid");

  const int d = model.d;
  const std::size_t pts = res.grid.points();
  const std::size_t m = static_cast<std::size_t>(samples.cols());
  double norm = 1.0;
  for (int dim = 0; dim < d; ++dim)
    norm *= 1.0 / (res.bandwidth(dim) * std::sqrt(2.0 * std::numbers::pi));
  res.p_hat.assign(pts, 0.0);
  parallel_for_index(pts, opts.threads, [&](std::size_t g) {
    const VectorXd y = res.grid.point(g);
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double q = 0.0;
      for (int dim = 0; dim < d; ++dim) {
        const double z =
            (y(dim) - samples(dim, static_cast<Eigen::Index>(k))) /
            res.bandwidth(dim);
        q += z * z;
      }
      acc += std::exp(-0.5 * q);
    }
    res.p_hat[g] = norm * acc / static_cast<double>(m);
  });

  // exact integral of the kernel estimate over the grid's bounding box
  double mass = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double q = 1.0;
    for (int dim = 0; dim < d; ++dim) {
      const auto& axis = res.grid.axes[static_cast<std::size_t>(dim)];
      const double xk = samples(dim, static_cast<Eigen::Index>(k));
      const double h = res.bandwidth(dim) * std::numbers::sqrt2;
      q *= 0.5 * (std::erf((axis.back() - xk) / h) -
                  std::erf((axis.front() - xk) / h));
    }
    mass += q;
  }
  res.mass = mass / static_cast<double>(m);
  return res;
}

GradLogDensityResult grad_log_density(const ModelSpec& model,
                                      const BernsteinSpec& spec, double T,
                                      const VectorXd& x0, const VectorXd& v,
                                      const EnsembleOptions& opts,
                                      std::optional<GridSpec> grid,
                                      std::optional<VectorXd> bandwidth,
                                      int points_per_dim, double min_eff) {
  if (model.d > 2)
    throw ConfigurationError("grad_log_density supports d <= 2");
  if (!model.a_is_zero)
    throw ConfigurationError("grad_log_density requires A = 0");
  std::vector<double> weights;
  const MatrixXd samples =
      collect_samples(model, spec, T, x0, opts, &v, &weights);
  if (samples.cols() < 2) throw ConfigurationError("too few samples");

  GradLogDensityResult res;
  res.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  res.grid = grid ? *grid : auto_grid(samples, points_per_dim);
  const std::size_t pts = res.grid.points();
  const std::size_t m = static_cast<std::size_t>(samples.cols());
  const int d = model.d;
  res.grad_hat.assign(pts, std::numeric_limits<double>::quiet_NaN());
  res.n_eff.assign(pts, 0.0);
  res.masked.assign(pts, true);
  parallel_for_index(pts, opts.threads, [&](std::size_t g) {
    const VectorXd y = res.grid.point(g);
    double den = 0.0, num = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double q = 0.0;
      for (int dim = 0; dim < d; ++dim) {
        const double z =
            (y(dim) - samples(dim, static_cast<Eigen::Index>(k))) /
            res.bandwidth(dim);
        q += z * z;
      }
      const double w = std::exp(-0.5 * q);
      den += w;
      sq += w * w;
      num += w * weights[k];
    }
    const double eff = sq > 0.0 ? den * den / sq : 0.0;
    res.n_eff[g] = eff;
    if (eff >= min_eff) {
      res.grad_hat[g] = -num / den;
      res.masked[g] = false;
    }
  });
  return res;
}

}  // namespace subibp
