#include "subibp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace subibp {

namespace {

using nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) row += ",";
    row += c;
    first = false;
  }
  return row;
}

ordered_json estimate_json(const MCEstimate& e) {
  ordered_json j;
  j["mean"] = e.mean;
  j["stderr"] = e.std_error;
  j["n"] = e.n;
  if (e.unstable) j["unstable"] = true;
  return j;
}

ordered_json ibp_json(const IbpResult& r, bool ablate) {
  ordered_json j;
  j["lhs"] = estimate_json(r.lhs);
  j["rhs"] = estimate_json(r.rhs);
  j["diff"] = estimate_json(r.diff);
  j["z"] = r.z;
  if (ablate) {
    j["rhs_ablated"] = estimate_json(r.rhs_ablated);
    j["z_ablated"] = r.z_ablated;
  }
  j["rejected_paths"] = r.rejected;
  return j;
}

ordered_json row_json(const BoundCheckRow& row) {
  ordered_json j;
  j["check"] = row.check;
  j["model"] = row.model_name;
  j["f"] = row.f_name;
  j["x0"] = row.x0_desc;
  j["T"] = row.T;
  j["p"] = row.p;
  j["v_norm"] = row.v_norm;
  j["delta"] = row.delta;
  j["lhs"] = row.lhs;
  j["lhs_stderr"] = row.lhs_se;
  j["rhs"] = row.rhs;
  j["rhs_stderr"] = row.rhs_se;
  j["margin"] = row.margin;
  j["pass"] = row.pass;
  if (row.unstable) j["unstable"] = true;
  return j;
}

std::string bound_csv(const BoundCheckRow& row) {
  return csv_row({row.check, row.model_name, fmt(row.T), fmt(row.v_norm),
                  fmt(row.p), fmt(row.lhs), fmt(row.rhs), fmt(row.margin),
                  row.pass ? "1" : "0"});
}

EnsembleOptions ensemble_options(const RunConfig& cfg) {
  EnsembleOptions opts;
  opts.n_paths = cfg.paths;
  opts.n_steps = cfg.n;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  return opts;
}

Report make_report(const RunConfig& cfg, ordered_json results,
                   std::vector<std::string> csv, int exit_code,
                   const std::string& summary) {
  Report rep;
  rep.json["tool"] = "subibp";
  rep.json["version"] = "0.1.0";
  rep.json["command"] = cfg.command;
  rep.json["config"] = cfg.echo();
  rep.json["results"] = std::move(results);
  rep.json["pass"] = exit_code == 0;
  rep.csv_lines = std::move(csv);
  rep.exit_code = exit_code;
  rep.summary = summary;
  return rep;
}

Report run_verify_ibp(const RunConfig& cfg) {
  const ModelSpec model = build_model(cfg);
  const BernsteinSpec spec = parse_bernstein(cfg.sub);
  const VectorXd x0 = parse_vector(cfg.x0, cfg.d);
  const std::vector<VectorXd> vs = parse_vector_list(cfg.v, cfg.d);
  const VectorXd a = parse_vector(cfg.a, cfg.d);
  const EnsembleOptions opts = ensemble_options(cfg);

  std::vector<std::string> fnames;
  {
    std::istringstream in(cfg.f);
    std::string item;
    while (std::getline(in, item, ',')) fnames.push_back(item);
  }

  ordered_json results = ordered_json::array();
  std::vector<std::string> csv{"name,mean,stderr,n,z"};
  bool all_ok = true;
  const bool fixed_mode = cfg.command == "verify-ibp-fixed-path";
  SubordinatorPath ell;
  if (fixed_mode) {
    RngStream dummy(0, 0, 0);
    ell = sample_path(spec, cfg.T, cfg.n, dummy);
  }

  for (const auto& fname : fnames) {
    const TestFunction f = make_test_function(fname, a);
    for (const auto& v : vs) {
      const IbpResult r =
          fixed_mode ? mc_ibp_fixed_path(model, ell, x0, v, f, opts)
                     : mc_ibp(model, spec, cfg.T, x0, v, f, opts);
      ordered_json entry = ibp_json(r, cfg.ablate_term2);
      entry["f"] = f.descriptor;
      std::string vd = "[";
      for (Eigen::Index i = 0; i < v.size(); ++i)
        vd += (i ? "," : "") + fmt(v(i));
      vd += "]";
      entry["v"] = vd;
      results.push_back(entry);
      const std::string tag = fname + ":v=" + vd;
      csv.push_back(csv_row({"lhs:" + tag, fmt(r.lhs.mean), fmt(r.lhs.std_error),
                             std::to_string(r.lhs.n), ""}));
      csv.push_back(csv_row({"rhs:" + tag, fmt(r.rhs.mean), fmt(r.rhs.std_error),
                             std::to_string(r.rhs.n), fmt(r.z)}));
      if (cfg.ablate_term2)
        csv.push_back(csv_row({"rhs_ablated:" + tag, fmt(r.rhs_ablated.mean),
                               fmt(r.rhs_ablated.std_error),
                               std::to_string(r.rhs_ablated.n),
                               fmt(r.z_ablated)}));
      const bool z_ok = std::abs(r.z) < 3.0;
      const bool ablate_ok = !cfg.ablate_term2 || std::abs(r.z_ablated) > 5.0;
      all_ok = all_ok && z_ok && ablate_ok;
    }
  }
  std::ostringstream summary;
  summary << (all_ok ? "PASS" : "FAIL") << " " << cfg.command << ": "
          << results.size() << " identity check(s)";
  if (cfg.ablate_term2) summary << " (term2 ablation demanded |z| > 5)";
  return make_report(cfg, std::move(results), std::move(csv), all_ok ? 0 : 2,
                     summary.str());
}

Report run_truncation(const RunConfig& cfg) {
  const ModelSpec model = build_model(cfg);
  const BernsteinSpec spec = parse_bernstein(cfg.sub);
  const auto* fp = std::get_if<FixedPathSpec>(&spec);
  if (!fp)
    throw ConfigurationError("truncation study needs a fixed-path subordinator");
  const VectorXd x0 = parse_vector(cfg.x0, cfg.d);
  const VectorXd v = parse_vector_list(cfg.v, cfg.d).front();
  std::vector<double> eps = parse_double_list(cfg.eps_list);

  const auto rows =
      truncation_convergence(model, *fp, eps, cfg.T, x0, v, ensemble_options(cfg));

  double min_jump = std::numeric_limits<double>::infinity();
  for (const auto& [t, s] : fp->jumps) min_jump = std::min(min_jump, s);

  ordered_json results = ordered_json::array();
  std::vector<std::string> csv{
      "eps,kept_jumps,weight_gap,weight_gap_stderr,state_gap,state_gap_stderr"};
  bool all_ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ordered_json entry;
    entry["eps"] = r.eps;
    entry["kept_jumps"] = r.kept_jumps;
    entry["weight_gap"] = estimate_json(r.weight_gap);
    entry["state_gap"] = estimate_json(r.state_gap);
    results.push_back(entry);
    csv.push_back(csv_row({fmt(r.eps), std::to_string(r.kept_jumps),
                           fmt(r.weight_gap.mean), fmt(r.weight_gap.std_error),
                           fmt(r.state_gap.mean), fmt(r.state_gap.std_error)}));
    if (i > 0 && rows[i].eps < rows[i - 1].eps) {
      // decreasing eps keeps more jumps: metrics must not grow beyond noise
      const auto noise = [](const MCEstimate& a, const MCEstimate& b) {
        return 3.0 * std::sqrt(a.std_error * a.std_error +
                               b.std_error * b.std_error);
      };
      all_ok = all_ok && r.weight_gap.mean <= rows[i - 1].weight_gap.mean +
                                                  noise(r.weight_gap,
                                                        rows[i - 1].weight_gap);
      all_ok = all_ok && r.state_gap.mean <= rows[i - 1].state_gap.mean +
                                                 noise(r.state_gap,
                                                       rows[i - 1].state_gap);
    }
    if (r.eps < min_jump)
      all_ok = all_ok && r.weight_gap.mean == 0.0 && r.state_gap.mean == 0.0;
  }
  return make_report(cfg, std::move(results), std::move(csv), all_ok ? 0 : 2,
                     std::string(all_ok ? "PASS" : "FAIL") +
                         " truncation: coupled metrics nonincreasing in eps");
}

Report run_bounds(const RunConfig& cfg) {
  const ModelSpec model = build_model(cfg);
  const BernsteinSpec spec = parse_bernstein(cfg.sub);
  const VectorXd x0 = parse_vector(cfg.x0, cfg.d);
  const std::vector<VectorXd> vs = parse_vector_list(cfg.v, cfg.d);
  const VectorXd a = parse_vector(cfg.a, cfg.d);
  const EnsembleOptions opts = ensemble_options(cfg);

  std::vector<TestFunction> bounded;
  for (const auto& name : {"sin", "cos", "gaussbump"})
    bounded.push_back(make_test_function(name, a));
  const TestFunction positive = make_test_function("expsin", a);
  const std::vector<VectorXd> x0s{x0};

  std::vector<BoundCheckRow> rows;
  for (const auto& v : vs) {
    auto g = check_gradient_bound(model, spec, cfg.T, v, bounded, x0s, opts);
    rows.insert(rows.end(), g.begin(), g.end());
    auto e = check_entropy_bound(model, spec, cfg.T, v, cfg.delta, positive,
                                 x0s, opts);
    rows.insert(rows.end(), e.begin(), e.end());
  }
  auto h = shift_harnack_check(model, spec, cfg.T, cfg.p, vs, positive, x0s, opts);
  rows.insert(rows.end(), h.begin(), h.end());
  auto lp = check_lp_gradient_bound(model, spec, parse_double_list(cfg.t_grid),
                                    cfg.p, bounded, x0, opts);
  rows.insert(rows.end(), lp.begin(), lp.end());

  ordered_json results = ordered_json::array();
  std::vector<std::string> csv{"inequality,model,T,v,p,lhs,rhs,margin,pass"};
  bool all_ok = true;
  for (const auto& row : rows) {
    results.push_back(row_json(row));
    csv.push_back(bound_csv(row));
    all_ok = all_ok && row.pass;
  }
  return make_report(cfg, std::move(results), std::move(csv), all_ok ? 0 : 2,
                     std::string(all_ok ? "PASS" : "FAIL") + " bounds: " +
                         std::to_string(rows.size()) + " inequality rows");
}

Report run_scaling(const RunConfig& cfg) {
  const ModelSpec model = build_model(cfg);
  const VectorXd x0 = parse_vector(cfg.x0, cfg.d);
  const VectorXd a = parse_vector(cfg.a, cfg.d);
  const TestFunction f = make_test_function(cfg.f.substr(0, cfg.f.find(',')), a);
  const auto ts = parse_double_list(cfg.t_grid);

  const ScalingResult res = stable_scaling_study(model, cfg.rho, ts, cfg.p, f,
                                                 x0, ensemble_options(cfg));
  ordered_json results;
  results["alpha"] = res.alpha;
  results["reference_slope"] = -1.0 / res.alpha;
  results["analytic_slope"] = res.analytic_slope;
  results["analytic_r2"] = res.analytic_r2;
  results["empirical_slope"] = res.empirical_slope;
  results["empirical_r2"] = res.empirical_r2;
  results["rows"] = ordered_json::array();
  std::vector<std::string> csv{"T,analytic_term,empirical_ratio"};
  for (const auto& row : res.rows) {
    ordered_json j;
    j["T"] = row.T;
    j["analytic_term"] = row.analytic_term;
    j["empirical_ratio"] = row.empirical_ratio;
    results["rows"].push_back(j);
    csv.push_back(
        csv_row({fmt(row.T), fmt(row.analytic_term), fmt(row.empirical_ratio)}));
  }
  std::ostringstream summary;
  summary << "scaling: alpha=" << res.alpha << " analytic slope "
          << fmt(res.analytic_slope) << ", empirical slope "
          << fmt(res.empirical_slope) << " (reference " << fmt(-1.0 / res.alpha)
          << ")";
  return make_report(cfg, std::move(results), std::move(csv), 0, summary.str());
}

Report run_density(const RunConfig& cfg) {
  const ModelSpec model = build_model(cfg);
  const BernsteinSpec spec = parse_bernstein(cfg.sub);
  const VectorXd x0 = parse_vector(cfg.x0, cfg.d);
  const VectorXd v = parse_vector_list(cfg.v, cfg.d).front();
  const EnsembleOptions opts = ensemble_options(cfg);
  std::optional<VectorXd> bw;
  if (cfg.bandwidth > 0.0)
    bw = VectorXd::Constant(cfg.d, cfg.bandwidth);

  const int pts = cfg.grid_points > 0 ? cfg.grid_points : 101;
  const DensityResult dens =
      density_kde(model, spec, cfg.T, x0, opts, std::nullopt, bw, pts);

  ordered_json results;
  results["mass"] = dens.mass;
  results["bandwidth"] = std::vector<double>(
      dens.bandwidth.data(), dens.bandwidth.data() + dens.bandwidth.size());
  std::vector<std::string> csv;
  {
    std::string header;
    for (int k = 0; k < cfg.d; ++k) header += "y" + std::to_string(k + 1) + ",";
    csv.push_back(header + "p_hat,grad_log_p");
  }
  std::vector<double> grad(dens.grid.points(),
                           std::numeric_limits<double>::quiet_NaN());
  if (model.a_is_zero && cfg.d <= 2) {
    const GradLogDensityResult g = grad_log_density(
        model, spec, cfg.T, x0, v, opts, dens.grid, bw,
        cfg.grid_points > 0 ? cfg.grid_points : 81);
    grad = g.grad_hat;
    results["grad_masked_points"] =
        static_cast<int>(std::count(g.masked.begin(), g.masked.end(), true));
  }
  for (std::size_t i = 0; i < dens.grid.points(); ++i) {
    const VectorXd y = dens.grid.point(i);
    std::string row;
    for (int k = 0; k < cfg.d; ++k) row += fmt(y(k)) + ",";
    row += fmt(dens.p_hat[i]) + ",";
    row += std::isnan(grad[i]) ? "" : fmt(grad[i]);
    csv.push_back(row);
  }
  const bool mass_ok = dens.mass >= 0.98 && dens.mass <= 1.02;
  return make_report(cfg, std::move(results), std::move(csv), mass_ok ? 0 : 2,
                     std::string(mass_ok ? "PASS" : "FAIL") +
                         " density: KDE mass = " + fmt(dens.mass));
}

Report run_moments(const RunConfig& cfg) {
  const BernsteinSpec spec = parse_bernstein(cfg.sub);
  const auto* st = std::get_if<StableSpec>(&spec);
  if (!st) throw ConfigurationError("moments command expects a stable spec");
  const double rho = st->rho;
  const std::size_t n = cfg.paths;

  ordered_json results = ordered_json::array();
  std::vector<std::string> csv{"name,mean,stderr,n,z"};
  bool all_ok = true;

  // Laplace transform oracle at a few lambdas.
  {
    std::vector<double> lams{0.5, 1.0, 2.0};
    RngStream rng(cfg.seed, purpose::kMoments, 0);
    std::vector<std::vector<double>> vals(lams.size());
    for (auto& vcol : vals) vcol.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sample_total(spec, cfg.T, rng);
      for (std::size_t l = 0; l < lams.size(); ++l)
        vals[l].push_back(std::exp(-lams[l] * x));
    }
    for (std::size_t l = 0; l < lams.size(); ++l) {
      const MCEstimate est = summarize(vals[l]);
      const double target = std::exp(-cfg.T * std::pow(lams[l], rho));
      const double z = (est.mean - target) / est.std_error;
      ordered_json entry;
      entry["name"] = "laplace:lambda=" + fmt(lams[l]);
      entry["estimate"] = estimate_json(est);
      entry["target"] = target;
      entry["z"] = z;
      results.push_back(entry);
      csv.push_back(csv_row({"laplace:lambda=" + fmt(lams[l]), fmt(est.mean),
                             fmt(est.std_error), std::to_string(est.n), fmt(z)}));
      all_ok = all_ok && std::abs(z) < 4.0;
    }
  }

  // Negative half moment vs the Gamma formula.
  {
    RngStream rng(cfg.seed, purpose::kMoments, 1);
    std::vector<double> vals(n);
    for (auto& x : vals)
      x = std::pow(sample_total(spec, cfg.T, rng), -0.5);
    const MCEstimate est = summarize(vals);
    const double target = neg_moment_stable(rho, 0.5, cfg.T);
    const double z = (est.mean - target) / est.std_error;
    ordered_json entry;
    entry["name"] = "neg_half_moment";
    entry["estimate"] = estimate_json(est);
    entry["target"] = target;
    entry["z"] = z;
    results.push_back(entry);
    csv.push_back(csv_row({"neg_half_moment", fmt(est.mean), fmt(est.std_error),
                           std::to_string(est.n), fmt(z)}));
    all_ok = all_ok && std::abs(z) < 3.0;
  }

  // Exponential inverse moment (finite only for rho > 1/2 at lambda > 0).
  {
    const double lam = rho > 0.5 ? 0.1 : 0.0;
    RngStream rng(cfg.seed, purpose::kMoments, 2);
    const MCEstimate est =
        exp_inverse_moment_mc(spec, cfg.T, lam, n, rng, cfg.strict);
    ordered_json entry;
    entry["name"] = "exp_inverse_moment:lambda=" + fmt(lam);
    entry["estimate"] = estimate_json(est);
    entry["max_share"] = est.max_share;
    results.push_back(entry);
    csv.push_back(csv_row({"exp_inverse_moment:lambda=" + fmt(lam),
                           fmt(est.mean), fmt(est.std_error),
                           std::to_string(est.n), ""}));
  }

  return make_report(cfg, std::move(results), std::move(csv), all_ok ? 0 : 2,
                     std::string(all_ok ? "PASS" : "FAIL") +
                         " moments: stable oracles vs Monte Carlo");
}

}  // namespace

nlohmann::ordered_json RunConfig::echo() const {
  ordered_json j;
  j["model"] = model;
  j["d"] = d;
  j["model_params"] = model_params;
  j["sub"] = sub;
  j["T"] = T;
  j["n"] = n;
  j["paths"] = paths;
  j["seed"] = seed;
  j["x0"] = x0;
  j["v"] = v;
  j["a"] = a;
  j["f"] = f;
  j["p"] = p;
  j["delta"] = delta;
  j["eps_list"] = eps_list;
  j["t_grid"] = t_grid;
  j["rho"] = rho;
  j["ablate_term2"] = ablate_term2;
  j["strict"] = strict;
  j["bandwidth"] = bandwidth;
  j["grid_points"] = grid_points;
  return j;
}

VectorXd parse_vector(const std::string& text, int d) {
  std::vector<double> vals = parse_double_list(text);
  VectorXd out(d);
  if (vals.size() == 1) {
    out.setConstant(vals[0]);
  } else if (static_cast<int>(vals.size()) == d) {
    for (int i = 0; i < d; ++i) out(i) = vals[static_cast<std::size_t>(i)];
  } else {
    throw ConfigurationError("vector '" + text + "' does not match d=" +
                             std::to_string(d));
  }
  return out;
}

std::vector<VectorXd> parse_vector_list(const std::string& text, int d) {
  std::vector<VectorXd> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';'))
    if (!item.empty()) out.push_back(parse_vector(item, d));
  if (out.empty()) throw ConfigurationError("empty vector list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigurationError("empty numeric list");
  return out;
}

ModelSpec build_model(const RunConfig& cfg) {
  return make_model(cfg.model, cfg.d, cfg.model_params);
}

Report run_command(const RunConfig& cfg) {
  if (!cfg.seed_set)
    throw ConfigurationError("--seed is mandatory");
  RunConfig cfg_checked = cfg;
  if (cfg.command == "verify-ibp" || cfg.command == "verify-ibp-fixed-path") {
    // Validate the model before spending paths on it.
    const ModelSpec model = build_model(cfg);
    RngStream rng(cfg.seed, purpose::kValidate, 0);
    const ValidationReport vr = validate(model, cfg.T, 200, rng);
    if (!vr.ok) throw ConfigurationError("hypothesis violation: " + vr.failure);
    return run_verify_ibp(cfg_checked);
  }
  if (cfg.command == "truncation") return run_truncation(cfg_checked);
  if (cfg.command == "bounds") return run_bounds(cfg_checked);
  if (cfg.command == "scaling") return run_scaling(cfg_checked);
  if (cfg.command == "density") return run_density(cfg_checked);
  if (cfg.command == "moments") return run_moments(cfg_checked);
  throw ConfigurationError("unknown command: " + cfg.command);
}

}  // namespace subibp
