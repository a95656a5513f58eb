#include "subibp/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace subibp {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void validate_jumps(const std::vector<std::pair<double, double>>& jumps) {
  double prev = 0.0;
  bool first = true;
  for (const auto& [t, s] : jumps) {
    require(t > 0.0, "fixed path: jump times must be positive");
    require(first || t > prev, "fixed path: jump times must be strictly increasing");
    require(s > 0.0, "fixed path: jump sizes must be strictly positive");
    prev = t;
    first = false;
  }
}

std::vector<double> uniform_grid(double T, int n) {
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) grid[static_cast<std::size_t>(i)] = T * i / n;
  return grid;
}

// Evaluate a pure-jump path on a grid: S(t) = sum of sizes with time <= t.
SubordinatorPath jumps_to_path(std::vector<std::pair<double, double>> jumps,
                               std::vector<double> grid) {
  SubordinatorPath path;
  path.grid = std::move(grid);
  path.values.resize(path.grid.size());
  std::size_t j = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < path.grid.size(); ++i) {
    while (j < jumps.size() && jumps[j].first <= path.grid[i]) {
      acc += jumps[j].second;
      ++j;
    }
    path.values[i] = acc;
  }
  path.increments.resize(path.grid.size() - 1);
  for (std::size_t i = 0; i + 1 < path.grid.size(); ++i)
    path.increments[i] = path.values[i + 1] - path.values[i];
  path.jump_list = std::move(jumps);
  return path;
}

}  // namespace

double sample_stable_positive(double rho, RngStream& rng) {
  require(rho > 0.0 && rho < 1.0, "stable index rho must lie in (0, 1)");
  const double u = kPi * rng.uniform_open();
  const double e = rng.exponential();
  const double c = (1.0 - rho) / rho;
  // Kanter: sin(rho u) sin((1-rho) u)^c / sin(u)^{1/rho} * E^{-c}, u = pi U.
  const double log_x = std::log(std::sin(rho * u)) +
                       c * std::log(std::sin((1.0 - rho) * u)) -
                       (1.0 / rho) * std::log(std::sin(u)) - c * std::log(e);
  return std::exp(log_x);
}

double sample_total(const BernsteinSpec& spec, double T, RngStream& rng) {
  require(T > 0.0, "T must be positive");
  return std::visit(
      [&](const auto& s) -> double {
        using V = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<V, StableSpec>) {
          // S(T) ~ T^{1/rho} S(1) by self-similarity.
          return std::pow(T, 1.0 / s.rho) * sample_stable_positive(s.rho, rng);
        } else if constexpr (std::is_same_v<V, CompoundPoissonSpec>) {
          require(s.rate > 0.0 && s.jump_mean > 0.0,
                  "compound Poisson parameters must be positive");
          double total = 0.0;
          double t = rng.exponential() / s.rate;
          while (t <= T) {
            total += s.jump_mean * rng.exponential();
            t += rng.exponential() / s.rate;
          }
          return total;
        } else if constexpr (std::is_same_v<V, FixedPathSpec>) {
          double total = 0.0;
          for (const auto& [tj, sj] : s.jumps)
            if (tj <= T) total += sj;
          return total;
        } else {
          require(s.slope >= 0.0, "drift slope must be nonnegative");
          return s.slope * T;
        }
      },
      spec);
}

SubordinatorPath sample_path(const BernsteinSpec& spec, double T, int n,
                             RngStream& rng) {
  require(T > 0.0, "T must be positive");
  require(n >= 1, "grid size must be at least 1");
  const double dt = T / n;

  return std::visit(
      [&](const auto& s) -> SubordinatorPath {
        using V = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<V, StableSpec>) {
          SubordinatorPath path;
          path.grid = uniform_grid(T, n);
          path.increments.resize(static_cast<std::size_t>(n));
          const double cell_scale = std::pow(dt, 1.0 / s.rho);
          for (int i = 0; i < n; ++i)
            path.increments[static_cast<std::size_t>(i)] =
                cell_scale * sample_stable_positive(s.rho, rng);
          path.values.resize(static_cast<std::size_t>(n) + 1);
          path.values[0] = 0.0;
          for (int i = 0; i < n; ++i)
            path.values[static_cast<std::size_t>(i) + 1] =
                path.values[static_cast<std::size_t>(i)] +
                path.increments[static_cast<std::size_t>(i)];
          // increments must equal value differences bit-exactly
          for (int i = 0; i < n; ++i)
            path.increments[static_cast<std::size_t>(i)] =
                path.values[static_cast<std::size_t>(i) + 1] -
                path.values[static_cast<std::size_t>(i)];
          return path;
        } else if constexpr (std::is_same_v<V, CompoundPoissonSpec>) {
          require(s.rate > 0.0 && s.jump_mean > 0.0,
                  "compound Poisson parameters must be positive");
          std::vector<std::pair<double, double>> jumps;
          double t = rng.exponential() / s.rate;
          while (t <= T) {
            jumps.emplace_back(t, s.jump_mean * rng.exponential());
            t += rng.exponential() / s.rate;
          }
          return jumps_to_path(std::move(jumps), uniform_grid(T, n));
        } else if constexpr (std::is_same_v<V, FixedPathSpec>) {
          validate_jumps(s.jumps);
          return jumps_to_path(s.jumps, uniform_grid(T, n));
        } else {
          require(s.slope >= 0.0, "drift slope must be nonnegative");
          SubordinatorPath path;
          path.grid = uniform_grid(T, n);
          path.values.resize(static_cast<std::size_t>(n) + 1);
          for (int i = 0; i <= n; ++i)
            path.values[static_cast<std::size_t>(i)] =
                s.slope * path.grid[static_cast<std::size_t>(i)];
          path.increments.resize(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i)
            path.increments[static_cast<std::size_t>(i)] =
                path.values[static_cast<std::size_t>(i) + 1] -
                path.values[static_cast<std::size_t>(i)];
          return path;
        }
      },
      spec);
}

SubordinatorPath truncate_jumps(const SubordinatorPath& path, double eps) {
  require(eps > 0.0, "truncation level eps must be positive");
  require(path.jump_list.has_value(),
          "truncate_jumps requires an explicit jump list");
  std::vector<std::pair<double, double>> kept;
  for (const auto& [t, s] : *path.jump_list)
    if (s >= eps) kept.emplace_back(t, s);
  return jumps_to_path(std::move(kept), path.grid);
}

double neg_moment_stable(double rho, double s, double t) {
  require(rho > 0.0 && rho < 1.0, "stable index rho must lie in (0, 1)");
  require(s > 0.0, "moment order s must be positive");
  require(t > 0.0, "time t must be positive");
  return std::exp(std::lgamma(s / rho) - std::lgamma(s) -
                  (s / rho) * std::log(t)) /
         rho;
}

double neg_moment(const BernsteinSpec& spec, double s, double T) {
  return std::visit(
      [&](const auto& sp) -> double {
        using V = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<V, StableSpec>) {
          return neg_moment_stable(sp.rho, s, T);
        } else if constexpr (std::is_same_v<V, CompoundPoissonSpec>) {
          throw std::domain_error(
              "E S(T)^{-s} is infinite for compound Poisson: atom at zero");
        } else {
          RngStream unused(0, 0, 0);
          const double st = sample_total(spec, T, unused);
          if (st <= 0.0)
            throw std::domain_error("deterministic path has S(T) = 0");
          return std::pow(st, -s);
        }
      },
      spec);
}

MCEstimate exp_inverse_moment_mc(const BernsteinSpec& spec, double T,
                                 double lambda, std::size_t n_samples,
                                 RngStream& rng, bool strict) {
  require(lambda >= 0.0, "lambda must be nonnegative");
  require(n_samples >= 2, "need at least 2 samples");
  bool divergent = false;
  if (const auto* st = std::get_if<StableSpec>(&spec);
      st && st->rho <= 0.5 && lambda > 0.0) {
    if (strict)
      throw std::domain_error(
          "E exp(lambda/S(T)) diverges for stable rho <= 1/2");
    divergent = true;
  }
  std::vector<double> xs(n_samples);
  for (auto& x : xs) {
    const double s = sample_total(spec, T, rng);
    x = (lambda == 0.0) ? 1.0 : std::exp(lambda / s);
  }
  MCEstimate est = summarize(xs);
  est.unstable = est.unstable || divergent;
  return est;
}

std::optional<double> exp_inverse_moment_exact(const BernsteinSpec& spec,
                                               double T, double lambda) {
  const auto* drift = std::get_if<DriftOnlySpec>(&spec);
  const auto* fixed = std::get_if<FixedPathSpec>(&spec);
  if (!drift && !fixed) return std::nullopt;
  RngStream unused(0, 0, 0);
  const double st = sample_total(spec, T, unused);
  if (st <= 0.0) return std::nullopt;
  return std::exp(lambda / st);
}

bool has_zero_atom(const BernsteinSpec& spec, double T) {
  return std::visit(
      [&](const auto& s) -> bool {
        using V = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<V, StableSpec>) {
          return false;
        } else if constexpr (std::is_same_v<V, CompoundPoissonSpec>) {
          return true;
        } else if constexpr (std::is_same_v<V, FixedPathSpec>) {
          double total = 0.0;
          for (const auto& [t, sz] : s.jumps)
            if (t <= T) total += sz;
          return total <= 0.0;
        } else {
          return s.slope <= 0.0;
        }
      },
      spec);
}

std::string describe(const BernsteinSpec& spec) {
  std::ostringstream out;
  std::visit(
      [&](const auto& s) {
        using V = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<V, StableSpec>) {
          out << "stable:" << s.rho;
        } else if constexpr (std::is_same_v<V, CompoundPoissonSpec>) {
          out << "cpoisson:" << s.rate << "," << s.jump_mean;
        } else if constexpr (std::is_same_v<V, FixedPathSpec>) {
          out << "fixed:";
          for (std::size_t i = 0; i < s.jumps.size(); ++i) {
            if (i) out << ",";
            out << s.jumps[i].first << ":" << s.jumps[i].second;
          }
        } else {
          out << "driftonly:" << s.slope;
        }
      },
      spec);
  return out.str();
}

BernsteinSpec parse_bernstein(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string() : text.substr(colon + 1);
  auto parse_num = [](const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
    return v;
  };
  if (kind == "stable") {
    const double rho = parse_num(args);
    require(rho > 0.0 && rho < 1.0, "stable index rho must lie in (0, 1)");
    return StableSpec{rho};
  }
  if (kind == "cpoisson") {
    const auto comma = args.find(',');
    require(comma != std::string::npos, "cpoisson needs rate,jump_mean");
    return CompoundPoissonSpec{parse_num(args.substr(0, comma)),
                               parse_num(args.substr(comma + 1))};
  }
  if (kind == "driftonly") {
    return DriftOnlySpec{parse_num(args)};
  }
  if (kind == "fixed") {
    FixedPathSpec fp;
    std::istringstream in(args);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto c = item.find(':');
      require(c != std::string::npos, "fixed path entries are time:size");
      fp.jumps.emplace_back(parse_num(item.substr(0, c)),
                            parse_num(item.substr(c + 1)));
    }
    validate_jumps(fp.jumps);
    require(!fp.jumps.empty(), "fixed path needs at least one jump");
    return fp;
  }
  throw std::invalid_argument("unknown subordinator spec: " + text);
}

}  // namespace subibp
