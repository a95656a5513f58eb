#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "subibp/mc_stats.hpp"
#include "subibp/rng.hpp"

namespace subibp {

// One-sided stable subordinator with Laplace exponent r^rho, rho in (0, 1).
// An alpha-stable-like driving noise corresponds to rho = alpha / 2.
struct StableSpec {
  double rho;
};

// Compound Poisson subordinator: jumps arrive at `rate` per unit time with
// Exponential(mean = jump_mean) sizes.
struct CompoundPoissonSpec {
  double rate;
  double jump_mean;
};

// Deterministic pure-jump path given by finitely many (time, size) jumps with
// strictly increasing times and strictly positive sizes.
struct FixedPathSpec {
  std::vector<std::pair<double, double>> jumps;
};

// Deterministic S(t) = slope * t.
struct DriftOnlySpec {
  double slope;
};

using BernsteinSpec =
    std::variant<StableSpec, CompoundPoissonSpec, FixedPathSpec, DriftOnlySpec>;

// One realized nondecreasing path on a uniform grid. values[i] = S(grid[i]),
// increments[i] = values[i + 1] - values[i] covers the cell
// (grid[i], grid[i + 1]]. jump_list is populated for pure-jump paths.
struct SubordinatorPath {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> increments;
  std::optional<std::vector<std::pair<double, double>>> jump_list;

  double total() const { return values.empty() ? 0.0 : values.back(); }
  int cells() const { return static_cast<int>(increments.size()); }
};

// Standard positive rho-stable draw (Kanter's representation) with
// E exp(-lambda X) = exp(-lambda^rho).
double sample_stable_positive(double rho, RngStream& rng);

// One draw of S(T).
double sample_total(const BernsteinSpec& spec, double T, RngStream& rng);

// Realize a path on the uniform grid t_i = i T / n.
SubordinatorPath sample_path(const BernsteinSpec& spec, double T, int n,
                             RngStream& rng);

// Keep only jumps of size >= eps; requires an explicit jump list.
SubordinatorPath truncate_jumps(const SubordinatorPath& path, double eps);

// E S(t)^{-s} = t^{-s/rho} Gamma(s/rho) / (rho Gamma(s)) for the stable case.
double neg_moment_stable(double rho, double s, double t);

// Analytic E S(T)^{-s} where available (stable, drift-only, fixed path).
// Throws for specs with an atom at zero (compound Poisson).
double neg_moment(const BernsteinSpec& spec, double s, double T);

// Monte Carlo estimate of E exp(lambda / S(T)). Flags the estimate unstable
// when one sample carries more than 10% of the mean. For Stable(rho) with
// rho <= 1/2 and lambda > 0 the moment is infinite; strict mode throws,
// otherwise the estimate is flagged.
MCEstimate exp_inverse_moment_mc(const BernsteinSpec& spec, double T,
                                 double lambda, std::size_t n_samples,
                                 RngStream& rng, bool strict = false);

// E exp(lambda / S(T)) for deterministic specs, in closed form.
std::optional<double> exp_inverse_moment_exact(const BernsteinSpec& spec,
                                               double T, double lambda);

// True when P(S(T) = 0) > 0 (compound Poisson, zero-slope drift, empty path).
bool has_zero_atom(const BernsteinSpec& spec, double T);

std::string describe(const BernsteinSpec& spec);

// Parse "stable:0.75", "cpoisson:3,0.5", "driftonly:1",
// "fixed:0.25:1.0,0.5:2.0" (time:size pairs).
BernsteinSpec parse_bernstein(const std::string& text);

}  // namespace subibp
