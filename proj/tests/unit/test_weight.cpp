#include <doctest.h>

#include <cmath>

#include "subibp/weight.hpp"

using namespace subibp;

namespace {

TrajectoryBundle random_bundle(const ModelSpec& model, const BernsteinSpec& spec,
                               double T, int n, std::uint64_t seed,
                               std::shared_ptr<const GridCache> cache) {
  RngStream rng(seed, purpose::kBundles, 0);
  return simulate_random(model, spec, T, VectorXd::Zero(model.d), rng, cache);
}

}  // namespace

TEST_CASE("trivial model: M = <v, W_{S(T)}> / S(T), term2 = 0") {
  const ModelSpec model = make_model("zero", 2);
  const auto cache = GridCache::make(model, 1.0, 64);
  const auto bundle = random_bundle(model, StableSpec{0.5}, 1.0, 64, 1, cache);
  VectorXd v(2);
  v << 0.7, -0.4;
  const auto wb = compute_weight(model, bundle, v);
  VectorXd w_total = VectorXd::Zero(2);
  for (int k = 0; k < 64; ++k) w_total += bundle.dW.col(k);
  CHECK(wb.term2 == 0.0);
  CHECK(wb.total ==
        doctest::Approx(v.dot(w_total) / bundle.ST).epsilon(1e-12));
}

TEST_CASE("linear drift: term2 = 0 and term1 uses e^{M t} flows") {
  const double omega = 0.8;
  const ModelSpec model = make_model("rotation", 2, {{"omega", omega}});
  const MatrixXd M = block_skew(2, omega);
  const int n = 32;
  const auto cache = GridCache::make(model, 1.0, n);
  const auto bundle = random_bundle(model, StableSpec{0.75}, 1.0, n, 2, cache);
  VectorXd v(2);
  v << 1.0, 0.25;
  const auto wb = compute_weight(model, bundle, v);
  CHECK(wb.term2 == 0.0);

  // independent evaluation of the pathwise sum with closed-form flows
  double expected = 0.0;
  const MatrixXd e_minus_t = matrix_exp(M, -1.0);
  for (int k = 0; k < n; ++k) {
    const double t = cache->times[static_cast<std::size_t>(k) + 1];
    const VectorXd integrand = matrix_exp(M, t) * (e_minus_t * v);
    expected += integrand.dot(bundle.dW.col(k));
  }
  expected /= bundle.ST;
  CHECK(wb.term1 == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("weight is linear in v and zero at v = 0") {
  const ModelSpec model = make_model("sine", 2, {{"eps", 0.25}});
  const auto cache = GridCache::make(model, 1.0, 48);
  const auto bundle = random_bundle(model, StableSpec{0.7}, 1.0, 48, 3, cache);
  VectorXd u(2), w(2);
  u << 1.0, -0.5;
  w << 0.3, 0.8;
  const double alpha = 1.7, beta = -2.3;
  const auto wu = compute_weight(model, bundle, u);
  const auto ww = compute_weight(model, bundle, w);
  const auto wc = compute_weight(model, bundle, VectorXd(alpha * u + beta * w));
  const double lin = alpha * wu.total + beta * ww.total;
  CHECK(std::abs(wc.total - lin) <=
        1e-10 * std::max(1.0, std::abs(lin)));
  CHECK(wc.term1 + wc.term2 == wc.total);

  const auto wz = compute_weight(model, bundle, VectorXd::Zero(2));
  CHECK(wz.total == 0.0);
  CHECK(wz.term1 == 0.0);
  CHECK(wz.term2 == 0.0);
}

TEST_CASE("literal evaluation: term2 vanishes identically for linear drift") {
  const ModelSpec model = make_model("ou", 2, {{"kappa", 1.2}});
  const auto cache = GridCache::make(model, 1.0, 24);
  const auto bundle = random_bundle(model, StableSpec{0.7}, 1.0, 24, 4, cache);
  VectorXd v(2);
  v << 0.5, 0.5;
  const auto lit = compute_weight_literal(model, bundle, v);
  CHECK(lit.term2 == 0.0);
}

TEST_CASE("trace-simplified term2 matches the literal double integral") {
  VectorXd v(2);
  v << 1.0, -0.6;

  SUBCASE("A = 0") {
    const ModelSpec model = make_model("sine", 2, {{"eps", 0.2}});
    const auto cache = GridCache::make(model, 1.0, 64);
    for (int rep = 0; rep < 10; ++rep) {
      const auto bundle = random_bundle(model, StableSpec{0.7}, 1.0, 64,
                                        10 + static_cast<std::uint64_t>(rep),
                                        cache);
      const auto fast = compute_weight(model, bundle, v);
      const auto lit = compute_weight_literal(model, bundle, v);
      CHECK(std::abs(fast.term2 - lit.term2) <=
            1e-9 * std::max(1.0, std::abs(lit.term2)));
      CHECK(std::abs(fast.term1 - lit.term1) <=
            1e-9 * std::max(1.0, std::abs(lit.term1)));
    }
  }

  SUBCASE("A != 0 exercises the Jt = e^{At} J cancellation") {
    const ModelSpec model = make_model(
        "sine", 2, {{"eps", 0.2}, {"a_decay", 0.5}, {"a_skew", 0.3}});
    const auto cache = GridCache::make(model, 1.0, 64);
    for (int rep = 0; rep < 10; ++rep) {
      const auto bundle = random_bundle(model, StableSpec{0.7}, 1.0, 64,
                                        20 + static_cast<std::uint64_t>(rep),
                                        cache);
      const auto fast = compute_weight(model, bundle, v);
      const auto lit = compute_weight_literal(model, bundle, v);
      CHECK(std::abs(fast.term2 - lit.term2) <=
            1e-9 * std::max(1.0, std::abs(lit.term2)));
      CHECK(std::abs(fast.term1 - lit.term1) <=
            1e-9 * std::max(1.0, std::abs(lit.term1)));
    }
  }
}

TEST_CASE("pathwise trace correction obeys the closed-form envelope") {
  const ModelSpec model = make_model("sine", 1, {{"eps", 0.3}});
  const auto cache = GridCache::make(model, 1.0, 64);
  VectorXd v = VectorXd::Ones(1);
  const double envelope = 1.0 * model.lambda1 * model.lambda2 * model.K2 *
                          std::exp(3.0 * model.K1) * v.norm() * model.d;
  for (int rep = 0; rep < 50; ++rep) {
    const auto bundle = random_bundle(model, StableSpec{0.75}, 1.0, 64,
                                      40 + static_cast<std::uint64_t>(rep),
                                      cache);
    const auto wb = compute_weight(model, bundle, v);
    CHECK(std::abs(wb.term2) <= envelope);
  }
}

TEST_CASE("weight_moment_bound closed forms") {
  // K1 = K2 = 0: bound reduces to |v| E S(T)^{-1/2}
  const ModelSpec zero = make_model("zero", 2);
  VectorXd v(2);
  v << 3.0, 4.0;  // |v| = 5
  CHECK(weight_moment_bound(zero, 1.0, v, StableSpec{0.5}) ==
        doctest::Approx(5.0 * neg_moment_stable(0.5, 0.5, 1.0)).epsilon(1e-12));

  // deterministic S(T) = T
  const ModelSpec sine = make_model("sine", 1, {{"eps", 0.2}});
  VectorXd v1 = VectorXd::Ones(1);
  const double T = 2.0;
  const double beta =
      1.0 * T * 1.0 * 1.0 * 0.2 * std::exp(3.0 * T * 1.2);
  const double expected = std::exp(T * 1.2) / std::sqrt(T) + beta;
  CHECK(weight_moment_bound(sine, T, v1, DriftOnlySpec{1.0}) ==
        doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(
      weight_moment_bound(zero, 1.0, v, CompoundPoissonSpec{2.0, 1.0}),
      std::domain_error);
}

TEST_CASE("empirical E|M| stays under the integrability bound") {
  const ModelSpec model = make_model("sine", 1, {{"eps", 0.2}});
  const double T = 1.0;
  const BernsteinSpec spec = StableSpec{0.75};
  VectorXd v = VectorXd::Ones(1);
  const double bound = weight_moment_bound(model, T, v, spec);
  const auto cache = GridCache::make(model, T, 64);
  const int n_paths = 10000;
  double acc = 0.0, acc2 = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    RngStream rng(71, purpose::kPaths, static_cast<std::uint64_t>(p));
    const auto bundle =
        simulate_random(model, spec, T, VectorXd::Zero(1), rng, cache);
    const double m = std::abs(compute_weight(model, bundle, v).total);
    acc += m;
    acc2 += m * m;
  }
  const double mean = acc / n_paths;
  const double se =
      std::sqrt((acc2 / n_paths - mean * mean) / n_paths);
  CHECK(mean - 3.0 * se <= bound);
}

TEST_CASE("degenerate path is rejected") {
  const ModelSpec model = make_model("zero", 1);
  const auto cache = GridCache::make(model, 1.0, 8);
  RngStream dummy(0, 0, 0);
  SubordinatorPath flat = sample_path(FixedPathSpec{{{0.5, 1.0}}}, 1.0, 8, dummy);
  const auto zeroed = truncate_jumps(flat, 2.0);  // removes the only jump
  const auto bundle =
      simulate(model, zeroed, MatrixXd::Zero(1, 8), VectorXd::Zero(1), cache);
  VectorXd v = VectorXd::Ones(1);
  CHECK_THROWS_AS(compute_weight(model, bundle, v), DegeneratePathError);
  CHECK_THROWS_AS(compute_weight_literal(model, bundle, v), DegeneratePathError);
}
