#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "subibp/model.hpp"

using namespace subibp;

namespace {

MatrixXd random_matrix(int d, double scale, RngStream& rng) {
  MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("matrix_exp basics") {
  CHECK(matrix_exp(MatrixXd::Zero(3, 3), 1.0).isIdentity(1e-15));

  MatrixXd diag = MatrixXd::Zero(2, 2);
  diag(0, 0) = -1.0;
  diag(1, 1) = -2.0;
  const MatrixXd e = matrix_exp(diag, 1.0);
  CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
  CHECK(std::abs(e(0, 1)) < 1e-15);

  // quarter-turn rotation generator
  MatrixXd rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  const MatrixXd q = matrix_exp(rot, std::numbers::pi / 2.0);
  CHECK(q(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(q(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("matrix_exp closed form matches Pade reference in 2d") {
  RngStream rng(3, 0, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXd a = random_matrix(2, 1.5, rng);
    const MatrixXd ours = matrix_exp(a, 1.0);
    const MatrixXd ref = a.exp();
    CHECK((ours - ref).norm() < 1e-11 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("matrix_exp satisfies the semigroup law") {
  RngStream rng(5, 0, 0);
  for (int d : {1, 2, 4}) {
    for (int rep = 0; rep < 20; ++rep) {
      MatrixXd a = random_matrix(d, 1.0, rng);
      const double nrm = spectral_norm(a);
      if (nrm > 2.0) a *= 2.0 / nrm;
      const double s = 2.0 * rng.uniform();
      const double t = 2.0 * rng.uniform();
      const MatrixXd lhs = matrix_exp(a, s + t);
      const MatrixXd rhs = matrix_exp(a, s) * matrix_exp(a, t);
      CHECK((lhs - rhs).norm() < 1e-9);
    }
  }
}

TEST_CASE("contraction generators give contractive semigroups") {
  RngStream rng(7, 0, 0);
  for (int rep = 0; rep < 25; ++rep) {
    MatrixXd a = random_matrix(3, 1.0, rng);
    a = a - (log_norm(a) + 0.1) * MatrixXd::Identity(3, 3);
    REQUIRE(log_norm(a) <= 0.0);
    for (double t : {0.1, 0.5, 1.0, 2.0})
      CHECK(spectral_norm(matrix_exp(a, t)) <= 1.0 + 1e-9);
  }
}

TEST_CASE("field_B with A = 0 is the drift Jacobian") {
  const ModelSpec model = make_model("sine", 2, {{"eps", 0.3}});
  RngStream rng(9, 0, 0);
  MatrixXd b(2, 2), jac(2, 2);
  for (int rep = 0; rep < 20; ++rep) {
    VectorXd x(2);
    x << 3.0 * rng.normal(), 3.0 * rng.normal();
    field_B(model, 0.7, x, b);
    model.drift_jacobian(0.7, x, jac);
    CHECK((b - jac).norm() == 0.0);
  }
}

TEST_CASE("field_B is a similarity transform: trace and det preserved") {
  ModelSpec model = make_model("sine", 2, {{"eps", 0.25},
                                           {"a_decay", 0.5},
                                           {"a_skew", 0.3}});
  RngStream rng(11, 0, 0);
  MatrixXd b(2, 2), jac(2, 2);
  for (int rep = 0; rep < 20; ++rep) {
    VectorXd x(2);
    x << rng.normal(), rng.normal();
    const double t = rng.uniform();
    field_B(model, t, x, b);
    model.drift_jacobian(t, x, jac);
    CHECK(b.trace() == doctest::Approx(jac.trace()).epsilon(1e-10));
    CHECK(b.determinant() == doctest::Approx(jac.determinant()).epsilon(1e-9));
  }

  // diagonal A commuting with the diagonal Jacobian leaves B unchanged
  ModelSpec diag_a = make_model("sine", 2, {{"eps", 0.25}, {"a_decay", 0.4}});
  VectorXd x(2);
  x << 0.3, -1.2;
  field_B(diag_a, 0.5, x, b);
  diag_a.drift_jacobian(0.5, x, jac);
  CHECK((b - jac).norm() < 1e-12);
}

TEST_CASE("directional_dB: linear drift has zero second derivative") {
  const ModelSpec model = make_model("rotation", 2, {{"omega", 0.8}});
  MatrixXd out(2, 2);
  VectorXd x(2), u(2);
  x << 1.0, -2.0;
  u << 0.5, 0.5;
  directional_dB(model, 0.3, x, u, out);
  CHECK(out.norm() == 0.0);
}

TEST_CASE("directional_dB: finite difference matches the analytic value") {
  // d = 1, drift b(x) = sin x, so (grad_u grad b)(x) = -sin(x) u
  ModelSpec model;
  model.d = 1;
  model.A = MatrixXd::Zero(1, 1);
  model.a_is_zero = true;
  model.drift = [](double, const VectorXd& x, VectorXd& out) {
    out.resize(1);
    out(0) = std::sin(x(0));
  };
  model.drift_jacobian = [](double, const VectorXd& x, MatrixXd& out) {
    out.resize(1, 1);
    out(0, 0) = std::cos(x(0));
  };
  model.sigma = [](double) { return MatrixXd::Identity(1, 1); };
  model.sigma_inverse = [](double) { return MatrixXd::Identity(1, 1); };

  MatrixXd out(1, 1);
  VectorXd u = VectorXd::Ones(1);
  for (double x0 : {0.0, 0.4, std::numbers::pi / 2.0, 2.0}) {
    VectorXd x = VectorXd::Constant(1, x0);
    directional_dB(model, 0.0, x, u, out);
    CHECK(out(0, 0) == doctest::Approx(-std::sin(x0)).epsilon(1e-7));
  }
}

TEST_CASE("directional_dB: finite difference vs closed form on sine model") {
  ModelSpec with_second = make_model("sine", 2, {{"eps", 0.2}});
  ModelSpec without = with_second;
  without.drift_second = nullptr;
  RngStream rng(13, 0, 0);
  MatrixXd a(2, 2), b(2, 2);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    VectorXd x(2), u(2);
    x << 4.0 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5);
    u << rng.normal(), rng.normal();
    directional_dB(with_second, 0.2, x, u, a);
    directional_dB(without, 0.2, x, u, b);
    worst = std::max(worst, (a - b).norm());
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("directional_dB is linear in u") {
  const ModelSpec model = make_model("sine", 2, {{"eps", 0.35}});
  RngStream rng(15, 0, 0);
  MatrixXd du(2, 2), d2u(2, 2), dw(2, 2), duw(2, 2);
  for (int rep = 0; rep < 20; ++rep) {
    VectorXd x(2), u(2), w(2);
    x << rng.normal(), rng.normal();
    u << rng.normal(), rng.normal();
    w << rng.normal(), rng.normal();
    directional_dB(model, 0.1, x, u, du);
    directional_dB(model, 0.1, x, VectorXd(2.0 * u), d2u);
    directional_dB(model, 0.1, x, w, dw);
    directional_dB(model, 0.1, x, VectorXd(u + w), duw);
    CHECK((d2u - 2.0 * du).norm() < 1e-7);
    CHECK((duw - du - dw).norm() < 1e-7);
  }
}

TEST_CASE("validate accepts the trivial model with zero ratios") {
  const ModelSpec model = make_model("zero", 2);
  RngStream rng(17, purpose::kValidate, 0);
  const auto rep = validate(model, 1.0, 100, rng);
  CHECK(rep.ok);
  CHECK(rep.worst_b_ratio == 0.0);
  CHECK(rep.worst_db_ratio == 0.0);
  CHECK(rep.worst_sigma_ratio == doctest::Approx(1.0));
}

TEST_CASE("validate catches an understated K1") {
  ModelSpec model = make_model("ou", 1, {{"kappa", 2.0}});
  model.K1 = 1.0;  // true sup ||B|| is 2
  RngStream rng(19, purpose::kValidate, 0);
  const auto rep = validate(model, 1.0, 50, rng);
  CHECK(!rep.ok);
  CHECK(rep.failure.find("K1") != std::string::npos);
}

TEST_CASE("validate catches a non-contractive A") {
  ModelSpec model = make_model("zero", 2);
  model.A = MatrixXd::Zero(2, 2);
  model.A(0, 0) = 1.0;
  model.A(1, 1) = -1.0;
  model.a_is_zero = false;
  RngStream rng(21, purpose::kValidate, 0);
  const auto rep = validate(model, 1.0, 10, rng);
  CHECK(!rep.ok);
  CHECK(rep.contraction_margin > 0.0);
}

TEST_CASE("catalog rejects unknown names and bad dimensions") {
  CHECK_THROWS(make_model("pendulum", 2));
  CHECK_THROWS(make_model("zero", 0));
  CHECK_THROWS(make_model("sine", 2, {{"eps", -0.1}}));
}

TEST_CASE("catalog constants are honest sups (spot-checked)") {
  for (const auto& name : {"zero", "ou", "rotation", "sine"}) {
    for (const auto& params :
         std::vector<std::map<std::string, double>>{
             {},
             {{"a_decay", 0.5}, {"a_skew", 0.3}}}) {
      const ModelSpec model = make_model(name, 2, params);
      RngStream rng(23, purpose::kValidate, 0);
      const auto rep = validate(model, 1.0, 300, rng);
      CHECK_MESSAGE(rep.ok, name, ": ", rep.failure);
    }
  }
}
