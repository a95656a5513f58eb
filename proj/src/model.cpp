#include "subibp/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace subibp {

namespace {

void conjugate_by_semigroup(const ModelSpec& model, double t, MatrixXd& inout) {
  if (model.a_is_zero || t == 0.0) return;
  const MatrixXd e = matrix_exp(model.A, t);
  const MatrixXd einv = matrix_exp(model.A, -t);
  inout = einv * inout * e;
}

}  // namespace

void field_B(const ModelSpec& model, double t, const VectorXd& x,
             MatrixXd& out) {
  model.drift_jacobian(t, x, out);
  conjugate_by_semigroup(model, t, out);
}

void directional_dB(const ModelSpec& model, double t, const VectorXd& x,
                    const VectorXd& u, MatrixXd& out) {
  if (model.drift_second) {
    model.drift_second(t, x, u, out);
  } else {
    const double unorm = u.norm();
    if (unorm == 0.0) {
      out = MatrixXd::Zero(model.d, model.d);
      return;
    }
    const double h =
        1e-5 * std::max(1.0, x.norm()) / std::max(1.0, unorm);
    MatrixXd plus(model.d, model.d), minus(model.d, model.d);
    model.drift_jacobian(t, x + h * u, plus);
    model.drift_jacobian(t, x - h * u, minus);
    out = (plus - minus) / (2.0 * h);
  }
  conjugate_by_semigroup(model, t, out);
}

ValidationReport validate(const ModelSpec& model, double T, int spot_checks,
                          RngStream& rng, double radius) {
  ValidationReport rep;
  constexpr double kTol = 1e-9;

  auto fail = [&](const std::string& what) {
    rep.ok = false;
    rep.failure = what;
  };

  rep.contraction_margin = model.d > 0 ? log_norm(model.A) : 0.0;
  if (rep.contraction_margin > kTol) {
    fail("A is not a contraction generator: symmetric part has eigenvalue " +
         std::to_string(rep.contraction_margin));
    return rep;
  }

  VectorXd x(model.d), u(model.d), b(model.d);
  MatrixXd m(model.d, model.d);
  for (int k = 0; k < spot_checks && rep.ok; ++k) {
    const double t = T * rng.uniform();
    for (int i = 0; i < model.d; ++i) x(i) = radius * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < model.d; ++i) u(i) = rng.normal();
    if (u.norm() == 0.0) u(0) = 1.0;
    u /= u.norm();

    const MatrixXd sig = model.sigma(t);
    const MatrixXd sig_inv = model.sigma_inverse(t);
    const double inv_err =
        (sig * sig_inv - MatrixXd::Identity(model.d, model.d)).norm();
    rep.worst_sigma_inverse_err = std::max(rep.worst_sigma_inverse_err, inv_err);
    if (inv_err > 1e-10) {
      fail("sigma_t * sigma_t^{-1} deviates from identity by " +
           std::to_string(inv_err) + " at t=" + std::to_string(t));
      break;
    }
    const double sr = spectral_norm(sig) / model.lambda1;
    const double sir = spectral_norm(sig_inv) / model.lambda2;
    rep.worst_sigma_ratio = std::max(rep.worst_sigma_ratio, sr);
    rep.worst_sigma_inv_ratio = std::max(rep.worst_sigma_inv_ratio, sir);
    if (sr > 1.0 + kTol) {
      fail("||sigma_t|| exceeds lambda1 at t=" + std::to_string(t));
      break;
    }
    if (sir > 1.0 + kTol) {
      fail("||sigma_t^{-1}|| exceeds lambda2 at t=" + std::to_string(t));
      break;
    }

    field_B(model, t, x, m);
    const double bnorm = spectral_norm(m);
    if (model.K1 > 0.0 || bnorm > 0.0) {
      const double ratio = model.K1 > 0.0
                               ? bnorm / model.K1
                               : (bnorm > kTol ? 2.0 : 0.0);
      rep.worst_b_ratio = std::max(rep.worst_b_ratio, ratio);
      if (ratio > 1.0 + kTol) {
        std::ostringstream msg;
        msg << "||B_t(x)|| = " << bnorm << " exceeds K1 = " << model.K1
            << " at t=" << t << ", x=[" << x.transpose() << "]";
        fail(msg.str());
        break;
      }
    }

    directional_dB(model, t, x, u, m);
    const double dbnorm = spectral_norm(m);
    if (model.K2 > 0.0 || dbnorm > 0.0) {
      const double ratio = model.K2 > 0.0
                               ? dbnorm / model.K2
                               : (dbnorm > 1e-6 ? 2.0 : 0.0);
      rep.worst_db_ratio = std::max(rep.worst_db_ratio, ratio);
      if (ratio > 1.0 + 1e-6) {
        std::ostringstream msg;
        msg << "||grad_u B_t(x)|| = " << dbnorm << " exceeds K2 = " << model.K2
            << " at t=" << t << ", x=[" << x.transpose() << "]";
        fail(msg.str());
        break;
      }
    }
  }
  return rep;
}

ModelSpec make_model(const std::string& name, int d,
                     const std::map<std::string, double>& params) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  auto get = [&params](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };

  ModelSpec model;
  model.d = d;
  model.name = name;

  const double a_decay = get("a_decay", 0.0);
  const double a_skew = get("a_skew", 0.0);
  if (a_decay < 0.0)
    throw std::invalid_argument("a_decay must be nonnegative");
  model.A = -a_decay * MatrixXd::Identity(d, d) + block_skew(d, a_skew);
  model.a_is_zero = (a_decay == 0.0 && a_skew == 0.0);
  model.params["a_decay"] = a_decay;
  model.params["a_skew"] = a_skew;

  const double sigma_scale = get("sigma_scale", 1.0);
  if (sigma_scale <= 0.0)
    throw std::invalid_argument("sigma_scale must be positive");
  const MatrixXd sig = sigma_scale * MatrixXd::Identity(d, d);
  const MatrixXd sig_inv = (1.0 / sigma_scale) * MatrixXd::Identity(d, d);
  model.sigma = [sig](double) { return sig; };
  model.sigma_inverse = [sig_inv](double) { return sig_inv; };
  model.lambda1 = sigma_scale;
  model.lambda2 = 1.0 / sigma_scale;
  model.params["sigma_scale"] = sigma_scale;

  if (name == "zero") {
    model.drift = [](double, const VectorXd& x, VectorXd& out) {
      out.setZero(x.size());
    };
    model.drift_jacobian = [](double, const VectorXd& x, MatrixXd& out) {
      out.setZero(x.size(), x.size());
    };
    model.drift_second = [](double, const VectorXd& x, const VectorXd&,
                            MatrixXd& out) { out.setZero(x.size(), x.size()); };
    model.K1 = 0.0;
    model.K2 = 0.0;
    model.linear_drift = true;
  } else if (name == "ou") {
    const double kappa = get("kappa", 1.0);
    model.drift = [kappa](double, const VectorXd& x, VectorXd& out) {
      out = -kappa * x;
    };
    model.drift_jacobian = [kappa](double, const VectorXd& x, MatrixXd& out) {
      out = -kappa * MatrixXd::Identity(x.size(), x.size());
    };
    model.drift_second = [](double, const VectorXd& x, const VectorXd&,
                            MatrixXd& out) { out.setZero(x.size(), x.size()); };
    model.K1 = std::abs(kappa);
    model.K2 = 0.0;
    model.linear_drift = true;
    model.params["kappa"] = kappa;
  } else if (name == "rotation") {
    const double omega = get("omega", 0.5);
    const MatrixXd M = block_skew(d, omega);
    model.drift = [M](double, const VectorXd& x, VectorXd& out) { out = M * x; };
    model.drift_jacobian = [M](double, const VectorXd&, MatrixXd& out) {
      out = M;
    };
    model.drift_second = [](double, const VectorXd& x, const VectorXd&,
                            MatrixXd& out) { out.setZero(x.size(), x.size()); };
    model.K1 = std::abs(omega);
    model.K2 = 0.0;
    model.linear_drift = true;
    model.params["omega"] = omega;
  } else if (name == "sine") {
    const double eps = get("eps", 0.2);
    if (eps < 0.0) throw std::invalid_argument("sine eps must be nonnegative");
    model.drift = [eps](double, const VectorXd& x, VectorXd& out) {
      out.resize(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i) = -x(i) + eps * std::sin(x(i));
    };
    model.drift_jacobian = [eps](double, const VectorXd& x, MatrixXd& out) {
      out.setZero(x.size(), x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i, i) = -1.0 + eps * std::cos(x(i));
    };
    model.drift_second = [eps](double, const VectorXd& x, const VectorXd& u,
                               MatrixXd& out) {
      out.setZero(x.size(), x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out(i, i) = -eps * std::sin(x(i)) * u(i);
    };
    model.K1 = 1.0 + eps;
    model.K2 = eps;
    model.linear_drift = false;
    model.params["eps"] = eps;
  } else {
    throw std::invalid_argument("unknown model: " + name);
  }

  model.grad_norm_bound = model.K1;
  return model;
}

}  // namespace subibp
