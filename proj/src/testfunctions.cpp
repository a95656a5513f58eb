#include "subibp/testfunctions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace subibp {

VectorXd TestFunction::gradient(const VectorXd& x) const {
  if (analytic_gradient) return analytic_gradient(x);
  constexpr double h = 1e-5;
  VectorXd g(x.size());
  VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

TestFunction make_test_function(const std::string& name, const VectorXd& a,
                                double shift) {
  TestFunction tf;
  std::ostringstream desc;
  desc << name << ":a=[";
  for (Eigen::Index i = 0; i < a.size(); ++i)
    desc << (i ? "," : "") << a(i);
  desc << "]";
  if (shift != 0.0) desc << ":shift=" << shift;
  tf.descriptor = desc.str();

  if (name == "linear") {
    tf.f = [a](const VectorXd& x) { return a.dot(x); };
    tf.analytic_gradient = [a](const VectorXd&) { return a; };
    tf.sup_norm = 0.0;
  } else if (name == "sin") {
    tf.f = [a](const VectorXd& x) { return std::sin(a.dot(x)); };
    tf.analytic_gradient = [a](const VectorXd& x) {
      return VectorXd(std::cos(a.dot(x)) * a);
    };
    tf.sup_norm = 1.0;
  } else if (name == "cos") {
    tf.f = [a](const VectorXd& x) { return std::cos(a.dot(x)); };
    tf.analytic_gradient = [a](const VectorXd& x) {
      return VectorXd(-std::sin(a.dot(x)) * a);
    };
    tf.sup_norm = 1.0;
  } else if (name == "gaussbump") {
    const VectorXd c = VectorXd::Constant(a.size(), shift);
    tf.f = [c](const VectorXd& x) {
      return std::exp(-0.5 * (x - c).squaredNorm());
    };
    tf.analytic_gradient = [c](const VectorXd& x) {
      return VectorXd(-(x - c) * std::exp(-0.5 * (x - c).squaredNorm()));
    };
    tf.sup_norm = 1.0;
    tf.positive = true;
  } else if (name == "expsin") {
    tf.f = [a](const VectorXd& x) { return std::exp(std::sin(a.dot(x))); };
    tf.analytic_gradient = [a](const VectorXd& x) {
      const double s = a.dot(x);
      return VectorXd(std::cos(s) * std::exp(std::sin(s)) * a);
    };
    tf.sup_norm = std::exp(1.0);
    tf.positive = true;
  } else if (name == "gaussfloor") {
    const VectorXd c = VectorXd::Constant(a.size(), shift);
    tf.f = [c](const VectorXd& x) {
      return 0.1 + std::exp(-0.5 * (x - c).squaredNorm());
    };
    tf.analytic_gradient = [c](const VectorXd& x) {
      return VectorXd(-(x - c) * std::exp(-0.5 * (x - c).squaredNorm()));
    };
    tf.sup_norm = 1.1;
    tf.positive = true;
  } else {
    throw std::invalid_argument("unknown test function: " + name);
  }
  return tf;
}

}  // namespace subibp
