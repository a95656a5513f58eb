#pragma once

#include <functional>
#include <string>

#include "subibp/linalg.hpp"

namespace subibp {

// Scalar test function with optional analytic gradient. When the gradient is
// absent a central finite difference with step 1e-5 is used.
struct TestFunction {
  std::string descriptor;
  std::function<double(const VectorXd&)> f;
  std::function<VectorXd(const VectorXd&)> analytic_gradient;  // optional
  double sup_norm = 0.0;  // 0 = unbounded
  bool positive = false;

  VectorXd gradient(const VectorXd& x) const;
};

// Catalog, parameterized by a direction vector a:
//   linear     <a, x>                       (unbounded)
//   sin        sin(<a, x>)                  (|f| <= 1)
//   cos        cos(<a, x>)                  (|f| <= 1)
//   gaussbump  exp(-|x - c|^2 / 2)          (0 < f <= 1), c = shift * ones
//   expsin     exp(sin(<a, x>))             (positive, |f| <= e)
//   gaussfloor 0.1 + exp(-|x - c|^2 / 2)    (positive, |f| <= 1.1)
TestFunction make_test_function(const std::string& name, const VectorXd& a,
                                double shift = 0.0);

}  // namespace subibp
