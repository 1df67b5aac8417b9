#pragma once

#include <Eigen/Core>
#include <string>

#include "cnr/errors.hpp"

namespace cnr {

// Named feature transformation applied to raw features before the linear
// parameter map. Kept as a named registry so fitted models can be saved and
// reloaded without ambiguity about what the coefficients multiply. Only the
// identity map is registered at present.
class FeatureMap {
 public:
  FeatureMap() = default;  // identity

  static FeatureMap identity() { return {}; }

  static FeatureMap from_name(const std::string& name) {
    if (name != "identity")
      throw InvalidInput("FeatureMap: unknown map '" + name + "'");
    return {};
  }

  const std::string& name() const { return name_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return x; }
  int output_dim(int input_dim) const { return input_dim; }

 private:
  std::string name_ = "identity";
};

}  // namespace cnr
