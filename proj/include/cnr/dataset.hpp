#pragma once

#include <Eigen/Core>
#include <string>

namespace cnr {

// A supervised sample: one feature row per observation plus its label.
struct Dataset {
  Eigen::MatrixXd X;  // n x k
  Eigen::VectorXd y;  // n
  std::string tag;    // provenance, e.g. "synth-mr"

  int n() const { return static_cast<int>(y.size()); }
  int k() const { return static_cast<int>(X.cols()); }
};

// Throws InvalidInput unless rows line up and every entry is finite.
void validate(const Dataset& data);

}  // namespace cnr
