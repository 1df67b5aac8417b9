#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "cnr/errors.hpp"

namespace cnr {

// Strictly ascending knot locations p_0 < ... < p_L on the label axis,
// kept together with the adjacent spacings.
class KnotGrid {
 public:
  explicit KnotGrid(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }

  // deltas()[j-1] == points()[j] - points()[j-1]; strictly positive, size L.
  const std::vector<double>& deltas() const { return deltas_; }

  // L, i.e. the grid holds L+1 points and cuts the line into L+2 bins.
  int last_index() const { return static_cast<int>(points_.size()) - 1; }

  double first_point() const { return points_.front(); }
  double last_point() const { return points_.back(); }

  // Bin of y: 0 below p_0, then j+1 on [p_j, p_{j+1}), and L+1 from p_L on.
  // Intervals are closed on the left, matching the right-derivative
  // convention of the basis.
  int bin(double y) const;

 private:
  std::vector<double> points_;
  std::vector<double> deltas_;
};

// Empirical-quantile knots. Quantile q sits at fractional position q*(n-1)
// of the sorted sample, linearly interpolated between order statistics.
// Ties that collapse knots onto each other raise DegenerateKnots.
KnotGrid knots_from_quantiles(std::vector<double> samples,
                              const std::vector<double>& fractions);

// The label-side basis. The piecewise-linear variant over a knot grid is
//   [1, h_0(y), ..., h_{L+1}(y)]
// where each h is a unit-slope ramp active on one bin: h_0 rises on
// (-inf, p_0), h_j on [p_{j-1}, p_j) saturating at the bin width, and
// h_{L+1} on [p_L, inf). The affine variant is [1, y]. A linear combination
// of the basis with positive ramp weights is a strictly increasing
// piecewise-linear function of y, which is what the model transforms by.
class Dictionary {
 public:
  static Dictionary piecewise_linear(KnotGrid grid);
  static Dictionary affine();

  bool is_affine() const { return !grid_.has_value(); }
  const KnotGrid& grid() const;  // piecewise variant only

  int dim() const;        // basis length: L+3 piecewise, 2 affine
  int bin_count() const;  // L+2 piecewise, 1 affine

  // Basis values at y; entry 0 is always the constant 1.
  Eigen::VectorXd eval(double y) const;

  // Right derivative of eval at y: zero in entry 0 and one-hot past it.
  Eigen::VectorXd deriv(double y) const;

  // Index of the one ramp whose derivative is 1 at y; affine variant: 0.
  int active_bin(double y) const;

 private:
  Dictionary() = default;
  std::optional<KnotGrid> grid_;
};

}  // namespace cnr
