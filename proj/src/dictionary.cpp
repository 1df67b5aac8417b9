#include "cnr/dictionary.hpp"

#include <algorithm>
#include <cmath>

namespace cnr {

namespace {

void require_finite(double y) {
  if (!std::isfinite(y)) throw InvalidInput("dictionary: y must be finite");
}

}  // namespace

KnotGrid::KnotGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidInput("KnotGrid: at least one knot required");
  for (double p : points_)
    if (!std::isfinite(p)) throw InvalidInput("KnotGrid: knots must be finite");
  deltas_.reserve(points_.size() - 1);
  for (std::size_t j = 1; j < points_.size(); ++j) {
    const double d = points_[j] - points_[j - 1];
    if (!(d > 0.0)) throw InvalidInput("KnotGrid: knots must be strictly ascending");
    deltas_.push_back(d);
  }
}

int KnotGrid::bin(double y) const {
  require_finite(y);
  // First knot strictly greater than y; y == p_j lands in bin j+1.
  const auto it = std::upper_bound(points_.begin(), points_.end(), y);
  return static_cast<int>(it - points_.begin());
}

KnotGrid knots_from_quantiles(std::vector<double> samples,
                              const std::vector<double>& fractions) {
  if (samples.empty()) throw InvalidInput("knots_from_quantiles: empty sample");
  if (fractions.empty()) throw InvalidInput("knots_from_quantiles: no fractions given");
  for (double s : samples)
    if (!std::isfinite(s)) throw InvalidInput("knots_from_quantiles: non-finite sample");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] < 1.0))
      throw InvalidInput("knots_from_quantiles: fractions must lie strictly inside (0,1)");
    if (i > 0 && !(fractions[i] > fractions[i - 1]))
      throw InvalidInput("knots_from_quantiles: fractions must be strictly ascending");
  }
  std::sort(samples.begin(), samples.end());
  if (samples.front() == samples.back())
    throw DegenerateKnots("knots_from_quantiles: sample has zero spread, all quantiles tie");

  const std::size_t n = samples.size();
  std::vector<double> knots;
  knots.reserve(fractions.size());
  for (double q : fractions) {
    const double pos = q * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    double v = samples[lo];
    if (frac > 0.0 && lo + 1 < n) v += frac * (samples[lo + 1] - samples[lo]);
    knots.push_back(v);
  }
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw DegenerateKnots("knots_from_quantiles: tied sample quantiles collapse knots");
  return KnotGrid(std::move(knots));
}

Dictionary Dictionary::piecewise_linear(KnotGrid grid) {
  Dictionary d;
  d.grid_ = std::move(grid);
  return d;
}

Dictionary Dictionary::affine() { return {}; }

const KnotGrid& Dictionary::grid() const {
  if (is_affine()) throw InvalidInput("Dictionary: the affine variant has no knot grid");
  return *grid_;
}

int Dictionary::dim() const { return is_affine() ? 2 : grid_->last_index() + 3; }

int Dictionary::bin_count() const { return is_affine() ? 1 : grid_->last_index() + 2; }

Eigen::VectorXd Dictionary::eval(double y) const {
  require_finite(y);
  Eigen::VectorXd h(dim());
  h(0) = 1.0;
  if (is_affine()) {
    h(1) = y;
    return h;
  }
  const auto& p = grid_->points();
  const auto& d = grid_->deltas();
  const int L = grid_->last_index();
  h(1) = std::min(y - p[0], 0.0);
  for (int j = 1; j <= L; ++j)
    h(j + 1) = std::clamp(y - p[j - 1], 0.0, d[j - 1]);  // saturates at the bin width
  h(L + 2) = std::max(y - p[L], 0.0);
  return h;
}

Eigen::VectorXd Dictionary::deriv(double y) const {
  Eigen::VectorXd hp = Eigen::VectorXd::Zero(dim());
  hp(1 + active_bin(y)) = 1.0;
  return hp;
}

int Dictionary::active_bin(double y) const {
  if (is_affine()) {
    require_finite(y);
    return 0;
  }
  return grid_->bin(y);
}

}  // namespace cnr
