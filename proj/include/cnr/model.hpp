#pragma once

#include <Eigen/Core>

#include "cnr/dataset.hpp"
#include "cnr/dictionary.hpp"
#include "cnr/errors.hpp"
#include "cnr/feature_map.hpp"
#include "cnr/rng.hpp"

namespace cnr {

// Coefficients of the label transformation at one feature point:
//   g(y) = mu + sum_j h_j(y) * alphas[j].
// alphas[j] is the slope of g on bin j. cum[j] is the total rise of g across
// the first j interior bins, so g(p_j) = mu + cum[j]; cum[0] == 0. For the
// affine dictionary alphas holds the single slope and cum is empty.
struct CoefVector {
  double mu = 0.0;
  Eigen::VectorXd alphas;
  Eigen::VectorXd cum;

  // All slopes strictly positive, i.e. g is strictly increasing and the
  // implied conditional density is proper.
  bool valid() const { return alphas.size() > 0 && alphas.minCoeff() > 0.0; }
};

// A fitted model: label dictionary, coefficient matrix A (dim x k), offset b
// (dim), and the feature map whose k outputs the rows of A multiply. The
// transformation at x is g(y; x) = h(y) . (A psi(x) + b), and y | x is
// modeled by requiring g(y; x) to be standard normal.
class CnrParams {
 public:
  CnrParams(Dictionary dict, Eigen::MatrixXd coef, Eigen::VectorXd offset,
            FeatureMap map = {});

  const Dictionary& dict() const { return dict_; }
  const Eigen::MatrixXd& coef() const { return coef_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  const FeatureMap& feature_map() const { return map_; }
  int dim() const { return static_cast<int>(offset_.size()); }
  int feature_dim() const { return static_cast<int>(coef_.cols()); }

  // Packed form [vec(A) row-major; b], the layout the solver optimizes.
  Eigen::VectorXd flatten() const;
  static CnrParams unflatten(const Eigen::VectorXd& w, Dictionary dict,
                             int feature_dim, FeatureMap map = {});

 private:
  Dictionary dict_;
  Eigen::MatrixXd coef_;
  Eigen::VectorXd offset_;
  FeatureMap map_;
};

double std_normal_pdf(double t);
double std_normal_cdf(double t);

// u(x) = A psi(x) + b unpacked into slope form.
CoefVector coef_at(const CnrParams& params, const Eigen::VectorXd& x);

// g(y; x) and its y-derivative (the active slope).
double transform(const CoefVector& u, const Dictionary& dict, double y);
double transform(const CnrParams& params, const Eigen::VectorXd& x, double y);
double transform_deriv(const CoefVector& u, const Dictionary& dict, double y);
double transform_deriv(const CnrParams& params, const Eigen::VectorXd& x, double y);

// Whether every slope is strictly positive at x; depends on x only.
bool is_valid(const CnrParams& params, const Eigen::VectorXd& x);

// Training objective sum_i g^2 - 2 log g', additive constants dropped.
// Only the slopes active at the samples must be positive.
double nll_objective(const CnrParams& params, const Dataset& data);

// Mean negative log likelihood with constants kept; comparable across
// model families. Same feasibility requirement as nll_objective.
double nll_reported(const CnrParams& params, const Dataset& data);

// Conditional density g'(y; x) phi(g(y; x)) and its logarithm. The log form
// never underflows and is what scoring code should sum. Both require the
// parameters to be valid at x.
double density(const CoefVector& u, const Dictionary& dict, double y);
double density(const CnrParams& params, const Eigen::VectorXd& x, double y);
double log_density(const CoefVector& u, const Dictionary& dict, double y);
double log_density(const CnrParams& params, const Eigen::VectorXd& x, double y);

// E[y | x] in closed form (one Gaussian cdf/pdf pair per bin edge).
double posterior_mean(const CoefVector& u, const Dictionary& dict);
double posterior_mean(const CnrParams& params, const Eigen::VectorXd& x);

// The unique y with g(y; x) = z.
double inverse_transform(const CoefVector& u, const Dictionary& dict, double z);
double inverse_transform(const CnrParams& params, const Eigen::VectorXd& x, double z);

// Draw y | x by pushing a standard normal through the inverse transform.
double sample(const CnrParams& params, const Eigen::VectorXd& x, Rng& rng);

}  // namespace cnr
