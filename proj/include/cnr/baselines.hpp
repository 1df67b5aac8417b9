#pragma once

#include <Eigen/Core>

#include "cnr/dataset.hpp"
#include "cnr/errors.hpp"
#include "cnr/model.hpp"
#include "cnr/solver.hpp"

namespace cnr {

// Ordinary least squares with the maximum-likelihood noise variance.
struct LrModel {
  Eigen::VectorXd w;
  double sigma2 = 0.0;
};

// Normal equations; a tiny ridge is retried if the Gram matrix cannot be
// solved reliably. Throws ZeroVariance when the fit is exact, since the
// Gaussian likelihood degenerates.
LrModel lr_fit(const Dataset& data);

double lr_predict(const LrModel& model, const Eigen::VectorXd& x);
double lr_log_density(const LrModel& model, const Eigen::VectorXd& x, double y);
double lr_nll(const LrModel& model, const Dataset& data);

// The same Gaussian written as transformation parameters: an affine
// dictionary with g(y; x) = (y - w.x) / sigma. Its density matches
// lr_log_density identically; used to cross-check the model code paths.
CnrParams cnr_from_lr(const LrModel& model);

// Gaussian regression with feature-dependent mean and variance: an
// affine-dictionary fit g(y; x) = u(x) + v(x) y, so the conditional law is
// N(-u(x)/v(x), 1/v(x)^2) wherever v(x) > 0.
struct GrModel {
  CnrParams inner;
};

GrModel gr_fit(const Dataset& data, const AdmmConfig& config = {});

// v(x) > 0, i.e. the Gaussian at x is proper.
bool gr_valid(const GrModel& model, const Eigen::VectorXd& x);

// Conditional mean -u(x)/v(x); callers check gr_valid first, otherwise
// InfeasiblePoint. Experiment code falls back to the LR prediction at
// invalid points and reports how often it did.
double gr_predict(const GrModel& model, const Eigen::VectorXd& x);

// Conditional variance 1/v(x)^2.
double gr_sigma2(const GrModel& model, const Eigen::VectorXd& x);

double gr_nll(const GrModel& model, const Dataset& data);

}  // namespace cnr
