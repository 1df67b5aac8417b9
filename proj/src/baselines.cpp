#include "cnr/baselines.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace cnr {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

LrModel lr_fit(const Dataset& data) {
  validate(data);
  if (data.n() < 2) throw InvalidInput("lr_fit: need at least two samples");
  const Eigen::MatrixXd gram = data.X.transpose() * data.X;
  const Eigen::VectorXd rhs = data.X.transpose() * data.y;

  Eigen::VectorXd w;
  const Eigen::LDLT<Eigen::MatrixXd> fact(gram);
  bool ok = fact.info() == Eigen::Success;
  if (ok) {
    w = fact.solve(rhs);
    ok = w.allFinite() &&
         (gram * w - rhs).norm() <= 1e-8 * std::max(1.0, rhs.norm());
  }
  if (!ok) {
    Eigen::MatrixXd ridged = gram;
    ridged.diagonal().array() += 1e-10;
    w = ridged.ldlt().solve(rhs);
    if (!w.allFinite()) throw InvalidInput("lr_fit: normal equations unsolvable");
  }

  const double sigma2 = (data.y - data.X * w).squaredNorm() / data.n();
  if (sigma2 < 1e-12)
    throw ZeroVariance("lr_fit: residual variance is numerically zero");
  return {std::move(w), sigma2};
}

double lr_predict(const LrModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.w.size()) throw InvalidInput("lr_predict: feature length mismatch");
  return model.w.dot(x);
}

double lr_log_density(const LrModel& model, const Eigen::VectorXd& x, double y) {
  const double r = y - lr_predict(model, x);
  return -0.5 * (kLog2Pi + std::log(model.sigma2)) - r * r / (2.0 * model.sigma2);
}

double lr_nll(const LrModel& model, const Dataset& data) {
  validate(data);
  if (data.n() == 0) throw InvalidInput("lr_nll: empty dataset");
  double acc = 0.0;
  for (int i = 0; i < data.n(); ++i)
    acc -= lr_log_density(model, data.X.row(i).transpose(), data.y(i));
  return acc / data.n();
}

CnrParams cnr_from_lr(const LrModel& model) {
  const double sd = std::sqrt(model.sigma2);
  Eigen::MatrixXd A(2, model.w.size());
  A.row(0) = -model.w.transpose() / sd;
  A.row(1).setZero();
  Eigen::VectorXd b(2);
  b << 0.0, 1.0 / sd;
  return {Dictionary::affine(), std::move(A), std::move(b), FeatureMap::identity()};
}

GrModel gr_fit(const Dataset& data, const AdmmConfig& config) {
  return {fit_cnr(data, Dictionary::affine(), FeatureMap::identity(), config).params};
}

bool gr_valid(const GrModel& model, const Eigen::VectorXd& x) {
  return is_valid(model.inner, x);
}

double gr_predict(const GrModel& model, const Eigen::VectorXd& x) {
  const CoefVector u = coef_at(model.inner, x);
  if (!u.valid()) throw InfeasiblePoint("gr_predict: non-positive scale at this x");
  return -u.mu / u.alphas(0);
}

double gr_sigma2(const GrModel& model, const Eigen::VectorXd& x) {
  const CoefVector u = coef_at(model.inner, x);
  if (!u.valid()) throw InfeasiblePoint("gr_sigma2: non-positive scale at this x");
  return 1.0 / (u.alphas(0) * u.alphas(0));
}

double gr_nll(const GrModel& model, const Dataset& data) {
  return nll_reported(model.inner, data);
}

}  // namespace cnr
