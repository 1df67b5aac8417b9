#include "cnr/model.hpp"

#include <cmath>
#include <string>

namespace cnr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_finite_vec(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) throw InvalidInput(std::string(what) + ": non-finite input");
}

}  // namespace

double std_normal_pdf(double t) {
  if (!std::isfinite(t)) throw InvalidInput("std_normal_pdf: non-finite input");
  return kInvSqrt2Pi * std::exp(-0.5 * t * t);
}

double std_normal_cdf(double t) {
  if (!std::isfinite(t)) throw InvalidInput("std_normal_cdf: non-finite input");
  return 0.5 * std::erfc(-t * M_SQRT1_2);
}

void validate(const Dataset& data) {
  if (data.X.rows() != data.y.size())
    throw InvalidInput("Dataset: X and y row counts differ");
  if (!data.X.allFinite() || !data.y.allFinite())
    throw InvalidInput("Dataset: non-finite entries");
}

CnrParams::CnrParams(Dictionary dict, Eigen::MatrixXd coef, Eigen::VectorXd offset,
                     FeatureMap map)
    : dict_(std::move(dict)),
      coef_(std::move(coef)),
      offset_(std::move(offset)),
      map_(std::move(map)) {
  if (coef_.rows() != offset_.size() || offset_.size() != dict_.dim())
    throw InvalidInput("CnrParams: A and b need one row per basis entry");
  if (!coef_.allFinite() || !offset_.allFinite())
    throw InvalidInput("CnrParams: non-finite parameters");
}

Eigen::VectorXd CnrParams::flatten() const {
  const int d = dim();
  const int k = feature_dim();
  Eigen::VectorXd w(static_cast<Eigen::Index>(d) * (k + 1));
  for (int r = 0; r < d; ++r) w.segment(static_cast<Eigen::Index>(r) * k, k) = coef_.row(r);
  w.tail(d) = offset_;
  return w;
}

CnrParams CnrParams::unflatten(const Eigen::VectorXd& w, Dictionary dict,
                               int feature_dim, FeatureMap map) {
  const int d = dict.dim();
  if (feature_dim < 0 ||
      w.size() != static_cast<Eigen::Index>(d) * (feature_dim + 1))
    throw InvalidInput("CnrParams::unflatten: packed length mismatch");
  Eigen::MatrixXd A(d, feature_dim);
  for (int r = 0; r < d; ++r)
    A.row(r) = w.segment(static_cast<Eigen::Index>(r) * feature_dim, feature_dim);
  Eigen::VectorXd b = w.tail(d);
  return {std::move(dict), std::move(A), std::move(b), std::move(map)};
}

CoefVector coef_at(const CnrParams& params, const Eigen::VectorXd& x) {
  require_finite_vec(x, "coef_at");
  const Eigen::VectorXd psi = params.feature_map().apply(x);
  if (psi.size() != params.feature_dim())
    throw InvalidInput("coef_at: feature length does not match the parameters");
  Eigen::VectorXd u = params.offset();
  if (psi.size() > 0) u.noalias() += params.coef() * psi;

  CoefVector c;
  c.mu = u(0);
  c.alphas = u.tail(u.size() - 1);
  if (!params.dict().is_affine()) {
    const auto& deltas = params.dict().grid().deltas();
    const int L = params.dict().grid().last_index();
    c.cum = Eigen::VectorXd::Zero(L + 1);
    for (int j = 1; j <= L; ++j)
      c.cum(j) = c.cum(j - 1) + deltas[j - 1] * c.alphas(j);
  }
  return c;
}

double transform(const CoefVector& u, const Dictionary& dict, double y) {
  const Eigen::VectorXd h = dict.eval(y);
  return u.mu + h.tail(h.size() - 1).dot(u.alphas);
}

double transform(const CnrParams& params, const Eigen::VectorXd& x, double y) {
  return transform(coef_at(params, x), params.dict(), y);
}

double transform_deriv(const CoefVector& u, const Dictionary& dict, double y) {
  return u.alphas(dict.active_bin(y));
}

double transform_deriv(const CnrParams& params, const Eigen::VectorXd& x, double y) {
  return transform_deriv(coef_at(params, x), params.dict(), y);
}

bool is_valid(const CnrParams& params, const Eigen::VectorXd& x) {
  return coef_at(params, x).valid();
}

double nll_objective(const CnrParams& params, const Dataset& data) {
  validate(data);
  double acc = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const CoefVector u = coef_at(params, data.X.row(i).transpose());
    const double g = transform(u, params.dict(), data.y(i));
    const double gp = transform_deriv(u, params.dict(), data.y(i));
    if (!(gp > 0.0))
      throw InfeasiblePoint("nll_objective: non-positive active slope at a sample",
                            static_cast<std::size_t>(i));
    acc += g * g - 2.0 * std::log(gp);
  }
  return acc;
}

double nll_reported(const CnrParams& params, const Dataset& data) {
  validate(data);
  if (data.n() == 0) throw InvalidInput("nll_reported: empty dataset");
  double acc = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const CoefVector u = coef_at(params, data.X.row(i).transpose());
    const double g = transform(u, params.dict(), data.y(i));
    const double gp = transform_deriv(u, params.dict(), data.y(i));
    if (!(gp > 0.0))
      throw InfeasiblePoint("nll_reported: non-positive active slope at a sample",
                            static_cast<std::size_t>(i));
    acc += 0.5 * g * g - std::log(gp) + 0.5 * kLog2Pi;
  }
  return acc / data.n();
}

double density(const CoefVector& u, const Dictionary& dict, double y) {
  if (!u.valid()) throw InfeasiblePoint("density: parameters are invalid at this x");
  const double g = transform(u, dict, y);
  return transform_deriv(u, dict, y) * std_normal_pdf(g);
}

double density(const CnrParams& params, const Eigen::VectorXd& x, double y) {
  return density(coef_at(params, x), params.dict(), y);
}

double log_density(const CoefVector& u, const Dictionary& dict, double y) {
  if (!u.valid())
    throw InfeasiblePoint("log_density: parameters are invalid at this x");
  const double g = transform(u, dict, y);
  return std::log(transform_deriv(u, dict, y)) - 0.5 * g * g - 0.5 * kLog2Pi;
}

double log_density(const CnrParams& params, const Eigen::VectorXd& x, double y) {
  return log_density(coef_at(params, x), params.dict(), y);
}

double posterior_mean(const CoefVector& u, const Dictionary& dict) {
  if (!u.valid())
    throw InfeasiblePoint("posterior_mean: parameters are invalid at this x");
  if (dict.is_affine()) return -u.mu / u.alphas(0);

  // E[y | x] = sum over bins of the Gaussian partial expectation of the
  // inverse transform, which is affine within each bin. Breakpoint j of the
  // transform sits at g = mu + cum[j].
  const auto& p = dict.grid().points();
  const int L = dict.grid().last_index();
  const double mu = u.mu;

  double acc = -kInvSqrt2Pi * std::exp(-0.5 * mu * mu) / u.alphas(0) +
               (p[0] - mu / u.alphas(0)) * std_normal_cdf(mu);
  for (int j = 0; j < L; ++j) {
    const double tj = mu + u.cum(j);
    const double tj1 = mu + u.cum(j + 1);
    const double a = u.alphas(j + 1);
    acc += kInvSqrt2Pi * (std::exp(-0.5 * tj * tj) - std::exp(-0.5 * tj1 * tj1)) / a +
           (p[j] - tj / a) * (std_normal_cdf(tj1) - std_normal_cdf(tj));
  }
  const double tL = mu + u.cum(L);
  const double aR = u.alphas(L + 1);
  acc += kInvSqrt2Pi * std::exp(-0.5 * tL * tL) / aR +
         (p[L] - tL / aR) * (1.0 - std_normal_cdf(tL));
  return acc;
}

double posterior_mean(const CnrParams& params, const Eigen::VectorXd& x) {
  return posterior_mean(coef_at(params, x), params.dict());
}

double inverse_transform(const CoefVector& u, const Dictionary& dict, double z) {
  if (!std::isfinite(z)) throw InvalidInput("inverse_transform: z must be finite");
  if (!u.valid())
    throw InfeasiblePoint("inverse_transform: parameters are invalid at this x");
  if (dict.is_affine()) return (z - u.mu) / u.alphas(0);

  const auto& p = dict.grid().points();
  const int L = dict.grid().last_index();
  if (z < u.mu) return p[0] + (z - u.mu) / u.alphas(0);
  // Largest breakpoint value at or below z; grids are short, scan linearly.
  int j = L;
  while (j > 0 && z < u.mu + u.cum(j)) --j;
  if (j == L) return p[L] + (z - u.mu - u.cum(L)) / u.alphas(L + 1);
  return p[j] + (z - u.mu - u.cum(j)) / u.alphas(j + 1);
}

double inverse_transform(const CnrParams& params, const Eigen::VectorXd& x, double z) {
  return inverse_transform(coef_at(params, x), params.dict(), z);
}

double sample(const CnrParams& params, const Eigen::VectorXd& x, Rng& rng) {
  return inverse_transform(coef_at(params, x), params.dict(), rng.normal());
}

}  // namespace cnr
