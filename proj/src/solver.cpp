#include "cnr/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace cnr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const AdmmConfig& cfg) {
  if (!(cfg.rho > 0.0)) throw InvalidInput("admm_fit: rho must be positive");
  if (cfg.max_iters < 0) throw InvalidInput("admm_fit: max_iters must be >= 0");
  if (!(cfg.tol_primal > 0.0) || !(cfg.tol_dual > 0.0))
    throw InvalidInput("admm_fit: tolerances must be positive");
  if (cfg.ridge < 0.0) throw InvalidInput("admm_fit: ridge must be >= 0");
  if (!(cfg.z_init > 0.0)) throw InvalidInput("admm_fit: z_init must be positive");
  if (cfg.quad_penalty < 0.0) throw InvalidInput("admm_fit: quad_penalty must be >= 0");
}

}  // namespace

DesignMatrices assemble(const Dataset& data, const Dictionary& dict,
                        const FeatureMap& map) {
  validate(data);
  const int n = data.n();
  if (n == 0) throw InvalidInput("assemble: empty dataset");
  const int k = map.output_dim(data.k());
  const int d = dict.dim();
  const int m = d * (k + 1);

  DesignMatrices dm;
  dm.gram = Eigen::MatrixXd::Zero(m, m);
  dm.deriv_rows.resize(n, m);
  Eigen::VectorXd row(m);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd psi = map.apply(data.X.row(i).transpose());
    if (psi.size() != k) throw InvalidInput("assemble: inconsistent feature length");
    const Eigen::VectorXd h = dict.eval(data.y(i));
    for (int r = 0; r < d; ++r) row.segment(static_cast<Eigen::Index>(r) * k, k) = h(r) * psi;
    row.tail(d) = h;
    dm.gram.noalias() += row * row.transpose();

    // h' is one-hot past the constant, so the derivative row is sparse.
    dm.deriv_rows.row(i).setZero();
    const int bin = dict.active_bin(data.y(i));
    const int r = 1 + bin;
    dm.deriv_rows.row(i).segment(static_cast<Eigen::Index>(r) * k, k) = psi;
    dm.deriv_rows(i, static_cast<Eigen::Index>(d) * k + r) = 1.0;
  }
  return dm;
}

double z_update(double v, double rho) {
  if (!(rho > 0.0)) throw InvalidInput("z_update: rho must be positive");
  return (v + std::sqrt(v * v + 8.0 * rho)) / (2.0 * rho);
}

double objective_value(const DesignMatrices& dm, const Eigen::VectorXd& w,
                       double quad_penalty) {
  if (w.size() != dm.m()) throw InvalidInput("objective_value: wrong parameter length");
  const Eigen::ArrayXd slopes = (dm.deriv_rows * w).array();
  for (Eigen::Index i = 0; i < slopes.size(); ++i)
    if (!(slopes(i) > 0.0))
      throw InfeasiblePoint("objective_value: non-positive slope at a sample",
                            static_cast<std::size_t>(i));
  return w.dot(dm.gram * w) + quad_penalty * w.squaredNorm() - 2.0 * slopes.log().sum();
}

Eigen::VectorXd objective_gradient(const DesignMatrices& dm, const Eigen::VectorXd& w,
                                   double quad_penalty) {
  if (w.size() != dm.m()) throw InvalidInput("objective_gradient: wrong parameter length");
  const Eigen::VectorXd slopes = dm.deriv_rows * w;
  for (Eigen::Index i = 0; i < slopes.size(); ++i)
    if (!(slopes(i) > 0.0))
      throw InfeasiblePoint("objective_gradient: non-positive slope at a sample",
                            static_cast<std::size_t>(i));
  Eigen::VectorXd grad = 2.0 * (dm.gram * w) - 2.0 * (dm.deriv_rows.transpose() * slopes.cwiseInverse());
  if (quad_penalty > 0.0) grad += 2.0 * quad_penalty * w;
  return grad;
}

FitResult admm_fit(const DesignMatrices& dm, const Dictionary& dict,
                   const FeatureMap& map, const AdmmConfig& cfg) {
  check_config(cfg);
  const int m = dm.m();
  const int n = dm.n();
  const int d = dict.dim();
  if (m % d != 0 || dm.deriv_rows.cols() != m)
    throw InvalidInput("admm_fit: design width incompatible with the dictionary");
  const int k = m / d - 1;

  FitDiagnostics diag;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  if (cfg.max_iters == 0) return {CnrParams::unflatten(w, dict, k, map), diag};

  // The w-step matrix never changes, factor it once.
  Eigen::MatrixXd quad_step = dm.gram + (0.5 * cfg.rho) * (dm.deriv_rows.transpose() * dm.deriv_rows);
  quad_step.diagonal().array() += cfg.ridge + cfg.quad_penalty;
  const Eigen::LDLT<Eigen::MatrixXd> solve_step(quad_step);
  if (solve_step.info() != Eigen::Success)
    throw Diverged("admm_fit: factorization of the quadratic step failed");

  const double primal_thresh = cfg.tol_primal * std::sqrt(static_cast<double>(n));
  const double dual_thresh = cfg.tol_dual * std::sqrt(static_cast<double>(m));

  Eigen::VectorXd z = Eigen::VectorXd::Constant(n, cfg.z_init);
  Eigen::VectorXd dual = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd slopes(n), z_new(n), rhs(m), dual_gap(m);

  Eigen::VectorXd best_w;
  double best_obj = kInf;
  diag.objective_trace.reserve(std::min(cfg.max_iters, 65536));

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    rhs.noalias() = dm.deriv_rows.transpose() * (cfg.rho * z - dual);
    w = solve_step.solve(0.5 * rhs);
    slopes.noalias() = dm.deriv_rows * w;

    const Eigen::ArrayXd v = cfg.rho * slopes.array() + dual.array();
    z_new = ((v + (v.square() + 8.0 * cfg.rho).sqrt()) / (2.0 * cfg.rho)).matrix();
    dual += cfg.rho * (slopes - z_new);

    diag.iterations = iter;
    diag.primal_residual = (slopes - z_new).norm();
    dual_gap.noalias() = dm.deriv_rows.transpose() * (z_new - z);
    diag.dual_residual = cfg.rho * dual_gap.norm();
    z.swap(z_new);

    const double quad = w.dot(dm.gram * w) + cfg.quad_penalty * w.squaredNorm();
    diag.objective_trace.push_back(quad - 2.0 * z.array().log().sum());
    if (!std::isfinite(diag.objective_trace.back()) || !w.allFinite())
      throw Diverged("admm_fit: iterates became non-finite");

    const bool feasible = slopes.minCoeff() > 0.0;
    if (feasible) {
      const double obj = quad - 2.0 * slopes.array().log().sum();
      if (obj < best_obj) {
        best_obj = obj;
        best_w = w;
      }
      if (diag.primal_residual <= primal_thresh && diag.dual_residual <= dual_thresh) {
        diag.converged = true;
        break;
      }
    }
  }

  if (!diag.converged && best_obj < kInf) w = std::move(best_w);
  return {CnrParams::unflatten(w, dict, k, map), diag};
}

FitResult fit_cnr(const Dataset& data, const Dictionary& dict, const FeatureMap& map,
                  const AdmmConfig& config) {
  return admm_fit(assemble(data, dict, map), dict, map, config);
}

CnrParams reference_fit(const Dataset& data, const Dictionary& dict,
                        const FeatureMap& map, const ReferenceOptions& opt) {
  validate(data);
  if (!(opt.grad_tol > 0.0)) throw InvalidInput("reference_fit: grad_tol must be positive");
  const DesignMatrices dm = assemble(data, dict, map);
  const int k = map.output_dim(data.k());
  const int d = dict.dim();

  // Zero coefficient matrix, every slope 1/std(y), constant entry chosen so
  // the transform vanishes at the label mean. Every sample slope is then
  // exactly 1/std(y) > 0.
  const double label_mean = data.y.mean();
  const double label_sd = std::sqrt((data.y.array() - label_mean).square().mean());
  if (!(label_sd > 1e-12)) throw InfeasibleStart("reference_fit: labels have no spread");
  Eigen::VectorXd b = Eigen::VectorXd::Constant(d, 1.0 / label_sd);
  const Eigen::VectorXd h_mean = dict.eval(label_mean);
  b(0) = -h_mean.tail(d - 1).sum() / label_sd;
  Eigen::VectorXd w = CnrParams(dict, Eigen::MatrixXd::Zero(d, k), b, map).flatten();

  const auto value_or_inf = [&](const Eigen::VectorXd& ww) {
    const Eigen::ArrayXd slopes = (dm.deriv_rows * ww).array();
    if (!(slopes.minCoeff() > 0.0)) return kInf;
    return ww.dot(dm.gram * ww) + opt.quad_penalty * ww.squaredNorm() - 2.0 * slopes.log().sum();
  };

  double f = value_or_inf(w);
  if (!std::isfinite(f)) throw InfeasibleStart("reference_fit: start is not feasible");
  Eigen::VectorXd grad = objective_gradient(dm, w, opt.quad_penalty);
  Eigen::VectorXd w_prev = w, grad_prev = grad;
  double step = 1.0 / std::max(1.0, grad.norm());

  for (long it = 0; it < opt.max_iters; ++it) {
    if (grad.norm() <= opt.grad_tol) return CnrParams::unflatten(w, dict, k, map);
    if (it > 0) {
      const Eigen::VectorXd s = w - w_prev;
      const Eigen::VectorXd q = grad - grad_prev;
      const double curvature = s.dot(q);
      step = curvature > 0.0 ? s.squaredNorm() / curvature : step * 2.0;
      step = std::clamp(step, 1e-14, 1e10);
    }

    const double grad_sq = grad.squaredNorm();
    double t = step;
    Eigen::VectorXd w_new;
    double f_new = kInf;
    bool moved = false;
    for (int bt = 0; bt < 200; ++bt) {
      w_new = w - t * grad;
      f_new = value_or_inf(w_new);
      if (f_new <= f - 1e-4 * t * grad_sq) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // step underflowed; the gradient check below decides

    w_prev = std::move(w);
    grad_prev = std::move(grad);
    w = std::move(w_new);
    f = f_new;
    grad = objective_gradient(dm, w, opt.quad_penalty);
  }

  if (grad.norm() <= opt.grad_tol) return CnrParams::unflatten(w, dict, k, map);
  throw Diverged("reference_fit: did not reach the gradient tolerance");
}

}  // namespace cnr
