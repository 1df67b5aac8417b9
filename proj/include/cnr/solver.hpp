#pragma once

#include <Eigen/Core>
#include <vector>

#include "cnr/dataset.hpp"
#include "cnr/dictionary.hpp"
#include "cnr/errors.hpp"
#include "cnr/feature_map.hpp"
#include "cnr/model.hpp"

namespace cnr {

// Data-dependent matrices of the packed maximum-likelihood objective
//   f(w) = w' gram w - 2 sum_i log([deriv_rows w]_i).
// Row i of deriv_rows is [h'(y_i) kron psi(x_i); h'(y_i)], the layout that
// matches CnrParams::flatten, so [deriv_rows w]_i is the slope of the fitted
// transform at sample i. gram accumulates the same layout built from h
// instead of h'.
struct DesignMatrices {
  Eigen::MatrixXd gram;        // m x m, symmetric positive semidefinite
  Eigen::MatrixXd deriv_rows;  // n x m

  int m() const { return static_cast<int>(gram.rows()); }
  int n() const { return static_cast<int>(deriv_rows.rows()); }
};

DesignMatrices assemble(const Dataset& data, const Dictionary& dict,
                        const FeatureMap& map = {});

struct AdmmConfig {
  double rho = 1.0;           // augmented-Lagrangian weight
  int max_iters = 50000;
  double tol_primal = 1e-6;   // per-sample scale; threshold is tol * sqrt(n)
  double tol_dual = 1e-6;     // per-coordinate scale; threshold is tol * sqrt(m)
  double ridge = 1e-8;        // added to the quadratic-step matrix diagonal
  double z_init = 1.0;        // initial value of every slack entry
  double quad_penalty = 0.0;  // optional |w|^2 penalty weight on the objective
};

struct FitDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Split objective w'Pw - 2 sum log z (plus any penalty) after each
  // iteration; finite even while iterates are infeasible.
  std::vector<double> objective_trace;
  bool converged = false;
};

struct FitResult {
  CnrParams params;
  FitDiagnostics diagnostics;
};

// Positive root of rho z^2 - v z - 2 = 0, the per-coordinate slack update.
double z_update(double v, double rho);

// Objective and gradient in the packed parameterization. objective_value
// throws InfeasiblePoint (with the sample index) when some slope is not
// strictly positive.
double objective_value(const DesignMatrices& dm, const Eigen::VectorXd& w,
                       double quad_penalty = 0.0);
Eigen::VectorXd objective_gradient(const DesignMatrices& dm, const Eigen::VectorXd& w,
                                   double quad_penalty = 0.0);

// Splitting solver for the packed objective: the slack z carries the sample
// slopes, the w-step is one cached symmetric solve, the z-step is the closed
// form root above. With max_iters == 0 the zero initialization is returned
// unconverged. If the stopping rule is never met, the feasible iterate with
// the lowest objective seen is returned with converged == false. Non-finite
// iterates raise Diverged.
FitResult admm_fit(const DesignMatrices& dm, const Dictionary& dict,
                   const FeatureMap& map, const AdmmConfig& config = {});

// assemble + admm_fit.
FitResult fit_cnr(const Dataset& data, const Dictionary& dict,
                  const FeatureMap& map = {}, const AdmmConfig& config = {});

struct ReferenceOptions {
  double grad_tol = 1e-6;
  long max_iters = 1000000;
  double quad_penalty = 0.0;
};

// Slow independent minimizer of the same objective, used to cross-check
// admm_fit on small instances: gradient descent with a Barzilai-Borwein
// step seed and Armijo backtracking, the log terms acting as their own
// barrier (steps that leave the feasible region are rejected). Starts from
// the always-feasible zero-coefficient fit with every slope 1/std(y).
CnrParams reference_fit(const Dataset& data, const Dictionary& dict,
                        const FeatureMap& map = {},
                        const ReferenceOptions& options = {});

}  // namespace cnr
