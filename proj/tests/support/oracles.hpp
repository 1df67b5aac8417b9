#pragma once

// Slow, independent reimplementations used only to cross-check the library:
// numeric quadrature for moments of the fitted conditional law, the
// per-segment density written straight from the piecewise-linear transform,
// and small statistics helpers. Nothing here may call the closed forms under
// test.

#include <functional>
#include <vector>

#include "cnr/dictionary.hpp"
#include "cnr/model.hpp"

namespace oracle {

// Adaptive Simpson quadrature to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-11, int max_depth = 64);

// Density of y at one feature point, written per segment: the transform is
// mu + alpha_0 (y - p_0) left of the grid, mu + cum_j + alpha_{j+1} (y - p_j)
// on [p_j, p_{j+1}), and mu + cum_L + alpha_{L+1} (y - p_L) to the right;
// the density is the active slope times the standard normal pdf of that.
double segment_density(const cnr::CoefVector& u, const cnr::KnotGrid& grid, double y);

// E[y] under the same law by quadrature over each segment plus numerically
// integrated tails cut where the transform passes +-40.
double quadrature_posterior_mean(const cnr::CoefVector& u, const cnr::KnotGrid& grid,
                                 double tol = 1e-10);

// Total mass by the same segmentation; should be 1.
double quadrature_total_mass(const cnr::CoefVector& u, const cnr::KnotGrid& grid,
                             double tol = 1e-10);

// Two-sided Kolmogorov-Smirnov distance between a sample and a cdf.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Asymptotic KS critical value at the 1% level.
double ks_critical_1pct(std::size_t n);

// Central difference (f(x+h) - f(x-h)) / 2h.
double central_diff(const std::function<double(double)>& f, double x, double h);

// Spearman rank correlation; assumes no ties (continuous inputs).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
