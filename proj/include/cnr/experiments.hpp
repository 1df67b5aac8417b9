#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "cnr/baselines.hpp"
#include "cnr/data.hpp"
#include "cnr/solver.hpp"

namespace cnr {

enum class Scenario { SynthLr, SynthCnr, SynthMr, Household };

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario scenario);

struct TrialConfig {
  Scenario scenario = Scenario::SynthLr;
  std::vector<int> n_train;
  int n_test = 500;
  int trials = 2000;
  std::vector<double> quantiles = {0.3, 0.5, 0.7};  // knot placement fractions
  bool use_true_knots = false;  // synth-cnr only: reuse the generator's grid
  AdmmConfig admm;
  std::uint64_t base_seed = 0;  // trial t runs on seed base_seed + t
  int feature_dim = 5;          // synthetic scenarios
  double lr_sigma = 1.0;
  double mr_noise = 0.2;
  std::vector<double> truth_knots = {-1.0, 0.0, 1.0};  // synth-cnr generator grid
  bool add_intercept = false;  // append a constant feature column
  int workers = 1;
};

struct ModelMetrics {
  double nll = 0.0;
  double log_mse = 0.0;          // natural log of the mean squared error
  double invalid_fraction = 0.0; // test points scored through the LR fallback
};

struct TrialReport {
  ModelMetrics lr, gr, cnr;
  double clairvoyant_nll = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  bool excluded = false;
  std::string exclude_reason;
};

// The per-trial fits, separated from data generation and scoring so tests
// can feed hand-built train/test pairs through the identical path.
struct TrialModels {
  LrModel lr;
  CnrParams gr;   // affine-dictionary fit
  CnrParams cnr;  // piecewise fit on the trial's knot grid
  FitDiagnostics gr_diag, cnr_diag;
};

// Knots for one trial: training-label quantiles, or the generating model's
// grid when the config asks for it.
KnotGrid trial_knots(const TrialConfig& config, const Dataset& train,
                     const KnotGrid* truth_grid);

TrialModels fit_trial_models(const TrialConfig& config, const Dataset& train,
                             const KnotGrid& grid);

// Mean negative log density and log mean squared prediction error over the
// test set. Points where the transformation model is invalid are scored
// with the LR baseline and counted in invalid_fraction.
ModelMetrics score_lr(const LrModel& model, const Dataset& test);
ModelMetrics score_with_fallback(const CnrParams& params, const LrModel& lr,
                                 const Dataset& test);

// One full generate / split / fit / score pass at the trial's own seed.
// Errors inside the trial mark it excluded with the reason; they are never
// silently dropped. `series` is required for the household scenario.
TrialReport run_trial(const TrialConfig& config, int n_train, int trial_index,
                      const std::vector<double>* series = nullptr);

// All trials at one training size, optionally across worker threads.
// Reports come back indexed by trial, independent of scheduling.
std::vector<TrialReport> run_trials(const TrialConfig& config, int n_train,
                                    const std::vector<double>* series = nullptr);

struct AggregateRow {
  std::string model;
  int n_train = 0;
  double nll_mean = 0.0, nll_std = 0.0;
  double logmse_mean = 0.0, logmse_std = 0.0;
  double invalid_frac = 0.0;
  double clairvoyant_nll = 0.0;
  int excluded = 0;  // trials dropped from the statistics
};

// Rows lr, gr, cnr (in that order) for one training size; population
// standard deviations. Excluded trials are counted but not averaged.
std::vector<AggregateRow> aggregate(const std::vector<TrialReport>& reports,
                                    int n_train);

struct DensityCurve {
  std::vector<double> y;
  std::vector<double> density;
  bool lr_fallback = false;
};

// The conditional density on an even grid spanning the support around the
// knots (four standard deviations past the outer knots). At an invalid x
// the LR fallback Gaussian is emitted and flagged; without a fallback model
// that raises InfeasiblePoint.
DensityCurve density_curve(const CnrParams& params, const Eigen::VectorXd& x,
                           int grid_points = 401, const LrModel* fallback = nullptr);

// model,n_train,nll_mean,... table in the two supported formats.
void write_rows_csv(const std::vector<AggregateRow>& rows, std::ostream& out);
void write_rows_json(const std::vector<AggregateRow>& rows, std::ostream& out);
void write_trials_verbose(const std::vector<TrialReport>& reports, int n_train,
                          std::ostream& out);

}  // namespace cnr
