#include "cnr/experiments.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "internal/text.hpp"

namespace cnr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct TrialData {
  Dataset train, test;
  std::optional<LrTruth> lr_truth;
  std::optional<MrTruth> mr_truth;
  std::optional<CnrParams> cnr_truth;
};

Eigen::VectorXd draw_normal_vec(int k, Rng& rng) {
  Eigen::VectorXd v(k);
  for (int j = 0; j < k; ++j) v(j) = rng.normal();
  return v;
}

Dataset with_intercept(Dataset data) {
  data.X.conservativeResize(Eigen::NoChange, data.X.cols() + 1);
  data.X.col(data.X.cols() - 1).setOnes();
  return data;
}

TrialData make_trial_data(const TrialConfig& cfg, int n_train, Rng& rng,
                          const std::vector<double>* series) {
  if (n_train < 2) throw InvalidInput("run_trial: n_train must be at least 2");
  if (cfg.n_test < 1) throw InvalidInput("run_trial: n_test must be positive");
  const int total = n_train + cfg.n_test;

  TrialData td;
  Dataset all;
  switch (cfg.scenario) {
    case Scenario::SynthLr: {
      if (!(cfg.lr_sigma > 0.0))
        throw InvalidInput("run_trial: synth-lr needs a positive noise level");
      LrTruth truth{draw_normal_vec(cfg.feature_dim, rng), cfg.lr_sigma};
      all = gen_lr(truth, total, rng);
      td.lr_truth = std::move(truth);
      break;
    }
    case Scenario::SynthCnr: {
      CnrParams truth = random_cnr_truth(cfg.feature_dim, KnotGrid(cfg.truth_knots), rng);
      all = gen_cnr(truth, total, rng);
      td.cnr_truth = std::move(truth);
      break;
    }
    case Scenario::SynthMr: {
      if (!(cfg.mr_noise > 0.0))
        throw InvalidInput("run_trial: synth-mr needs a positive noise level");
      MrTruth truth{draw_normal_vec(cfg.feature_dim, rng), cfg.mr_noise};
      all = gen_mr(truth, total, rng);
      td.mr_truth = std::move(truth);
      break;
    }
    case Scenario::Household: {
      if (!series) throw InvalidInput("run_trial: household scenario needs a series");
      all = windows(*series, 10, total, rng);
      break;
    }
  }
  if (cfg.add_intercept) all = with_intercept(std::move(all));
  std::tie(td.train, td.test) = split(all, cfg.n_test, rng);
  return td;
}

// log(0.5 N(s, noise^2) + 0.5 N(-s, noise^2)) at y, kept in log space.
double mr_log_density(double s, double noise, double y) {
  const double d1 = (y - s) / noise;
  const double d2 = (y + s) / noise;
  const double m1 = -0.5 * d1 * d1;
  const double m2 = -0.5 * d2 * d2;
  const double hi = std::max(m1, m2);
  const double lse = hi + std::log(std::exp(m1 - hi) + std::exp(m2 - hi));
  return std::log(0.5) - std::log(noise) - 0.5 * kLog2Pi + lse;
}

double clairvoyant_nll(const TrialData& td) {
  const Dataset& test = td.test;
  double acc = 0.0;
  if (td.lr_truth) {
    const LrTruth& t = *td.lr_truth;
    // The intercept column, if any, is appended after the truth's features.
    for (int i = 0; i < test.n(); ++i) {
      const double mean = t.w.dot(test.X.row(i).head(t.w.size()));
      const double r = (test.y(i) - mean) / t.sigma;
      acc += 0.5 * r * r + std::log(t.sigma) + 0.5 * kLog2Pi;
    }
    return acc / test.n();
  }
  if (td.mr_truth) {
    const MrTruth& t = *td.mr_truth;
    for (int i = 0; i < test.n(); ++i)
      acc -= mr_log_density(t.a.dot(test.X.row(i).head(t.a.size())), t.noise, test.y(i));
    return acc / test.n();
  }
  if (td.cnr_truth) {
    const CnrParams& t = *td.cnr_truth;
    for (int i = 0; i < test.n(); ++i)
      acc -= log_density(t, test.X.row(i).head(t.feature_dim()).transpose(), test.y(i));
    return acc / test.n();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Scenario scenario_from_name(const std::string& name) {
  if (name == "synth-lr") return Scenario::SynthLr;
  if (name == "synth-cnr") return Scenario::SynthCnr;
  if (name == "synth-mr") return Scenario::SynthMr;
  if (name == "household") return Scenario::Household;
  throw InvalidInput("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::SynthLr: return "synth-lr";
    case Scenario::SynthCnr: return "synth-cnr";
    case Scenario::SynthMr: return "synth-mr";
    case Scenario::Household: return "household";
  }
  throw InvalidInput("unknown scenario value");
}

KnotGrid trial_knots(const TrialConfig& config, const Dataset& train,
                     const KnotGrid* truth_grid) {
  if (config.use_true_knots) {
    if (!truth_grid)
      throw InvalidInput("trial_knots: no generating grid to reuse");
    return *truth_grid;
  }
  std::vector<double> labels(train.y.data(), train.y.data() + train.n());
  return knots_from_quantiles(std::move(labels), config.quantiles);
}

TrialModels fit_trial_models(const TrialConfig& config, const Dataset& train,
                             const KnotGrid& grid) {
  LrModel lr = lr_fit(train);
  FitResult gr = fit_cnr(train, Dictionary::affine(), {}, config.admm);
  FitResult cnr = fit_cnr(train, Dictionary::piecewise_linear(grid), {}, config.admm);
  return {std::move(lr), std::move(gr.params), std::move(cnr.params),
          std::move(gr.diagnostics), std::move(cnr.diagnostics)};
}

ModelMetrics score_lr(const LrModel& model, const Dataset& test) {
  validate(test);
  if (test.n() == 0) throw InvalidInput("score_lr: empty test set");
  double ll = 0.0, se = 0.0;
  for (int i = 0; i < test.n(); ++i) {
    const Eigen::VectorXd x = test.X.row(i).transpose();
    ll += lr_log_density(model, x, test.y(i));
    const double r = test.y(i) - lr_predict(model, x);
    se += r * r;
  }
  return {-ll / test.n(), std::log(se / test.n()), 0.0};
}

ModelMetrics score_with_fallback(const CnrParams& params, const LrModel& lr,
                                 const Dataset& test) {
  validate(test);
  if (test.n() == 0) throw InvalidInput("score_with_fallback: empty test set");
  double ll = 0.0, se = 0.0;
  int invalid = 0;
  for (int i = 0; i < test.n(); ++i) {
    const Eigen::VectorXd x = test.X.row(i).transpose();
    const CoefVector u = coef_at(params, x);
    double pred;
    if (u.valid()) {
      ll += log_density(u, params.dict(), test.y(i));
      pred = posterior_mean(u, params.dict());
    } else {
      ++invalid;
      ll += lr_log_density(lr, x, test.y(i));
      pred = lr_predict(lr, x);
    }
    const double r = test.y(i) - pred;
    se += r * r;
  }
  return {-ll / test.n(), std::log(se / test.n()),
          static_cast<double>(invalid) / test.n()};
}

TrialReport run_trial(const TrialConfig& config, int n_train, int trial_index,
                      const std::vector<double>* series) {
  TrialReport rep;
  rep.seed = config.base_seed + static_cast<std::uint64_t>(trial_index);
  try {
    Rng rng(rep.seed);
    const TrialData td = make_trial_data(config, n_train, rng, series);
    const KnotGrid* truth_grid =
        td.cnr_truth ? &td.cnr_truth->dict().grid() : nullptr;
    const KnotGrid grid = trial_knots(config, td.train, truth_grid);
    const TrialModels models = fit_trial_models(config, td.train, grid);
    rep.lr = score_lr(models.lr, td.test);
    rep.gr = score_with_fallback(models.gr, models.lr, td.test);
    rep.cnr = score_with_fallback(models.cnr, models.lr, td.test);
    rep.clairvoyant_nll = clairvoyant_nll(td);
  } catch (const Error& e) {
    rep.excluded = true;
    rep.exclude_reason = e.what();
  }
  return rep;
}

std::vector<TrialReport> run_trials(const TrialConfig& config, int n_train,
                                    const std::vector<double>* series) {
  if (config.trials < 1) throw InvalidInput("run_trials: trials must be positive");
  std::vector<TrialReport> out(static_cast<std::size_t>(config.trials));
  const int workers = std::max(1, config.workers);
  if (workers == 1) {
    for (int t = 0; t < config.trials; ++t) out[static_cast<std::size_t>(t)] = run_trial(config, n_train, t, series);
    return out;
  }
  std::atomic<int> next{0};
  const auto drain = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= config.trials) return;
      out[static_cast<std::size_t>(t)] = run_trial(config, n_train, t, series);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int i = 0; i < workers - 1; ++i) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialReport>& reports,
                                    int n_train) {
  std::vector<const TrialReport*> kept;
  int excluded = 0;
  for (const auto& r : reports) {
    if (r.excluded)
      ++excluded;
    else
      kept.push_back(&r);
  }
  if (kept.empty()) throw InsufficientData("aggregate: no usable trials");

  const auto stats = [&](auto&& pick) {
    double mean = 0.0;
    for (const auto* r : kept) mean += pick(*r);
    mean /= static_cast<double>(kept.size());
    double var = 0.0;
    for (const auto* r : kept) {
      const double d = pick(*r) - mean;
      var += d * d;
    }
    var /= static_cast<double>(kept.size());  // population variance
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  double clair = 0.0;
  for (const auto* r : kept) clair += r->clairvoyant_nll;
  clair /= static_cast<double>(kept.size());

  std::vector<AggregateRow> rows;
  const auto push = [&](const char* name, auto&& metrics_of) {
    AggregateRow row;
    row.model = name;
    row.n_train = n_train;
    const auto nll = stats([&](const TrialReport& r) { return metrics_of(r).nll; });
    const auto lmse = stats([&](const TrialReport& r) { return metrics_of(r).log_mse; });
    double inv = 0.0;
    for (const auto* r : kept) inv += metrics_of(*r).invalid_fraction;
    row.nll_mean = nll.first;
    row.nll_std = nll.second;
    row.logmse_mean = lmse.first;
    row.logmse_std = lmse.second;
    row.invalid_frac = inv / static_cast<double>(kept.size());
    row.clairvoyant_nll = clair;
    row.excluded = excluded;
    rows.push_back(std::move(row));
  };
  push("lr", [](const TrialReport& r) -> const ModelMetrics& { return r.lr; });
  push("gr", [](const TrialReport& r) -> const ModelMetrics& { return r.gr; });
  push("cnr", [](const TrialReport& r) -> const ModelMetrics& { return r.cnr; });
  return rows;
}

DensityCurve density_curve(const CnrParams& params, const Eigen::VectorXd& x,
                           int grid_points, const LrModel* fallback) {
  if (grid_points < 2) throw InvalidInput("density_curve: need at least two grid points");
  DensityCurve out;
  out.y.reserve(static_cast<std::size_t>(grid_points));
  out.density.reserve(static_cast<std::size_t>(grid_points));

  const CoefVector u = coef_at(params, x);
  double lo, hi;
  if (u.valid()) {
    if (params.dict().is_affine()) {
      const double center = -u.mu / u.alphas(0);
      const double spread = 1.0 / u.alphas(0);
      lo = center - 4.0 * spread;
      hi = center + 4.0 * spread;
    } else {
      lo = params.dict().grid().first_point() - 4.0 / u.alphas(0);
      hi = params.dict().grid().last_point() + 4.0 / u.alphas(u.alphas.size() - 1);
    }
    for (int i = 0; i < grid_points; ++i) {
      const double y = lo + (hi - lo) * i / (grid_points - 1);
      out.y.push_back(y);
      out.density.push_back(density(u, params.dict(), y));
    }
    return out;
  }

  if (!fallback)
    throw InfeasiblePoint("density_curve: invalid at this x and no fallback model");
  out.lr_fallback = true;
  const double center = lr_predict(*fallback, x);
  const double spread = std::sqrt(fallback->sigma2);
  lo = center - 4.0 * spread;
  hi = center + 4.0 * spread;
  for (int i = 0; i < grid_points; ++i) {
    const double y = lo + (hi - lo) * i / (grid_points - 1);
    const double r = (y - center) / spread;
    out.y.push_back(y);
    out.density.push_back(std::exp(-0.5 * r * r) / (spread * std::sqrt(2.0 * M_PI)));
  }
  return out;
}

void write_rows_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << "model,n_train,nll_mean,nll_std,logmse_mean,logmse_std,invalid_frac,clairvoyant_nll\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.n_train << ',' << detail::format_double(r.nll_mean)
        << ',' << detail::format_double(r.nll_std) << ','
        << detail::format_double(r.logmse_mean) << ','
        << detail::format_double(r.logmse_std) << ','
        << detail::format_double(r.invalid_frac) << ','
        << detail::format_double(r.clairvoyant_nll) << '\n';
  }
}

void write_rows_json(const std::vector<AggregateRow>& rows, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"model", r.model},
                   {"n_train", r.n_train},
                   {"nll_mean", r.nll_mean},
                   {"nll_std", r.nll_std},
                   {"logmse_mean", r.logmse_mean},
                   {"logmse_std", r.logmse_std},
                   {"invalid_frac", r.invalid_frac},
                   {"clairvoyant_nll", r.clairvoyant_nll},
                   {"excluded", r.excluded}});
  }
  out << arr.dump(2) << '\n';
}

void write_trials_verbose(const std::vector<TrialReport>& reports, int n_train,
                          std::ostream& out) {
  for (std::size_t t = 0; t < reports.size(); ++t) {
    const auto& r = reports[t];
    out << "trial " << t << " n_train " << n_train << " seed " << r.seed;
    if (r.excluded) {
      out << " excluded: " << r.exclude_reason << '\n';
      continue;
    }
    out << " lr_nll " << r.lr.nll << " gr_nll " << r.gr.nll << " cnr_nll " << r.cnr.nll
        << " lr_logmse " << r.lr.log_mse << " gr_logmse " << r.gr.log_mse
        << " cnr_logmse " << r.cnr.log_mse << " cnr_invalid " << r.cnr.invalid_fraction;
    if (!std::isnan(r.clairvoyant_nll)) out << " clairvoyant " << r.clairvoyant_nll;
    out << '\n';
  }
}

}  // namespace cnr
