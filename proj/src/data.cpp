#include "cnr/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "internal/text.hpp"

namespace cnr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd draw_features(int k, Rng& rng) {
  Eigen::VectorXd x(k);
  for (int j = 0; j < k; ++j) x(j) = rng.normal();
  return x;
}

}  // namespace

Dataset gen_lr(const LrTruth& truth, int n, Rng& rng) {
  if (n < 1) throw InvalidInput("gen_lr: n must be positive");
  if (!truth.w.allFinite() || !std::isfinite(truth.sigma) || truth.sigma < 0.0)
    throw InvalidInput("gen_lr: bad truth");
  const int k = static_cast<int>(truth.w.size());
  Dataset out;
  out.X.resize(n, k);
  out.y.resize(n);
  out.tag = "synth-lr";
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = draw_features(k, rng);
    out.X.row(i) = x;
    out.y(i) = truth.w.dot(x) + truth.sigma * rng.normal();
  }
  return out;
}

Dataset gen_mr(const MrTruth& truth, int n, Rng& rng) {
  if (n < 1) throw InvalidInput("gen_mr: n must be positive");
  if (!truth.a.allFinite() || !std::isfinite(truth.noise) || truth.noise < 0.0)
    throw InvalidInput("gen_mr: bad truth");
  const int k = static_cast<int>(truth.a.size());
  Dataset out;
  out.X.resize(n, k);
  out.y.resize(n);
  out.tag = "synth-mr";
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = draw_features(k, rng);
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    out.X.row(i) = x;
    out.y(i) = sign * truth.a.dot(x) + truth.noise * rng.normal();
  }
  return out;
}

Dataset gen_cnr(const CnrParams& truth, int n, Rng& rng, long* rejections) {
  if (n < 1) throw InvalidInput("gen_cnr: n must be positive");
  const int k = truth.feature_dim();
  Dataset out;
  out.X.resize(n, k);
  out.y.resize(n);
  out.tag = "synth-cnr";
  long rejected = 0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = draw_features(k, rng);
    int attempts = 0;
    while (!is_valid(truth, x)) {
      if (++attempts > 10000)
        throw InfeasiblePoint("gen_cnr: generating model invalid almost everywhere",
                              static_cast<std::size_t>(i));
      ++rejected;
      x = draw_features(k, rng);
    }
    out.X.row(i) = x;
    out.y(i) = sample(truth, x, rng);
  }
  if (rejections) *rejections = rejected;
  return out;
}

CnrParams random_cnr_truth(int feature_dim, const KnotGrid& grid, Rng& rng) {
  if (feature_dim < 1) throw InvalidInput("random_cnr_truth: feature_dim must be positive");
  const Dictionary dict = Dictionary::piecewise_linear(grid);
  const int d = dict.dim();
  const double root_k = std::sqrt(static_cast<double>(feature_dim));
  const double loc_range = 1.0 / root_k;
  const double slope_range = 0.5 / (3.0 * root_k);

  const auto uniform_on = [&rng](double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
  };

  Eigen::MatrixXd A(d, feature_dim);
  for (int c = 0; c < feature_dim; ++c) A(0, c) = uniform_on(-loc_range, loc_range);
  for (int r = 1; r < d; ++r)
    for (int c = 0; c < feature_dim; ++c) A(r, c) = uniform_on(-slope_range, slope_range);
  Eigen::VectorXd b(d);
  b(0) = uniform_on(-0.5, 0.5);
  for (int r = 1; r < d; ++r) b(r) = uniform_on(0.5, 2.0);
  return {dict, std::move(A), std::move(b), FeatureMap::identity()};
}

std::vector<double> load_series(const std::string& path, const std::string& column,
                                char delimiter, const std::string& missing_token) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("load_series: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("load_series: empty file " + path);
  detail::strip_cr(line);
  const auto header = detail::split_fields(line, delimiter);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) {
      col = i;
      break;
    }
  if (col == header.size())
    throw SchemaError("load_series: no column named '" + column + "' in " + path);

  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line, delimiter);
    if (col >= fields.size())
      throw ParseError("load_series: too few fields", lineno);
    const std::string_view f = fields[col];
    if (f == missing_token) {
      out.push_back(kNaN);
      continue;
    }
    double v = 0.0;
    if (!detail::parse_double(f, v))
      throw ParseError("load_series: bad numeric field '" + std::string(f) + "'", lineno);
    out.push_back(v);
  }
  return out;
}

Dataset windows(const std::vector<double>& series, int window_len, int count, Rng& rng) {
  if (window_len < 2) throw InvalidInput("windows: window_len must be at least 2");
  if (count < 1) throw InvalidInput("windows: count must be positive");
  const long size = static_cast<long>(series.size());
  if (size < window_len) throw InsufficientData("windows: series shorter than the window");
  const long offsets = size - window_len + 1;

  const auto window_clean = [&](long start) {
    for (long j = start; j < start + window_len; ++j)
      if (std::isnan(series[static_cast<std::size_t>(j)])) return false;
    return true;
  };
  bool any_clean = false;
  for (long o = 0; o < offsets && !any_clean; ++o) any_clean = window_clean(o);
  if (!any_clean)
    throw InsufficientData("windows: every window crosses a missing value");

  Dataset out;
  out.X.resize(count, window_len - 1);
  out.y.resize(count);
  out.tag = "windows";
  for (int i = 0; i < count; ++i) {
    long start;
    do {
      start = static_cast<long>(rng.below(static_cast<std::uint64_t>(offsets)));
    } while (!window_clean(start));
    for (int j = 0; j < window_len - 1; ++j)
      out.X(i, j) = series[static_cast<std::size_t>(start + j)];
    out.y(i) = series[static_cast<std::size_t>(start + window_len - 1)];
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, int n_test, Rng& rng) {
  validate(data);
  if (n_test < 1) throw InvalidInput("split: n_test must be positive");
  if (data.n() <= n_test)
    throw InsufficientData("split: need more rows than n_test");

  std::vector<int> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), 0);
  for (int i = data.n() - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[rng.below(static_cast<std::uint64_t>(i) + 1)]);

  const auto take = [&](int from, int len) {
    Dataset part;
    part.X.resize(len, data.k());
    part.y.resize(len);
    part.tag = data.tag;
    for (int i = 0; i < len; ++i) {
      part.X.row(i) = data.X.row(order[static_cast<std::size_t>(from + i)]);
      part.y(i) = data.y(order[static_cast<std::size_t>(from + i)]);
    }
    return part;
  };
  return {take(n_test, data.n() - n_test), take(0, n_test)};
}

void save_csv(const Dataset& data, const std::string& path) {
  validate(data);
  std::ofstream out(path);
  if (!out) throw InvalidInput("save_csv: cannot open " + path);
  for (int j = 0; j < data.k(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.k(); ++j)
      out << detail::format_double(data.X(i, j)) << ',';
    out << detail::format_double(data.y(i)) << '\n';
  }
  if (!out) throw InvalidInput("save_csv: write failed for " + path);
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("load_csv: empty file " + path);
  detail::strip_cr(line);
  const auto header = detail::split_fields(line, ',');
  if (header.size() < 2 || header.back() != "y")
    throw SchemaError("load_csv: expected header x1,...,xk,y");
  const int k = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < k; ++j)
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1))
      throw SchemaError("load_csv: expected header x1,...,xk,y");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line, ',');
    if (fields.size() != header.size())
      throw ParseError("load_csv: wrong field count", lineno);
    std::vector<double> row(header.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (!detail::parse_double(fields[j], row[j]))
        throw ParseError("load_csv: bad numeric field '" + std::string(fields[j]) + "'",
                         lineno);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InsufficientData("load_csv: no data rows in " + path);

  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), k);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.tag = path;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < k; ++j) out.X(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    out.y(static_cast<Eigen::Index>(i)) = rows[i].back();
  }
  return out;
}

}  // namespace cnr
