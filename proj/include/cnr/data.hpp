#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "cnr/dataset.hpp"
#include "cnr/dictionary.hpp"
#include "cnr/errors.hpp"
#include "cnr/model.hpp"
#include "cnr/rng.hpp"

namespace cnr {

// y = w.x + sigma * noise with standard normal features.
struct LrTruth {
  Eigen::VectorXd w;
  double sigma = 1.0;
};

// y = +-(a.x) + noise * eps with a fair sign flip per sample; the classic
// two-branch mirrored regression.
struct MrTruth {
  Eigen::VectorXd a;
  double noise = 0.2;
};

Dataset gen_lr(const LrTruth& truth, int n, Rng& rng);
Dataset gen_mr(const MrTruth& truth, int n, Rng& rng);

// Labels drawn from a transformation model by pushing standard normals
// through the inverse transform. Feature points where the truth is invalid
// are redrawn; the rejection count (not rate) is written to *rejections
// when given.
Dataset gen_cnr(const CnrParams& truth, int n, Rng& rng, long* rejections = nullptr);

// A random generating model whose slopes stay positive for typical feature
// draws: offset slope entries uniform on [0.5, 2.0], coefficient slope rows
// uniform on +-0.5/(3 sqrt(k)); the offset constant is uniform on
// [-0.5, 0.5] and the location row of A uniform on +-1/sqrt(k).
CnrParams random_cnr_truth(int feature_dim, const KnotGrid& grid, Rng& rng);

// One numeric column of a delimited text file, header required. Values
// equal to missing_token come back as quiet NaN; anything else that fails
// to parse raises ParseError with its 1-based line number.
std::vector<double> load_series(const std::string& path,
                                const std::string& column = "Global_active_power",
                                char delimiter = ';',
                                const std::string& missing_token = "?");

// `count` windows of `window_len` consecutive series values drawn with
// replacement at uniform offsets; windows touching a missing value are
// redrawn. The first window_len - 1 values become the feature row and the
// last becomes the label. Raises InsufficientData if no clean window exists.
Dataset windows(const std::vector<double>& series, int window_len, int count, Rng& rng);

// Random-order split into {train, test} with exactly n_test test rows.
std::pair<Dataset, Dataset> split(const Dataset& data, int n_test, Rng& rng);

// Plain CSV with header x1,...,xk,y; doubles round-trip exactly.
void save_csv(const Dataset& data, const std::string& path);
Dataset load_csv(const std::string& path);

}  // namespace cnr
