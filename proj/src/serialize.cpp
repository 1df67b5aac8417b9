#include "cnr/serialize.hpp"

#include <fstream>
#include <vector>

#include <json.hpp>

namespace cnr {

namespace {

using nlohmann::json;

json dict_to_json(const Dictionary& dict) {
  if (dict.is_affine()) return {{"variant", "affine"}};
  return {{"variant", "piecewise_linear"}, {"knots", dict.grid().points()}};
}

Dictionary dict_from_json(const json& j) {
  if (!j.is_object() || !j.contains("variant") || !j.at("variant").is_string())
    throw SchemaError("params json: missing dictionary variant");
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "affine") return Dictionary::affine();
  if (variant == "piecewise_linear") {
    if (!j.contains("knots")) throw SchemaError("params json: piecewise dictionary needs knots");
    return Dictionary::piecewise_linear(KnotGrid(j.at("knots").get<std::vector<double>>()));
  }
  throw SchemaError("params json: unknown dictionary variant '" + variant + "'");
}

}  // namespace

std::string to_json_string(const CnrParams& params) {
  const int d = params.dim();
  const int k = params.feature_dim();
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(d) * static_cast<std::size_t>(k));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < k; ++c) a.push_back(params.coef()(r, c));
  const std::vector<double> b(params.offset().data(), params.offset().data() + d);

  const json j = {{"dict", dict_to_json(params.dict())},
                  {"k", k},
                  {"A", a},
                  {"b", b},
                  {"feature_map", params.feature_map().name()}};
  return j.dump();
}

CnrParams params_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("params json: unparsable: ") + e.what());
  }
  try {
    Dictionary dict = dict_from_json(j.at("dict"));
    const int k = j.at("k").get<int>();
    const auto a = j.at("A").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    const FeatureMap map = FeatureMap::from_name(j.at("feature_map").get<std::string>());
    const int d = dict.dim();
    if (k < 0 || a.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(k) ||
        b.size() != static_cast<std::size_t>(d))
      throw SchemaError("params json: A/b sizes disagree with the dictionary");
    Eigen::MatrixXd A(d, k);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < k; ++c)
        A(r, c) = a[static_cast<std::size_t>(r) * static_cast<std::size_t>(k) +
                    static_cast<std::size_t>(c)];
    Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), d);
    return {std::move(dict), std::move(A), std::move(bv), map};
  } catch (const json::exception& e) {
    throw SchemaError(std::string("params json: bad field: ") + e.what());
  }
}

void save_params(const CnrParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("save_params: cannot open " + path);
  out << to_json_string(params) << '\n';
  if (!out) throw InvalidInput("save_params: write failed for " + path);
}

CnrParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("load_params: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return params_from_json_string(text);
}

std::string to_json_string(const FitDiagnostics& diag) {
  const nlohmann::json j = {{"iterations", diag.iterations},
                            {"primal_residual", diag.primal_residual},
                            {"dual_residual", diag.dual_residual},
                            {"converged", diag.converged},
                            {"objective_trace", diag.objective_trace}};
  return j.dump();
}

}  // namespace cnr
