#pragma once

#include <string>

#include "cnr/model.hpp"
#include "cnr/solver.hpp"

namespace cnr {

// JSON form of a fitted model: dictionary variant (with knots when
// piecewise), A in row-major order, b, the feature width and the feature
// map name. Doubles are written in shortest round-trip form, so
// save -> load reproduces the parameters bit for bit.
std::string to_json_string(const CnrParams& params);
CnrParams params_from_json_string(const std::string& text);

void save_params(const CnrParams& params, const std::string& path);
CnrParams load_params(const std::string& path);

std::string to_json_string(const FitDiagnostics& diag);

}  // namespace cnr
