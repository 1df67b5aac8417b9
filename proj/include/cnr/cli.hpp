#pragma once

#include <string>
#include <vector>

namespace cnr {

// The command-line entry point, callable in-process. `args` excludes the
// program name. Returns 0 on success, 2 for usage errors (bad flags or
// values), 1 for data or runtime failures.
int cli_main(const std::vector<std::string>& args);

}  // namespace cnr
