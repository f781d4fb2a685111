#pragma once

#include <string>
#include <vector>

namespace mvembed::cli {

/// Runs one `mvembed` invocation. `args` excludes the program name.
/// Returns the process exit code: 0 ok, 1 usage, 2 data, 3 numeric.
int run(const std::vector<std::string>& args);

}  // namespace mvembed::cli
