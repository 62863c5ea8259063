#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cjscope::cli {

/// Exit codes: 0 success, 1 input or usage error, 2 internal error.
int run(int argc, const char* const* argv);
int run(int argc, char** argv);

/// Same as run() but with explicit streams; used by tests.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace cjscope::cli
