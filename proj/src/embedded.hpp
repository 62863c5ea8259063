#pragma once

#include <string_view>

namespace cjscope::embedded {

/// Contents of a file under data/, compiled into the library. Throws
/// std::out_of_range for unknown names.
std::string_view lookup(std::string_view name);

}  // namespace cjscope::embedded
