#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ast.hpp"

namespace cjscope::jsmetrics::detail {

/// One control-flow graph per function body (component 0 is top-level
/// code). Parallel edges are kept: an `if` without `else` whose branch is
/// empty yields two edges between the same pair of nodes.
struct FlowGraph {
    std::size_t nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t entry = 0;
    std::size_t exit = 0;
};

std::vector<FlowGraph> build_flow_graphs(const Program& program);

}  // namespace cjscope::jsmetrics::detail
