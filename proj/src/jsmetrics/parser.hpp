#pragma once

#include <string_view>
#include <vector>

#include "ast.hpp"
#include "lexer.hpp"

namespace cjscope::jsmetrics::detail {

struct ParseResult {
    Program program;
    /// Every token consumed by the grammar, in source order. Property names
    /// and contextual keywords carry the kind they played in the parse.
    std::vector<Token> tokens;
};

ParseResult parse(std::string_view source);

}  // namespace cjscope::jsmetrics::detail
