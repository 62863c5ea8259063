#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "cjscope/jsmetrics.hpp"

namespace cjscope::jsmetrics::detail {

enum class TokenKind { Identifier, Keyword, Punctuator, Number, String, Regex, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string_view text;
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t end_line = 1;
    bool newline_before = false;

    bool is(std::string_view punct_or_keyword) const {
        return (kind == TokenKind::Punctuator || kind == TokenKind::Keyword) &&
               text == punct_or_keyword;
    }
};

struct LexerState {
    std::size_t pos = 0;
    std::size_t line = 1;
    std::size_t line_start = 0;
};

/// On-demand scanner. The parser asks for a regular expression explicitly
/// when it is at an operand position and sees `/` or `/=`.
class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    Token next();
    Token rescan_as_regex(const Token& slash);

    LexerState state() const { return state_; }
    void restore(const LexerState& s) { state_ = s; }

    [[noreturn]] void fail(const std::string& what, std::size_t line, std::size_t column) const;

private:
    bool skip_trivia();  // returns true when a line terminator was crossed
    Token make(TokenKind kind, std::size_t start, std::size_t line, std::size_t col) const;
    void scan_string(char quote);
    void scan_number();
    void scan_identifier();
    void advance_line();
    char peek(std::size_t ahead = 0) const {
        return state_.pos + ahead < src_.size() ? src_[state_.pos + ahead] : '\0';
    }

    std::string_view src_;
    LexerState state_;
};

bool is_keyword(std::string_view word);

}  // namespace cjscope::jsmetrics::detail
