#include "lexer.hpp"

#include <algorithm>
#include <array>

namespace cjscope::jsmetrics {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(message + " at " + std::to_string(line) + ":" + std::to_string(column)),
      line_(line),
      column_(column) {}

}  // namespace cjscope::jsmetrics

namespace cjscope::jsmetrics::detail {
namespace {

// `let` is contextual and handled by the parser; the strict-mode-only
// reserved words stay ordinary identifiers.
constexpr std::array<std::string_view, 35> kKeywords = {
    "break",  "case",   "catch",   "continue", "debugger",   "default", "delete",
    "do",     "else",   "finally", "for",      "function",   "if",      "in",
    "instanceof", "new", "return", "switch",   "this",       "throw",   "try",
    "typeof", "var",    "void",    "while",    "with",       "null",    "true",
    "false",  "class",  "const",   "enum",     "export",     "extends", "import"};

// Longest first so that maximal munch is a linear probe.
constexpr std::array<std::string_view, 52> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "=>", "==", "!=", "<=", ">=",
    "&&",   "||",  "++",  "--",  "+=",  "-=",  "*=",  "%=",  "&=", "|=", "^=", "<<", ">>",
    "/=",   "**",  "{",   "}",   "(",   ")",   "[",   "]",   ";",  ",",  "<",  ">",  "+",
    "-",    "*",   "%",   "&",   "|",   "^",   "!",   "~",   "?",  ":",  "=",  ".",  "/"};

bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80 || c == '\\';
}

bool ident_part(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_hex(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

void Lexer::fail(const std::string& what, std::size_t line, std::size_t column) const {
    throw ParseError(what, line, column);
}

void Lexer::advance_line() {
    ++state_.line;
    state_.line_start = state_.pos;
}

bool Lexer::skip_trivia() {
    bool crossed = false;
    while (state_.pos < src_.size()) {
        const char c = src_[state_.pos];
        if (c == '\n') {
            ++state_.pos;
            advance_line();
            crossed = true;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
            ++state_.pos;
        } else if (static_cast<unsigned char>(c) == 0xEF && peek(1) == '\xBB' && peek(2) == '\xBF') {
            state_.pos += 3;  // BOM
        } else if (static_cast<unsigned char>(c) == 0xC2 && peek(1) == '\xA0') {
            state_.pos += 2;  // NBSP
        } else if (c == '/' && peek(1) == '/') {
            while (state_.pos < src_.size() && src_[state_.pos] != '\n') ++state_.pos;
        } else if (c == '/' && peek(1) == '*') {
            const std::size_t line = state_.line;
            const std::size_t col = state_.pos - state_.line_start + 1;
            state_.pos += 2;
            for (;;) {
                if (state_.pos >= src_.size()) fail("unterminated comment", line, col);
                if (src_[state_.pos] == '*' && peek(1) == '/') {
                    state_.pos += 2;
                    break;
                }
                if (src_[state_.pos] == '\n') {
                    ++state_.pos;
                    advance_line();
                    crossed = true;
                } else {
                    ++state_.pos;
                }
            }
        } else {
            break;
        }
    }
    return crossed;
}

Token Lexer::make(TokenKind kind, std::size_t start, std::size_t line, std::size_t col) const {
    Token t;
    t.kind = kind;
    t.text = src_.substr(start, state_.pos - start);
    t.offset = start;
    t.line = line;
    t.column = col;
    t.end_line = state_.line;
    return t;
}

void Lexer::scan_string(char quote) {
    const std::size_t line = state_.line;
    const std::size_t col = state_.pos - state_.line_start + 1;
    ++state_.pos;
    for (;;) {
        if (state_.pos >= src_.size()) fail("unterminated string literal", line, col);
        const char c = src_[state_.pos];
        if (c == quote) {
            ++state_.pos;
            return;
        }
        if (c == '\n') fail("unterminated string literal", line, col);
        if (c == '\\') {
            ++state_.pos;
            if (state_.pos >= src_.size()) fail("unterminated string literal", line, col);
            if (src_[state_.pos] == '\r' && peek(1) == '\n') ++state_.pos;
            if (src_[state_.pos] == '\n') {
                ++state_.pos;
                advance_line();
                continue;
            }
        }
        ++state_.pos;
    }
}

void Lexer::scan_number() {
    const std::size_t line = state_.line;
    const std::size_t col = state_.pos - state_.line_start + 1;
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
        state_.pos += 2;
        if (!is_hex(peek())) fail("malformed hexadecimal literal", line, col);
        while (is_hex(peek())) ++state_.pos;
    } else {
        while (is_digit(peek())) ++state_.pos;
        if (peek() == '.') {
            ++state_.pos;
            while (is_digit(peek())) ++state_.pos;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++state_.pos;
            if (peek() == '+' || peek() == '-') ++state_.pos;
            if (!is_digit(peek())) fail("malformed exponent", line, col);
            while (is_digit(peek())) ++state_.pos;
        }
    }
    if (ident_start(peek())) fail("identifier directly after number", line, col);
}

void Lexer::scan_identifier() {
    while (state_.pos < src_.size()) {
        const char c = src_[state_.pos];
        if (c == '\\') {
            // \uXXXX escape inside an identifier
            if (peek(1) != 'u') break;
            state_.pos += 2;
            for (int i = 0; i < 4 && is_hex(peek()); ++i) ++state_.pos;
        } else if (ident_part(c)) {
            ++state_.pos;
        } else {
            break;
        }
    }
}

Token Lexer::next() {
    const bool crossed = skip_trivia();
    const std::size_t start = state_.pos;
    const std::size_t line = state_.line;
    const std::size_t col = start - state_.line_start + 1;

    Token tok;
    if (start >= src_.size()) {
        tok = make(TokenKind::End, start, line, col);
    } else {
        const char c = src_[start];
        if (ident_start(c)) {
            scan_identifier();
            tok = make(TokenKind::Identifier, start, line, col);
            if (is_keyword(tok.text)) tok.kind = TokenKind::Keyword;
        } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
            scan_number();
            tok = make(TokenKind::Number, start, line, col);
        } else if (c == '"' || c == '\'') {
            scan_string(c);
            tok = make(TokenKind::String, start, line, col);
        } else if (c == '`') {
            fail("template literals are not supported", line, col);
        } else {
            const std::string_view rest = src_.substr(start);
            const auto it = std::find_if(kPunctuators.begin(), kPunctuators.end(),
                                         [&](std::string_view p) { return rest.starts_with(p); });
            if (it == kPunctuators.end()) fail(std::string("unexpected character '") + c + "'", line, col);
            if (*it == "...") fail("spread syntax is not supported", line, col);
            state_.pos += it->size();
            tok = make(TokenKind::Punctuator, start, line, col);
        }
    }
    tok.newline_before = crossed;
    return tok;
}

Token Lexer::rescan_as_regex(const Token& slash) {
    state_.pos = slash.offset + 1;
    state_.line = slash.line;
    state_.line_start = slash.offset + 1 - slash.column;
    bool in_class = false;
    for (;;) {
        if (state_.pos >= src_.size() || src_[state_.pos] == '\n')
            fail("unterminated regular expression", slash.line, slash.column);
        const char c = src_[state_.pos];
        if (c == '\\') {
            state_.pos += 2;
            continue;
        }
        ++state_.pos;
        if (c == '[') in_class = true;
        else if (c == ']') in_class = false;
        else if (c == '/' && !in_class) break;
    }
    while (state_.pos < src_.size() && ident_part(src_[state_.pos])) ++state_.pos;
    Token tok = make(TokenKind::Regex, slash.offset, slash.line, slash.column);
    tok.newline_before = slash.newline_before;
    return tok;
}

}  // namespace cjscope::jsmetrics::detail
