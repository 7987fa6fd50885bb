#pragma once

// Tokenizer and expression grammar shared by the model and property parsers.

#include <string>
#include <string_view>
#include <vector>

#include "llmmc/error.hpp"
#include "llmmc/expr.hpp"

namespace llmmc::detail {

enum class TokenKind { identifier, number, string, symbol, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    SourceLocation where;
    std::size_t offset = 0;  // byte offset of the first character
    std::size_t length = 0;
};

/// Splits `source` into tokens. `//` starts a comment running to end of line.
/// Throws Error(syntax) on characters outside the grammar.
std::vector<Token> tokenize(std::string_view source);

class TokenStream {
public:
    TokenStream(std::string_view source, std::vector<Token> tokens);

    const Token& peek(std::size_t ahead = 0) const;
    const Token& next();
    bool at_end() const { return peek().kind == TokenKind::end; }

    bool is_symbol(std::string_view sym, std::size_t ahead = 0) const;
    bool is_keyword(std::string_view word, std::size_t ahead = 0) const;
    bool accept_symbol(std::string_view sym);
    bool accept_keyword(std::string_view word);

    const Token& expect_symbol(std::string_view sym);
    void expect_keyword(std::string_view word);
    std::string expect_identifier(std::string_view what);
    std::string expect_string(std::string_view what);

    [[noreturn]] void fail(const std::string& expected) const;
    [[noreturn]] void fail_at(const Token& token, ErrorKind kind, const std::string& message) const;

    std::string_view source() const { return source_; }

    /// Bounds recursion depth on pathological input such as "((((...".
    class DepthGuard {
    public:
        explicit DepthGuard(TokenStream& ts);
        ~DepthGuard() { --ts_.depth_; }
        DepthGuard(const DepthGuard&) = delete;
        DepthGuard& operator=(const DepthGuard&) = delete;

    private:
        TokenStream& ts_;
    };

private:
    std::size_t depth_ = 0;
    std::string_view source_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

/// Words that cannot name constants, variables, modules or actions.
bool is_reserved_word(std::string_view word);

/// Parses an arithmetic/boolean expression starting at the current token.
Expr parse_expression(TokenStream& tokens);

std::string describe(const Token& token);

}  // namespace llmmc::detail
