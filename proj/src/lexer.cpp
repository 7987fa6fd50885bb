#include "lexer.hpp"

#include <array>
#include <cctype>

namespace llmmc::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Longest symbols first so that maximal munch works with a linear scan.
constexpr std::array<std::string_view, 31> kSymbols = {
    "<=>", "=?", "..", "->", "<=", ">=", "!=", "=>", "[", "]", "(", ")", "{", "}", ";", ":",
    ",",   "'",  "+",  "-",  "*",  "/",  "<",  ">",  "=", "&", "|", "!", "?", "\"", "#",
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
    std::vector<Token> out;
    std::size_t i = 0;
    std::size_t line = 1;
    std::size_t line_start = 0;
    auto here = [&](std::size_t at) { return SourceLocation{line, at - line_start + 1}; };

    while (i < source.size()) {
        char c = source[i];
        if (c == '\n') {
            ++i;
            ++line;
            line_start = i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
            while (i < source.size() && source[i] != '\n') ++i;
            continue;
        }
        Token tok;
        tok.offset = i;
        tok.where = here(i);
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < source.size() && ident_char(source[j])) ++j;
            tok.kind = TokenKind::identifier;
            tok.text = std::string(source.substr(i, j - i));
            i = j;
        } else if (digit(c) || (c == '.' && i + 1 < source.size() && digit(source[i + 1]))) {
            std::size_t j = i;
            while (j < source.size() && digit(source[j])) ++j;
            // A '.' belongs to the number only when followed by a digit ("0..3" is a range).
            if (j + 1 < source.size() && source[j] == '.' && digit(source[j + 1])) {
                ++j;
                while (j < source.size() && digit(source[j])) ++j;
            }
            if (j < source.size() && (source[j] == 'e' || source[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < source.size() && (source[k] == '+' || source[k] == '-')) ++k;
                if (k < source.size() && digit(source[k])) {
                    while (k < source.size() && digit(source[k])) ++k;
                    j = k;
                }
            }
            tok.kind = TokenKind::number;
            tok.text = std::string(source.substr(i, j - i));
            i = j;
        } else if (c == '"') {
            std::size_t j = i + 1;
            while (j < source.size() && source[j] != '"' && source[j] != '\n') ++j;
            if (j >= source.size() || source[j] != '"') {
                throw Error(ErrorKind::syntax, "unterminated string literal", tok.where);
            }
            tok.kind = TokenKind::string;
            tok.text = std::string(source.substr(i + 1, j - i - 1));
            i = j + 1;
        } else {
            bool matched = false;
            for (std::string_view sym : kSymbols) {
                if (sym == "\"") continue;
                if (source.substr(i, sym.size()) == sym) {
                    tok.kind = TokenKind::symbol;
                    tok.text = std::string(sym);
                    i += sym.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                std::string shown = std::isprint(static_cast<unsigned char>(c))
                                        ? std::string(1, c)
                                        : "\\x" + std::string(1, "0123456789abcdef"[(c >> 4) & 0xF]) +
                                              std::string(1, "0123456789abcdef"[c & 0xF]);
                throw Error(ErrorKind::syntax, "unexpected character '" + shown + "'", tok.where);
            }
        }
        tok.length = i - tok.offset;
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = TokenKind::end;
    end.offset = source.size();
    end.where = here(source.size());
    out.push_back(end);
    return out;
}

std::string describe(const Token& token) {
    switch (token.kind) {
        case TokenKind::end: return "end of input";
        case TokenKind::string: return "\"" + token.text + "\"";
        default: return "'" + token.text + "'";
    }
}

TokenStream::TokenStream(std::string_view source, std::vector<Token> tokens)
    : source_(source), tokens_(std::move(tokens)) {}

const Token& TokenStream::peek(std::size_t ahead) const {
    std::size_t at = pos_ + ahead;
    return at < tokens_.size() ? tokens_[at] : tokens_.back();
}

const Token& TokenStream::next() {
    const Token& t = peek();
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
}

TokenStream::DepthGuard::DepthGuard(TokenStream& ts) : ts_(ts) {
    constexpr std::size_t kMaxDepth = 256;
    if (++ts_.depth_ > kMaxDepth) {
        --ts_.depth_;
        ts_.fail_at(ts_.peek(), ErrorKind::syntax, "expression nested too deeply");
    }
}

bool TokenStream::is_symbol(std::string_view sym, std::size_t ahead) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::symbol && t.text == sym;
}

bool TokenStream::is_keyword(std::string_view word, std::size_t ahead) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::identifier && t.text == word;
}

bool TokenStream::accept_symbol(std::string_view sym) {
    if (!is_symbol(sym)) return false;
    next();
    return true;
}

bool TokenStream::accept_keyword(std::string_view word) {
    if (!is_keyword(word)) return false;
    next();
    return true;
}

const Token& TokenStream::expect_symbol(std::string_view sym) {
    if (!is_symbol(sym)) fail("'" + std::string(sym) + "'");
    return next();
}

void TokenStream::expect_keyword(std::string_view word) {
    if (!is_keyword(word)) fail("'" + std::string(word) + "'");
    next();
}

std::string TokenStream::expect_identifier(std::string_view what) {
    const Token& t = peek();
    if (t.kind != TokenKind::identifier) fail(std::string(what));
    if (is_reserved_word(t.text)) {
        fail_at(t, ErrorKind::syntax, "reserved word '" + t.text + "' cannot be used as " + std::string(what));
    }
    return next().text;
}

std::string TokenStream::expect_string(std::string_view what) {
    if (peek().kind != TokenKind::string) fail(std::string(what));
    return next().text;
}

void TokenStream::fail(const std::string& expected) const {
    const Token& t = peek();
    throw Error(ErrorKind::syntax, "expected " + expected + ", found " + describe(t), t.where);
}

void TokenStream::fail_at(const Token& token, ErrorKind kind, const std::string& message) const {
    throw Error(kind, message, token.where);
}

bool is_reserved_word(std::string_view word) {
    static constexpr std::array<std::string_view, 29> kReserved = {
        "mdp",     "dtmc",    "ctmc",      "pta",     "nondeterministic", "probabilistic", "stochastic", "module",
        "endmodule", "const", "int",       "double",  "bool",             "init",          "endinit",    "label",
        "rewards", "endrewards", "true",   "false",   "min",              "max",           "mod",        "floor",
        "ceil",    "formula", "global",    "system",  "endsystem",
    };
    for (std::string_view r : kReserved) {
        if (r == word) return true;
    }
    return false;
}

namespace {

Expr parse_ternary(TokenStream& ts);

Expr parse_primary(TokenStream& ts) {
    const Token& t = ts.peek();
    if (t.kind == TokenKind::number) {
        std::optional<Rational> value = Rational::parse_decimal(t.text);
        if (!value) ts.fail_at(t, ErrorKind::syntax, "malformed or out-of-range number '" + t.text + "'");
        bool integer = t.text.find_first_of(".eE") == std::string::npos;
        ts.next();
        return Expr::number(*value, integer);
    }
    if (ts.accept_symbol("(")) {
        Expr inner = parse_ternary(ts);
        ts.expect_symbol(")");
        return inner;
    }
    if (t.kind == TokenKind::identifier) {
        if (t.text == "true" || t.text == "false") {
            bool v = t.text == "true";
            ts.next();
            return Expr::boolean(v);
        }
        if (std::optional<Function> fn = function_from_name(t.text)) {
            const Token& fn_token = ts.next();
            ts.expect_symbol("(");
            std::vector<Expr> args;
            args.push_back(parse_ternary(ts));
            while (ts.accept_symbol(",")) args.push_back(parse_ternary(ts));
            ts.expect_symbol(")");
            std::size_t want_min = (*fn == Function::floor || *fn == Function::ceil) ? 1 : 2;
            bool exact = *fn != Function::min && *fn != Function::max;
            if (args.size() < want_min || (exact && args.size() != want_min)) {
                ts.fail_at(fn_token, ErrorKind::syntax, "wrong number of arguments to " + fn_token.text);
            }
            return Expr::call(*fn, std::move(args));
        }
        if (is_reserved_word(t.text)) ts.fail("an expression");
        std::string ident = ts.next().text;
        return Expr::identifier(std::move(ident));
    }
    ts.fail("an expression");
}

Expr parse_unary(TokenStream& ts) {
    TokenStream::DepthGuard guard(ts);
    if (ts.accept_symbol("-")) return Expr::unary(UnaryOp::negate, parse_unary(ts));
    return parse_primary(ts);
}

Expr parse_multiplicative(TokenStream& ts) {
    Expr lhs = parse_unary(ts);
    for (;;) {
        if (ts.accept_symbol("*")) {
            lhs = Expr::binary(BinaryOp::multiply, lhs, parse_unary(ts));
        } else if (ts.accept_symbol("/")) {
            lhs = Expr::binary(BinaryOp::divide, lhs, parse_unary(ts));
        } else {
            return lhs;
        }
    }
}

Expr parse_additive(TokenStream& ts) {
    Expr lhs = parse_multiplicative(ts);
    for (;;) {
        if (ts.accept_symbol("+")) {
            lhs = Expr::binary(BinaryOp::add, lhs, parse_multiplicative(ts));
        } else if (ts.accept_symbol("-")) {
            lhs = Expr::binary(BinaryOp::subtract, lhs, parse_multiplicative(ts));
        } else {
            return lhs;
        }
    }
}

Expr parse_relational(TokenStream& ts) {
    Expr lhs = parse_additive(ts);
    static constexpr std::pair<std::string_view, BinaryOp> kOps[] = {
        {"<=", BinaryOp::less_equal}, {">=", BinaryOp::greater_equal}, {"<", BinaryOp::less}, {">", BinaryOp::greater}};
    for (const auto& [sym, op] : kOps) {
        if (ts.accept_symbol(sym)) return Expr::binary(op, lhs, parse_additive(ts));
    }
    return lhs;
}

Expr parse_equality(TokenStream& ts) {
    Expr lhs = parse_relational(ts);
    if (ts.accept_symbol("=")) return Expr::binary(BinaryOp::equal, lhs, parse_relational(ts));
    if (ts.accept_symbol("!=")) return Expr::binary(BinaryOp::not_equal, lhs, parse_relational(ts));
    return lhs;
}

Expr parse_not(TokenStream& ts) {
    TokenStream::DepthGuard guard(ts);
    if (ts.accept_symbol("!")) return Expr::unary(UnaryOp::logical_not, parse_not(ts));
    return parse_equality(ts);
}

Expr parse_and(TokenStream& ts) {
    Expr lhs = parse_not(ts);
    while (ts.accept_symbol("&")) lhs = Expr::binary(BinaryOp::logical_and, lhs, parse_not(ts));
    return lhs;
}

Expr parse_or(TokenStream& ts) {
    Expr lhs = parse_and(ts);
    while (ts.accept_symbol("|")) lhs = Expr::binary(BinaryOp::logical_or, lhs, parse_and(ts));
    return lhs;
}

Expr parse_implies(TokenStream& ts) {
    Expr lhs = parse_or(ts);
    while (ts.accept_symbol("=>")) lhs = Expr::binary(BinaryOp::implies, lhs, parse_or(ts));
    return lhs;
}

Expr parse_iff(TokenStream& ts) {
    Expr lhs = parse_implies(ts);
    while (ts.accept_symbol("<=>")) lhs = Expr::binary(BinaryOp::iff, lhs, parse_implies(ts));
    return lhs;
}

Expr parse_ternary(TokenStream& ts) {
    TokenStream::DepthGuard guard(ts);
    Expr cond = parse_iff(ts);
    if (!ts.accept_symbol("?")) return cond;
    Expr then_expr = parse_ternary(ts);
    ts.expect_symbol(":");
    Expr else_expr = parse_ternary(ts);
    return Expr::ternary(cond, then_expr, else_expr);
}

}  // namespace

Expr parse_expression(TokenStream& tokens) { return parse_ternary(tokens); }

}  // namespace llmmc::detail
