#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "llmmc/rational.hpp"

namespace llmmc {

enum class ValueType { boolean, integer, rational };

std::string_view to_string(ValueType type);

/// Runtime value of an expression: a boolean or an exact number.
class Value {
public:
    Value() : data_(Rational{}) {}
    Value(bool b) : data_(b) {}                   // NOLINT(google-explicit-constructor)
    Value(Rational r) : data_(r) {}               // NOLINT(google-explicit-constructor)
    Value(std::int64_t i) : data_(Rational(i)) {}  // NOLINT(google-explicit-constructor)
    Value(int i) : data_(Rational(i)) {}           // NOLINT(google-explicit-constructor)

    bool is_bool() const noexcept { return std::holds_alternative<bool>(data_); }
    bool is_number() const noexcept { return std::holds_alternative<Rational>(data_); }

    /// Throws Error(type_mismatch) when the value has the other kind.
    bool as_bool() const;
    const Rational& as_number() const;
    /// Number that must be integral; throws Error(evaluation) otherwise.
    std::int64_t as_integer() const;

    std::string to_string() const;

    friend bool operator==(const Value&, const Value&) = default;

private:
    std::variant<bool, Rational> data_;
};

enum class UnaryOp { negate, logical_not };

enum class BinaryOp {
    add,
    subtract,
    multiply,
    divide,
    less,
    less_equal,
    greater,
    greater_equal,
    equal,
    not_equal,
    logical_and,
    logical_or,
    implies,
    iff,
};

enum class Function { min, max, mod, floor, ceil };

std::string_view symbol(UnaryOp op);
std::string_view symbol(BinaryOp op);
std::string_view name(Function fn);
std::optional<Function> function_from_name(std::string_view name);

struct ExprNode;

/// Immutable expression tree with shared structure. Copies are cheap.
class Expr {
public:
    enum class Kind { number, boolean, identifier, unary, binary, call, ternary };

    Expr() = default;

    /// `integer_literal` records whether the source spelled the number without
    /// a fractional part, which decides its static type.
    static Expr number(Rational value, bool integer_literal);
    static Expr boolean(bool value);
    static Expr identifier(std::string name);
    static Expr unary(UnaryOp op, Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr call(Function fn, std::vector<Expr> args);
    static Expr ternary(Expr condition, Expr then_expr, Expr else_expr);

    bool empty() const noexcept { return node_ == nullptr; }
    Kind kind() const;

    const Rational& number_value() const;
    bool integer_literal() const;
    bool boolean_value() const;
    const std::string& identifier_name() const;
    UnaryOp unary_op() const;
    BinaryOp binary_op() const;
    Function function() const;
    /// Operands: unary 1, binary 2, ternary 3 (condition, then, else), call n.
    const std::vector<Expr>& operands() const;

    /// Canonical concrete syntax; re-parses to an equal tree.
    std::string to_string() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
    const ExprNode& node() const;

    std::shared_ptr<const ExprNode> node_;
};

/// Resolves identifiers during evaluation. Returning nullopt means unknown.
using ValueLookup = std::function<std::optional<Value>(const std::string&)>;
using TypeLookup = std::function<std::optional<ValueType>(const std::string&)>;

/// Evaluates `expr`. Throws Error(unknown_identifier) for unresolved names,
/// Error(type_mismatch) on ill-typed operands, Error(evaluation) on division
/// or modulo by zero and overflow.
Value evaluate(const Expr& expr, const ValueLookup& lookup);

/// Evaluates `expr` if every identifier it mentions is in `constants`.
std::optional<Value> try_evaluate_constant(const Expr& expr, const std::map<std::string, Value>& constants);

/// Static type; throws Error(type_mismatch) or Error(unknown_identifier).
ValueType type_of(const Expr& expr, const TypeLookup& lookup);

void collect_identifiers(const Expr& expr, std::set<std::string>& out);

/// Replaces identifiers found in `replacements`.
Expr substitute(const Expr& expr, const std::map<std::string, Expr>& replacements);

/// Literal expression for a value (integers print without fraction).
Expr literal(const Value& value);

/// Calls `visit` on every subexpression, parents first.
void for_each_subexpression(const Expr& expr, const std::function<void(const Expr&)>& visit);

}  // namespace llmmc
