#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace llmmc {

/// Exact fraction over 64-bit integers, always normalized (gcd 1, positive
/// denominator). Arithmetic that overflows throws Error(evaluation).
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    bool is_integer() const noexcept { return den_ == 1; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::int64_t floor() const noexcept;
    std::int64_t ceil() const noexcept;

    /// Parses "12", "0.25", "1e-3", "2.5E2". Returns nullopt for anything else.
    static std::optional<Rational> parse_decimal(std::string_view text);

    /// Finite decimal rendering when the denominator is 2^a*5^b, otherwise "n/d".
    std::string to_string() const;
    /// True when to_string() yields a plain decimal.
    bool has_finite_decimal() const noexcept;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational operator-() const;

    friend bool operator==(const Rational& a, const Rational& b) noexcept = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Floored modulo, result carries the sign of the divisor. Divisor must be nonzero.
std::int64_t floored_mod(std::int64_t a, std::int64_t b);

}  // namespace llmmc
