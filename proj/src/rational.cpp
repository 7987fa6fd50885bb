#include "llmmc/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>

#include "llmmc/error.hpp"

namespace llmmc {

namespace {

using wide = __int128;

[[noreturn]] void overflow() { throw Error(ErrorKind::evaluation, "arithmetic overflow in rational expression"); }

std::int64_t narrow(wide v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        overflow();
    }
    return static_cast<std::int64_t>(v);
}

wide wide_gcd(wide a, wide b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational make(wide num, wide den) {
    if (den == 0) {
        throw Error(ErrorKind::evaluation, "division by zero");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    wide g = wide_gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw Error(ErrorKind::evaluation, "division by zero");
    }
    wide n = num;
    wide d = den;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    wide g = wide_gcd(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num_ = narrow(n);
    den_ = narrow(d);
}

std::int64_t Rational::floor() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) {
        --q;
    }
    return q;
}

std::int64_t Rational::ceil() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) {
        ++q;
    }
    return q;
}

std::optional<Rational> Rational::parse_decimal(std::string_view text) {
    std::size_t i = 0;
    wide mantissa = 0;
    int scale = 0;
    bool any_digit = false;
    constexpr wide limit = static_cast<wide>(std::numeric_limits<std::int64_t>::max());
    auto push_digit = [&](char c) {
        mantissa = mantissa * 10 + (c - '0');
        return mantissa <= limit;
    };
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        if (!push_digit(text[i])) return std::nullopt;
        any_digit = true;
        ++i;
    }
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (!push_digit(text[i])) return std::nullopt;
            any_digit = true;
            ++scale;
            ++i;
        }
    }
    if (!any_digit) return std::nullopt;
    int exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool negative = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            negative = text[i] == '-';
            ++i;
        }
        bool exp_digit = false;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            exponent = exponent * 10 + (text[i] - '0');
            if (exponent > 30) return std::nullopt;
            exp_digit = true;
            ++i;
        }
        if (!exp_digit) return std::nullopt;
        if (negative) exponent = -exponent;
    }
    if (i != text.size()) return std::nullopt;
    int power = exponent - scale;
    wide num = mantissa;
    wide den = 1;
    for (; power > 0; --power) {
        num *= 10;
        if (num > limit) return std::nullopt;
    }
    for (; power < 0; ++power) {
        den *= 10;
        if (den > limit) return std::nullopt;
    }
    return make(num, den);
}

bool Rational::has_finite_decimal() const noexcept {
    std::int64_t d = den_;
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    return d == 1;
}

std::string Rational::to_string() const {
    if (den_ == 1) {
        return std::to_string(num_);
    }
    if (!has_finite_decimal()) {
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    // Scale the denominator up to a power of ten.
    wide num = num_;
    wide den = den_;
    int digits = 0;
    while (den != 1) {
        if (den % 10 == 0) {
            den /= 10;
        } else if (den % 2 == 0) {
            num *= 5;
            den /= 2;
        } else {
            num *= 2;
            den /= 5;
        }
        ++digits;
    }
    bool negative = num < 0;
    if (negative) num = -num;
    std::string body;
    while (num > 0) {
        body.insert(body.begin(), static_cast<char>('0' + static_cast<int>(num % 10)));
        num /= 10;
    }
    while (static_cast<int>(body.size()) <= digits) {
        body.insert(body.begin(), '0');
    }
    body.insert(body.end() - digits, '.');
    return negative ? "-" + body : body;
}

Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<wide>(a.num_) * b.den_ + static_cast<wide>(b.num_) * a.den_,
                static_cast<wide>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return make(static_cast<wide>(a.num_) * b.den_ - static_cast<wide>(b.num_) * a.den_,
                static_cast<wide>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<wide>(a.num_) * b.num_, static_cast<wide>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    return make(static_cast<wide>(a.num_) * b.den_, static_cast<wide>(a.den_) * b.num_);
}

Rational Rational::operator-() const { return make(-static_cast<wide>(num_), den_); }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    wide lhs = static_cast<wide>(a.num_) * b.den_;
    wide rhs = static_cast<wide>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::int64_t floored_mod(std::int64_t a, std::int64_t b) {
    std::int64_t r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) {
        r += b;
    }
    return r;
}

}  // namespace llmmc
