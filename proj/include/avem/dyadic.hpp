#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace avem {

/// Exact binary fraction mantissa * 2^exponent.
///
/// Mesh vertices are stored in this form so that every bisection midpoint is
/// computed without rounding. Values are kept normalized (odd mantissa, or
/// zero with exponent 0) so that equality is structural.
class Dyadic {
public:
    constexpr Dyadic() = default;
    Dyadic(std::int64_t mantissa, int exponent);

    /// Exact conversion; every finite double is a dyadic rational.
    static Dyadic from_double(double value);
    /// Parses a decimal literal and rounds it to the nearest double first.
    static Dyadic from_string(const std::string& text);

    std::int64_t mantissa() const { return mantissa_; }
    int exponent() const { return exponent_; }
    double to_double() const;

    /// (a + b) / 2, exact. Throws std::overflow_error if the mantissa no
    /// longer fits in 63 bits.
    static Dyadic midpoint(const Dyadic& a, const Dyadic& b);

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    Dyadic operator-() const { return Dyadic(-mantissa_, exponent_); }

    friend bool operator==(const Dyadic&, const Dyadic&) = default;
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

    std::string str() const;

private:
    std::int64_t mantissa_ = 0;
    int exponent_ = 0;
};

}  // namespace avem
