#include "avem/dyadic.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace avem {

namespace {

using i128 = __int128;

constexpr i128 kMantissaLimit = static_cast<i128>(std::numeric_limits<std::int64_t>::max());

Dyadic normalize(i128 mantissa, int exponent) {
    if (mantissa == 0) {
        return Dyadic(0, 0);
    }
    while ((mantissa & 1) == 0) {
        mantissa /= 2;
        ++exponent;
    }
    if (mantissa > kMantissaLimit || mantissa < -kMantissaLimit) {
        throw std::overflow_error("dyadic mantissa overflow");
    }
    return Dyadic(static_cast<std::int64_t>(mantissa), exponent);
}

// Brings both operands to the smaller exponent.
void align(const Dyadic& a, const Dyadic& b, i128& ma, i128& mb, int& exponent) {
    exponent = std::min(a.exponent(), b.exponent());
    const int sa = a.exponent() - exponent;
    const int sb = b.exponent() - exponent;
    if (sa > 62 || sb > 62) {
        throw std::overflow_error("dyadic exponent spread too large");
    }
    ma = static_cast<i128>(a.mantissa()) << sa;
    mb = static_cast<i128>(b.mantissa()) << sb;
}

}  // namespace

Dyadic::Dyadic(std::int64_t mantissa, int exponent) : mantissa_(mantissa), exponent_(exponent) {
    if (mantissa_ == 0) {
        exponent_ = 0;
        return;
    }
    while ((mantissa_ & 1) == 0) {
        mantissa_ /= 2;
        ++exponent_;
    }
}

Dyadic Dyadic::from_double(double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("non-finite coordinate");
    }
    if (value == 0.0) {
        return Dyadic();
    }
    int exp = 0;
    const double frac = std::frexp(value, &exp);
    // frac * 2^53 is an exact integer for IEEE doubles.
    const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    return Dyadic(mant, exp - 53);
}

Dyadic Dyadic::from_string(const std::string& text) {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
        throw std::invalid_argument("malformed coordinate '" + text + "'");
    }
    return from_double(v);
}

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(mantissa_), exponent_); }

Dyadic Dyadic::midpoint(const Dyadic& a, const Dyadic& b) {
    i128 ma = 0;
    i128 mb = 0;
    int e = 0;
    align(a, b, ma, mb, e);
    return normalize(ma + mb, e - 1);
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    i128 ma = 0;
    i128 mb = 0;
    int e = 0;
    align(a, b, ma, mb, e);
    return normalize(ma + mb, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    return normalize(static_cast<i128>(a.mantissa()) * b.mantissa(), a.exponent() + b.exponent());
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    i128 ma = 0;
    i128 mb = 0;
    int e = 0;
    align(a, b, ma, mb, e);
    if (ma < mb) return std::strong_ordering::less;
    if (ma > mb) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Dyadic::str() const {
    std::ostringstream os;
    os << mantissa_ << "*2^" << exponent_;
    return os.str();
}

}  // namespace avem
