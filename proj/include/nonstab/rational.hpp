#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nonstab {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

/// Parses "num" or "num/den" (optional leading '-'); den must be nonzero.
/// Throws std::invalid_argument on malformed text.
Rational parse_rational(std::string_view text);

/// "num/den", with "/den" omitted when den == 1.
std::string to_string(const Rational& value);

std::vector<std::string> to_strings(const RationalVector& values);

/// Strictly positive exact rate, kept in lowest terms.
class Rate {
public:
    explicit Rate(Rational value);
    Rate(std::int64_t num, std::int64_t den = 1);

    static Rate parse(std::string_view text);

    const Rational& value() const { return value_; }
    Rational inverse() const { return 1 / value_; }

    friend bool operator==(const Rate& a, const Rate& b) { return a.value_ == b.value_; }

private:
    Rational value_;
};

/// Rescales a nonzero rational vector to integers with gcd 1 and a positive
/// leading nonzero entry. The zero vector is returned unchanged.
RationalVector normalize_direction(const RationalVector& v);

/// True when a and b are nonzero multiples of one another.
bool proportional(const RationalVector& a, const RationalVector& b);

Rational dot(const RationalVector& a, const RationalVector& b);

bool is_zero(const RationalVector& v);

} // namespace nonstab
