#include "nonstab/rational.hpp"

#include <stdexcept>

namespace nonstab {

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

} // namespace

Rational parse_rational(std::string_view text)
{
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && body.front() == '-') {
        negative = true;
        body.remove_prefix(1);
    }
    const auto slash = body.find('/');
    const std::string_view num = body.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    }
    mpz_class n(std::string(num), 10);
    mpz_class d(std::string(den), 10);
    if (d == 0) {
        throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    }
    Rational out(negative ? mpz_class(-n) : n, d);
    out.canonicalize();
    return out;
}

std::string to_string(const Rational& value)
{
    if (value.get_den() == 1) {
        return value.get_num().get_str();
    }
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::vector<std::string> to_strings(const RationalVector& values)
{
    std::vector<std::string> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        out.push_back(to_string(v));
    }
    return out;
}

Rate::Rate(Rational value) : value_(std::move(value))
{
    value_.canonicalize();
    if (sgn(value_) <= 0) {
        throw std::invalid_argument("rate must be positive, got " + to_string(value_));
    }
}

Rate::Rate(std::int64_t num, std::int64_t den)
    : Rate([&] {
          if (den == 0) {
              throw std::invalid_argument("rate has zero denominator");
          }
          return Rational(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
      }())
{}

Rate Rate::parse(std::string_view text)
{
    return Rate(parse_rational(text));
}

RationalVector normalize_direction(const RationalVector& v)
{
    if (is_zero(v)) {
        return v;
    }
    mpz_class den_lcm = 1;
    for (const auto& x : v) {
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), x.get_den().get_mpz_t());
    }
    std::vector<mpz_class> ints;
    ints.reserve(v.size());
    mpz_class g = 0;
    for (const auto& x : v) {
        mpz_class scaled = x.get_num() * (den_lcm / x.get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), scaled.get_mpz_t());
        ints.push_back(std::move(scaled));
    }
    int lead = 0;
    for (const auto& x : ints) {
        if (sgn(x) != 0) {
            lead = sgn(x);
            break;
        }
    }
    RationalVector out;
    out.reserve(v.size());
    for (const auto& x : ints) {
        out.emplace_back(mpz_class(x / g * lead));
    }
    return out;
}

bool proportional(const RationalVector& a, const RationalVector& b)
{
    if (a.size() != b.size() || is_zero(a) || is_zero(b)) {
        return false;
    }
    return normalize_direction(a) == normalize_direction(b);
}

Rational dot(const RationalVector& a, const RationalVector& b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: dimension mismatch");
    }
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

bool is_zero(const RationalVector& v)
{
    for (const auto& x : v) {
        if (sgn(x) != 0) {
            return false;
        }
    }
    return true;
}

} // namespace nonstab
