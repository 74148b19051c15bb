#pragma once

#include "nonstab/rational.hpp"

#include <cstddef>
#include <vector>

namespace nonstab {

/// Dense row-major matrix of exact rationals.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    RationalVector row(std::size_t r) const;

    friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

RationalVector multiply(const RationalMatrix& a, const RationalVector& x);

/// Integer row echelon form from fraction-free (Bareiss) elimination.
/// Rows are first cleared of denominators; row scaling does not change the
/// row space, so rank and kernel are those of the input.
struct IntegerEchelon {
    std::vector<std::vector<mpz_class>> rows; // the first pivots.size() rows are nonzero
    std::vector<std::size_t> pivots;          // pivot column of each nonzero row
    std::size_t cols = 0;
};

IntegerEchelon fraction_free_echelon(const RationalMatrix& a);

std::size_t exact_rank(const RationalMatrix& a);

/// Basis of {x : A x = 0}, one vector per free column, each normalized to
/// integers with gcd 1 and positive leading entry.
std::vector<RationalVector> exact_null_space(const RationalMatrix& a);

} // namespace nonstab
