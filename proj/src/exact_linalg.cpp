#include "nonstab/exact_linalg.hpp"

#include <stdexcept>
#include <utility>

namespace nonstab {

RationalVector RationalMatrix::row(std::size_t r) const
{
    return RationalVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

RationalVector multiply(const RationalMatrix& a, const RationalVector& x)
{
    if (x.size() != a.cols()) {
        throw std::invalid_argument("multiply: dimension mismatch");
    }
    RationalVector y(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        Rational s = 0;
        for (std::size_t c = 0; c < a.cols(); ++c) {
            s += a(r, c) * x[c];
        }
        y[r] = s;
    }
    return y;
}

IntegerEchelon fraction_free_echelon(const RationalMatrix& a)
{
    IntegerEchelon out;
    out.cols = a.cols();
    auto& m = out.rows;
    m.reserve(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        mpz_class den_lcm = 1;
        for (std::size_t c = 0; c < a.cols(); ++c) {
            mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), a(r, c).get_den().get_mpz_t());
        }
        std::vector<mpz_class> row(a.cols());
        for (std::size_t c = 0; c < a.cols(); ++c) {
            row[c] = a(r, c).get_num() * (den_lcm / a(r, c).get_den());
        }
        m.push_back(std::move(row));
    }

    mpz_class previous = 1;
    std::size_t rank = 0;
    mpz_class t;
    for (std::size_t col = 0; col < a.cols() && rank < m.size(); ++col) {
        std::size_t p = rank;
        while (p < m.size() && sgn(m[p][col]) == 0) {
            ++p;
        }
        if (p == m.size()) {
            continue;
        }
        std::swap(m[rank], m[p]);
        const mpz_class& pivot = m[rank][col];
        for (std::size_t i = rank + 1; i < m.size(); ++i) {
            const mpz_class lead = m[i][col];
            for (std::size_t j = col + 1; j < a.cols(); ++j) {
                t = pivot * m[i][j] - lead * m[rank][j];
                // Sylvester's identity: exact for any choice of pivot columns.
                if (!mpz_divisible_p(t.get_mpz_t(), previous.get_mpz_t())) {
                    throw std::logic_error("fraction-free elimination lost exactness");
                }
                mpz_divexact(m[i][j].get_mpz_t(), t.get_mpz_t(), previous.get_mpz_t());
            }
            m[i][col] = 0;
        }
        previous = pivot;
        out.pivots.push_back(col);
        ++rank;
    }
    return out;
}

std::size_t exact_rank(const RationalMatrix& a)
{
    return fraction_free_echelon(a).pivots.size();
}

std::vector<RationalVector> exact_null_space(const RationalMatrix& a)
{
    const IntegerEchelon e = fraction_free_echelon(a);
    const std::size_t n = a.cols();
    std::vector<bool> is_pivot(n, false);
    for (auto c : e.pivots) {
        is_pivot[c] = true;
    }
    std::vector<RationalVector> basis;
    for (std::size_t free = 0; free < n; ++free) {
        if (is_pivot[free]) {
            continue;
        }
        RationalVector x(n);
        x[free] = 1;
        for (std::size_t k = e.pivots.size(); k-- > 0;) {
            const std::size_t pc = e.pivots[k];
            Rational s = 0;
            for (std::size_t j = pc + 1; j < n; ++j) {
                if (sgn(e.rows[k][j]) != 0) {
                    s += Rational(e.rows[k][j]) * x[j];
                }
            }
            x[pc] = -s / Rational(e.rows[k][pc]);
        }
        basis.push_back(normalize_direction(x));
    }
    return basis;
}

} // namespace nonstab
