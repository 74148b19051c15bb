#include "nonstab/certify.hpp"
#include "nonstab/exact_linalg.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

namespace nonstab {
namespace {

RationalMatrix from_rows(const std::vector<RationalVector>& rows)
{
    RationalMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(r, c) = rows[r][c];
        }
    }
    return m;
}

// Random small-integer matrix with deliberately dependent rows mixed in.
RationalMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols)
{
    std::uniform_int_distribution<int> entry(-4, 4);
    std::uniform_int_distribution<int> coin(0, 2);
    RationalMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (r >= 2 && coin(rng) == 0) {
            const Rational a(entry(rng), 3);
            const Rational b(entry(rng));
            for (std::size_t c = 0; c < cols; ++c) {
                Rational v = a * m(r - 1, c) + b * m(r - 2, c);
                v.canonicalize();
                m(r, c) = v;
            }
            continue;
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = Rational(entry(rng), 1 + coin(rng));
            m(r, c).canonicalize();
        }
    }
    return m;
}

TEST(ExactLinalg, RankAgreesWithFloatingPointOracle)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> dim(1, 7);
    for (int trial = 0; trial < 300; ++trial) {
        const auto m = random_matrix(rng, dim(rng), dim(rng));
        EXPECT_EQ(exact_rank(m), testing::float_rank(testing::to_double(m))) << "trial " << trial;
    }
}

TEST(ExactLinalg, NullSpaceBasisIsNormalizedKernel)
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::size_t> dim(1, 7);
    for (int trial = 0; trial < 300; ++trial) {
        const auto m = random_matrix(rng, dim(rng), dim(rng));
        const auto basis = exact_null_space(m);
        ASSERT_EQ(basis.size(), m.cols() - exact_rank(m));
        for (const auto& b : basis) {
            EXPECT_TRUE(is_zero(multiply(m, b)));
            mpz_class g = 0;
            for (const auto& x : b) {
                EXPECT_EQ(x.get_den(), 1);
                mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_num().get_mpz_t());
            }
            EXPECT_EQ(g, 1);
            const auto lead = std::find_if(b.begin(), b.end(), [](const Rational& x) { return x != 0; });
            ASSERT_NE(lead, b.end());
            EXPECT_GT(*lead, 0);
        }
        if (!basis.empty()) {
            // basis vectors are independent
            RationalMatrix stacked(basis.size(), m.cols());
            for (std::size_t r = 0; r < basis.size(); ++r) {
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    stacked(r, c) = basis[r][c];
                }
            }
            EXPECT_EQ(exact_rank(stacked), basis.size());
        }
    }
}

TEST(ExactLinalg, LargeEntriesStayExact)
{
    // Entries whose float images collide; exact rank must still see 2.
    const Rational big = parse_rational("9007199254740993");
    const auto m = from_rows({{big, 1}, {big - 1, 1}});
    EXPECT_EQ(exact_rank(m), 2u);
    EXPECT_TRUE(exact_null_space(m).empty());
}

TEST(ExactLinalg, ZeroAndEmptyMatrices)
{
    EXPECT_EQ(exact_rank(RationalMatrix(3, 2)), 0u);
    const auto basis = exact_null_space(RationalMatrix(3, 2));
    ASSERT_EQ(basis.size(), 2u);
    EXPECT_EQ(basis[0], (RationalVector{1, 0}));
    EXPECT_EQ(basis[1], (RationalVector{0, 1}));
}

TEST(NullSpace, PushPullExamples)
{
    const auto crit = drift_matrix(build_push_pull(1, 1, 1, 1));
    EXPECT_EQ(rank(crit), 1u);
    EXPECT_EQ(null_space_basis(crit), (std::vector<RationalVector>{{1, -1}}));

    const auto asym = drift_matrix(build_push_pull(1, 2, 1, 2));
    EXPECT_EQ(null_space_basis(asym), (std::vector<RationalVector>{{2, -1}}));

    const auto sub = drift_matrix(build_push_pull(1, 1, 2, 2));
    EXPECT_EQ(rank(sub), 2u);
    EXPECT_TRUE(null_space_basis(sub).empty());
}

} // namespace
} // namespace nonstab
