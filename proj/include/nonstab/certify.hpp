#pragma once

#include "nonstab/exact_linalg.hpp"
#include "nonstab/netmodel.hpp"
#include "nonstab/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace nonstab {

/// L x M matrix whose row a is the expected one-step displacement under action a.
using DriftMatrix = RationalMatrix;

/// Element-wise sign of a drift matrix.
class SignMatrix {
public:
    SignMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::int8_t& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::int8_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const std::int8_t> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    RationalMatrix to_rational() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::int8_t> data_;
};

DriftMatrix drift_matrix(const NetworkSpec& net);

/// Exact rank over Q.
std::size_t rank(const DriftMatrix& d);

/// Normalized integer basis of {alpha : D alpha = 0}.
std::vector<RationalVector> null_space_basis(const DriftMatrix& d);

/// Every action has a support point d with alpha'd != 0.
bool check_nondegeneracy_direct(const NetworkSpec& net, const RationalVector& alpha);

/// alpha_i != 0 on arrival/departure queues and alpha_i != alpha_j on transfer pairs.
bool check_nondegeneracy_lemma(const NetworkSpec& net, const RationalVector& alpha);

/// Criticality of the push-pull, ring and re-entrant families. Throws
/// std::domain_error for custom networks.
bool is_critical(const NetworkSpec& net);

/// (+1/lambda_1, -1/lambda_2, ..., -1/lambda_M) for a critical ring (or
/// push-pull) with M even. Throws std::domain_error otherwise.
RationalVector ring_alpha_even(const NetworkSpec& net);

/// alpha_k = sum_{j < step(k)} (-1)^server(i,j) / mu_{i,j} along the stream
/// owning buffer k. Throws std::domain_error unless the net is a critical
/// re-entrant network.
RationalVector reentrant_alpha(const NetworkSpec& net);

/// Closed-form alpha of the net's family when it is critical and one exists.
std::optional<RationalVector> closed_form_alpha(const NetworkSpec& net);

SignMatrix sign_matrix(const DriftMatrix& d);

/// Cyclic zero-run parity of each row: an odd number of zeros between
/// neighbouring nonzeros of opposite sign, an even number between equal signs.
bool verify_sign_pattern(const SignMatrix& signs);
bool verify_sign_row(std::span<const std::int8_t> row);

/// Every operation's rate-weighted displacement pairs with alpha to
/// (-1)^server exactly. Throws std::domain_error for non-re-entrant nets.
bool verify_unit_pairing(const NetworkSpec& net, const RationalVector& alpha);

struct ReentrantNondegeneracy {
    bool feed = false;     // alpha_k != 0 on first buffers
    bool drain = false;    // alpha_k != 0 on last buffers
    bool transfer = false; // alpha_k != alpha_k' on consecutive buffers
};

ReentrantNondegeneracy reentrant_nondegeneracy(const NetworkSpec& net, const RationalVector& alpha);

enum class Verdict { NonStabilizable, Inconclusive };

struct CertificateChecks {
    bool dalpha_zero = false;
    bool nondeg_direct = false;
    bool nondeg_lemma = false;
};

struct HarmonicCertificate {
    RationalVector alpha;
    CertificateChecks checks;
    Verdict verdict = Verdict::Inconclusive;
};

/// Evaluates a candidate alpha against D and both non-degeneracy checks.
HarmonicCertificate evaluate_alpha(const NetworkSpec& net, const DriftMatrix& d, RationalVector alpha);

struct CertifyOptions {
    int coefficient_bound = 3;
    std::size_t max_combinations = 100000;
};

struct CertificationResult {
    Verdict verdict = Verdict::Inconclusive;
    std::size_t rank = 0;
    std::size_t queue_count = 0;
    std::size_t action_count = 0;
    std::optional<bool> critical;
    std::vector<RationalVector> null_space_basis;
    /// The certificate when verdict is NonStabilizable; otherwise the first
    /// null-space candidate that was tried, if any.
    std::optional<HarmonicCertificate> certificate;
};

/// Searches for a harmonic certificate: family closed form, then null-space
/// basis vectors, then small integer combinations of them.
CertificationResult certify_nonstabilizable(const NetworkSpec& net, const CertifyOptions& options = {});

} // namespace nonstab
