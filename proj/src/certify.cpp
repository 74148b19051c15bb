#include "nonstab/certify.hpp"

#include <stdexcept>

namespace nonstab {

namespace {

Rational pairing(const Displacement& d, const RationalVector& alpha)
{
    Rational s = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k] != 0) {
            s += d[k] * alpha[k];
        }
    }
    return s;
}

void check_alpha_size(const NetworkSpec& net, const RationalVector& alpha)
{
    if (alpha.size() != net.queue_count()) {
        throw std::invalid_argument("alpha has dimension " + std::to_string(alpha.size()) + ", network has M = " +
                                    std::to_string(net.queue_count()));
    }
}

/// (-1)^server with server in {1, 2}.
int server_sign(int server)
{
    return server == 1 ? -1 : 1;
}

bool lambda_equals_mu(const NetworkSpec& net)
{
    for (std::size_t i = 0; i < net.lambda().size(); ++i) {
        if (!(net.lambda()[i] == net.mu()[i])) {
            return false;
        }
    }
    return true;
}

RationalVector unchecked_reentrant_alpha(const ReentrantLayout& layout)
{
    RationalVector alpha(layout.queue_count());
    for (std::size_t k = 0; k < layout.queue_count(); ++k) {
        const auto [stream, step] = layout.buffer_of(k);
        Rational s = 0;
        for (std::size_t j = 0; j < step; ++j) {
            const auto& op = layout.operation(stream, j);
            s += server_sign(op.server) * op.rate.inverse();
        }
        alpha[k] = s;
    }
    return alpha;
}

void assert_harmonic(const NetworkSpec& net, const RationalVector& alpha, const char* what)
{
    if (!is_zero(multiply(drift_matrix(net), alpha))) {
        throw std::logic_error(std::string(what) + ": closed form does not solve D alpha = 0");
    }
}

} // namespace

RationalMatrix SignMatrix::to_rational() const
{
    RationalMatrix m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            m(r, c) = (*this)(r, c);
        }
    }
    return m;
}

DriftMatrix drift_matrix(const NetworkSpec& net)
{
    DriftMatrix d(net.action_count(), net.queue_count());
    for (const auto& a : net.actions()) {
        for (const auto& o : a.outcomes) {
            const Rational p = o.rate.value() / a.total_rate.value();
            for (std::size_t k = 0; k < net.queue_count(); ++k) {
                if (o.displacement[k] != 0) {
                    d(a.id, k) += o.displacement[k] * p;
                }
            }
        }
    }
    return d;
}

std::size_t rank(const DriftMatrix& d)
{
    return exact_rank(d);
}

std::vector<RationalVector> null_space_basis(const DriftMatrix& d)
{
    return exact_null_space(d);
}

bool check_nondegeneracy_direct(const NetworkSpec& net, const RationalVector& alpha)
{
    check_alpha_size(net, alpha);
    for (const auto& a : net.actions()) {
        bool moves = false;
        for (const auto& o : a.outcomes) {
            if (sgn(pairing(o.displacement, alpha)) != 0) {
                moves = true;
                break;
            }
        }
        if (!moves) {
            return false;
        }
    }
    return true;
}

bool check_nondegeneracy_lemma(const NetworkSpec& net, const RationalVector& alpha)
{
    check_alpha_size(net, alpha);
    for (auto i : net.arrival_departure_set()) {
        if (sgn(alpha[i]) == 0) {
            return false;
        }
    }
    for (const auto& t : net.transfer_set()) {
        if (alpha[t.from] == alpha[t.to]) {
            return false;
        }
    }
    return true;
}

bool is_critical(const NetworkSpec& net)
{
    switch (net.family()) {
    case Family::PushPull:
    case Family::Ring:
        return lambda_equals_mu(net);
    case Family::Reentrant: {
        const auto& layout = *net.reentrant();
        for (const auto& stream : layout.streams()) {
            Rational work[2] = {0, 0};
            for (const auto& op : stream) {
                work[op.server - 1] += op.rate.inverse();
            }
            if (work[0] != work[1]) {
                return false;
            }
        }
        return true;
    }
    case Family::Custom:
        break;
    }
    throw std::domain_error("criticality is not defined for custom networks");
}

RationalVector ring_alpha_even(const NetworkSpec& net)
{
    if (net.family() != Family::Ring && net.family() != Family::PushPull) {
        throw std::domain_error("ring_alpha_even needs a ring or push-pull network");
    }
    if (net.queue_count() % 2 != 0) {
        throw std::domain_error("ring_alpha_even needs an even number of servers");
    }
    if (!is_critical(net)) {
        throw std::domain_error("ring_alpha_even needs a critical network (lambda = mu)");
    }
    RationalVector alpha(net.queue_count());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        alpha[i] = (i % 2 == 0 ? 1 : -1) * net.lambda()[i].inverse();
    }
    assert_harmonic(net, alpha, "ring_alpha_even");
    return alpha;
}

RationalVector reentrant_alpha(const NetworkSpec& net)
{
    if (net.family() != Family::Reentrant) {
        throw std::domain_error("reentrant_alpha needs a re-entrant network");
    }
    if (!is_critical(net)) {
        throw std::domain_error("reentrant_alpha needs a critical network");
    }
    RationalVector alpha = unchecked_reentrant_alpha(*net.reentrant());
    assert_harmonic(net, alpha, "reentrant_alpha");
    return alpha;
}

std::optional<RationalVector> closed_form_alpha(const NetworkSpec& net)
{
    switch (net.family()) {
    case Family::PushPull:
    case Family::Ring:
        if (net.queue_count() % 2 == 0 && is_critical(net)) {
            return ring_alpha_even(net);
        }
        return std::nullopt;
    case Family::Reentrant:
        if (is_critical(net)) {
            return reentrant_alpha(net);
        }
        return std::nullopt;
    case Family::Custom:
        return std::nullopt;
    }
    return std::nullopt;
}

SignMatrix sign_matrix(const DriftMatrix& d)
{
    SignMatrix s(d.rows(), d.cols());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            s(r, c) = static_cast<std::int8_t>(sgn(d(r, c)));
        }
    }
    return s;
}

bool verify_sign_row(std::span<const std::int8_t> row)
{
    std::vector<std::size_t> nonzero;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] != 0) {
            nonzero.push_back(k);
        }
    }
    const std::size_t n = row.size();
    for (std::size_t t = 0; t < nonzero.size(); ++t) {
        const std::size_t here = nonzero[t];
        const std::size_t next = nonzero[(t + 1) % nonzero.size()];
        // zeros strictly between here and next, walking forward around the ring
        const std::size_t gap = (next + n - here - 1) % n;
        const bool same_sign = row[here] == row[next];
        if ((gap % 2 == 0) != same_sign) {
            return false;
        }
    }
    return true;
}

bool verify_sign_pattern(const SignMatrix& signs)
{
    for (std::size_t r = 0; r < signs.rows(); ++r) {
        if (!verify_sign_row(signs.row(r))) {
            return false;
        }
    }
    return true;
}

bool verify_unit_pairing(const NetworkSpec& net, const RationalVector& alpha)
{
    if (net.family() != Family::Reentrant) {
        throw std::domain_error("verify_unit_pairing needs a re-entrant network");
    }
    check_alpha_size(net, alpha);
    const auto& layout = *net.reentrant();
    for (std::size_t i = 0; i < layout.stream_count(); ++i) {
        for (std::size_t j = 0; j <= layout.buffers(i); ++j) {
            if (dot(layout.operation_drift(i, j), alpha) != server_sign(layout.operation(i, j).server)) {
                return false;
            }
        }
    }
    return true;
}

ReentrantNondegeneracy reentrant_nondegeneracy(const NetworkSpec& net, const RationalVector& alpha)
{
    if (net.family() != Family::Reentrant) {
        throw std::domain_error("reentrant_nondegeneracy needs a re-entrant network");
    }
    check_alpha_size(net, alpha);
    const auto& layout = *net.reentrant();
    ReentrantNondegeneracy out{true, true, true};
    for (auto k : layout.feed_queues()) {
        out.feed = out.feed && sgn(alpha[k]) != 0;
    }
    for (auto k : layout.drain_queues()) {
        out.drain = out.drain && sgn(alpha[k]) != 0;
    }
    for (std::size_t i = 0; i < layout.stream_count(); ++i) {
        for (std::size_t j = 1; j < layout.buffers(i); ++j) {
            out.transfer = out.transfer && alpha[layout.queue_of(i, j)] != alpha[layout.queue_of(i, j + 1)];
        }
    }
    return out;
}

HarmonicCertificate evaluate_alpha(const NetworkSpec& net, const DriftMatrix& d, RationalVector alpha)
{
    check_alpha_size(net, alpha);
    HarmonicCertificate cert;
    cert.alpha = std::move(alpha);
    const bool nonzero = !is_zero(cert.alpha);
    cert.checks.dalpha_zero = nonzero && is_zero(multiply(d, cert.alpha));
    cert.checks.nondeg_direct = nonzero && check_nondegeneracy_direct(net, cert.alpha);
    cert.checks.nondeg_lemma = nonzero && check_nondegeneracy_lemma(net, cert.alpha);
    cert.verdict = cert.checks.dalpha_zero && cert.checks.nondeg_direct ? Verdict::NonStabilizable
                                                                        : Verdict::Inconclusive;
    return cert;
}

CertificationResult certify_nonstabilizable(const NetworkSpec& net, const CertifyOptions& options)
{
    CertificationResult result;
    result.queue_count = net.queue_count();
    result.action_count = net.action_count();
    if (net.family() != Family::Custom) {
        result.critical = is_critical(net);
    }
    const DriftMatrix d = drift_matrix(net);
    result.rank = rank(d);
    if (result.rank == net.queue_count()) {
        return result;
    }
    result.null_space_basis = null_space_basis(d);

    auto accept = [&](const RationalVector& candidate) {
        HarmonicCertificate cert = evaluate_alpha(net, d, normalize_direction(candidate));
        if (cert.verdict == Verdict::NonStabilizable) {
            result.verdict = Verdict::NonStabilizable;
            result.certificate = std::move(cert);
            return true;
        }
        if (!result.certificate) {
            result.certificate = std::move(cert);
        }
        return false;
    };

    if (auto closed = closed_form_alpha(net); closed && accept(*closed)) {
        return result;
    }
    for (const auto& b : result.null_space_basis) {
        if (accept(b)) {
            return result;
        }
    }

    // Odometer over coefficient vectors in [-B, B]^k, skipping the origin.
    const std::size_t k = result.null_space_basis.size();
    const int bound = options.coefficient_bound;
    if (k < 2 || bound < 1) {
        return result;
    }
    std::vector<int> coef(k, -bound);
    std::size_t tried = 0;
    while (tried < options.max_combinations) {
        bool origin = true;
        for (int c : coef) {
            origin = origin && c == 0;
        }
        if (!origin) {
            RationalVector candidate(net.queue_count());
            for (std::size_t b = 0; b < k; ++b) {
                for (std::size_t q = 0; q < candidate.size(); ++q) {
                    candidate[q] += coef[b] * result.null_space_basis[b][q];
                }
            }
            ++tried;
            if (accept(candidate)) {
                return result;
            }
        }
        std::size_t pos = 0;
        while (pos < k && coef[pos] == bound) {
            coef[pos] = -bound;
            ++pos;
        }
        if (pos == k) {
            break;
        }
        ++coef[pos];
    }
    return result;
}

} // namespace nonstab
