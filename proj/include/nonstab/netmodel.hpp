#pragma once

#include "nonstab/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nonstab {

using ActionId = std::size_t;

/// One-step change of the queue vector: +e_i (arrival), -e_i (departure) or
/// e_i - e_j with i != j (transfer from j to i).
class Displacement {
public:
    enum class Shape { Arrival, Departure, Transfer };

    explicit Displacement(std::vector<int> entries);

    static Displacement arrival(std::size_t dim, std::size_t queue);
    static Displacement departure(std::size_t dim, std::size_t queue);
    static Displacement transfer(std::size_t dim, std::size_t from, std::size_t to);

    std::size_t size() const { return entries_.size(); }
    int operator[](std::size_t k) const { return entries_[k]; }
    std::span<const int> entries() const { return entries_; }

    Shape shape() const;
    /// Queue that loses a job, if any.
    std::optional<std::size_t> decremented() const;
    /// Queue that gains a job, if any.
    std::optional<std::size_t> incremented() const;

    friend auto operator<=>(const Displacement&, const Displacement&) = default;
    friend bool operator==(const Displacement&, const Displacement&) = default;

private:
    std::vector<int> entries_;
};

struct Outcome {
    Displacement displacement;
    Rate rate;
};

/// A state-independent displacement distribution, given by rates.
/// Outcomes are kept sorted lexicographically by displacement and distinct.
struct ActionSpec {
    ActionId id = 0;
    std::string label;
    std::vector<Outcome> outcomes;
    Rate total_rate{1};
};

enum class Family { PushPull, Ring, Reentrant, Custom };

std::string_view family_name(Family family);

/// An operation (i,j) of a re-entrant stream: which server performs it and at what rate.
struct OperationSpec {
    int server = 1;
    Rate rate{1};
};

struct OperationRef {
    std::size_t stream = 0;
    std::size_t step = 0;
};

/// Buffer numbering and operation bookkeeping for a two-server re-entrant network.
/// Streams and queues are 0-based here; labels shown to users are 1-based.
class ReentrantLayout {
public:
    explicit ReentrantLayout(std::vector<std::vector<OperationSpec>> streams);

    std::size_t stream_count() const { return streams_.size(); }
    /// n_i: number of buffers of stream i (operations are 0..n_i).
    std::size_t buffers(std::size_t stream) const { return streams_[stream].size() - 1; }
    std::size_t queue_count() const { return queue_count_; }
    const OperationSpec& operation(std::size_t stream, std::size_t step) const { return streams_[stream][step]; }
    const std::vector<std::vector<OperationSpec>>& streams() const { return streams_; }

    /// Queue served by operation (stream, step), step >= 1. Lexicographic in (stream, step).
    std::size_t queue_of(std::size_t stream, std::size_t step) const;
    /// Inverse of queue_of.
    OperationRef buffer_of(std::size_t queue) const;

    /// Operations of server 1 or 2 in lexicographic (stream, step) order.
    const std::vector<OperationRef>& server_operations(int server) const { return server_ops_[server - 1]; }

    /// Rate-weighted displacement of a single operation (unnormalized).
    RationalVector operation_drift(std::size_t stream, std::size_t step) const;
    Displacement operation_displacement(std::size_t stream, std::size_t step) const;

    /// Buffers fed by push operations (first buffer of each stream).
    std::vector<std::size_t> feed_queues() const;
    /// Buffers drained by the final operation of each stream.
    std::vector<std::size_t> drain_queues() const;

private:
    std::vector<std::vector<OperationSpec>> streams_;
    std::vector<std::size_t> offsets_;
    std::size_t queue_count_ = 0;
    std::vector<OperationRef> server_ops_[2];
};

struct CustomAction {
    std::string label;
    std::vector<Outcome> outcomes;
};

/// A homogeneous controlled queueing network on Z_+^M. Immutable once built.
class NetworkSpec {
public:
    std::size_t queue_count() const { return queue_count_; }
    std::size_t action_count() const { return actions_.size(); }
    Family family() const { return family_; }

    const std::vector<ActionSpec>& actions() const { return actions_; }
    /// Throws std::out_of_range for an unknown id.
    const ActionSpec& action(ActionId id) const;

    /// Push and pull rates; only for the push-pull and ring families.
    const std::vector<Rate>& lambda() const { return lambda_; }
    const std::vector<Rate>& mu() const { return mu_; }

    /// For push-pull and ring actions: bit s set iff server s pulls.
    std::uint32_t server_pattern(ActionId id) const { return patterns_.at(id); }

    const ReentrantLayout* reentrant() const { return layout_ ? &*layout_ : nullptr; }
    /// For re-entrant actions: indices into server_operations(1) and server_operations(2).
    std::pair<std::size_t, std::size_t> operation_pair(ActionId id) const { return op_pairs_.at(id); }

    /// Queues i with +e_i or -e_i in some support.
    std::vector<std::size_t> arrival_departure_set() const;

    struct Transfer {
        std::size_t from = 0;
        std::size_t to = 0;
        friend auto operator<=>(const Transfer&, const Transfer&) = default;
    };
    /// Pairs with e_to - e_from in some support.
    std::vector<Transfer> transfer_set() const;

private:
    friend NetworkSpec build_push_pull(const Rate&, const Rate&, const Rate&, const Rate&);
    friend NetworkSpec build_ring(const std::vector<Rate>&, const std::vector<Rate>&);
    friend NetworkSpec build_reentrant(std::vector<std::vector<OperationSpec>>);
    friend NetworkSpec build_custom(std::size_t, std::vector<CustomAction>);

    NetworkSpec() = default;

    std::size_t queue_count_ = 0;
    Family family_ = Family::Custom;
    std::vector<ActionSpec> actions_;
    std::vector<Rate> lambda_;
    std::vector<Rate> mu_;
    std::vector<std::uint32_t> patterns_;
    std::optional<ReentrantLayout> layout_;
    std::vector<std::pair<std::size_t, std::size_t>> op_pairs_;
};

/// Two servers, two streams. Actions in order (push,push), (pull,pull),
/// (push,pull), (pull,push); server 1 pulls queue 2 and server 2 pulls queue 1.
NetworkSpec build_push_pull(const Rate& lambda1, const Rate& lambda2, const Rate& mu1, const Rate& mu2);

/// Ring of M >= 2 servers: server i pushes stream i or pulls stream i-1 (mod M).
/// One action per push/pull vector, ordered as binary counting with server 1
/// most significant (pull = 1).
NetworkSpec build_ring(const std::vector<Rate>& lambda, const std::vector<Rate>& mu);

/// Two-server re-entrant lines. streams[i][j] is operation (i,j), j = 0..n_i.
NetworkSpec build_reentrant(std::vector<std::vector<OperationSpec>> streams);

/// Arbitrary homogeneous network. Duplicate displacements within an action are
/// merged by summing rates. At least one action must contain an arrival so
/// that some action is available in every state.
NetworkSpec build_custom(std::size_t queue_count, std::vector<CustomAction> actions);

/// Nonnegative queue lengths.
class State {
public:
    explicit State(std::vector<std::int64_t> queues);
    static State origin(std::size_t dim) { return State(std::vector<std::int64_t>(dim, 0)); }

    std::size_t size() const { return queues_.size(); }
    std::int64_t operator[](std::size_t k) const { return queues_[k]; }
    std::span<const std::int64_t> queues() const { return queues_; }

    friend bool operator==(const State&, const State&) = default;

private:
    std::vector<std::int64_t> queues_;
};

/// True iff every outcome of the action keeps the state in Z_+^M.
bool fully_feasible(const ActionSpec& action, std::span<const std::int64_t> z);

/// Actions whose whole support stays in Z_+^M. If none exists (possible only
/// when some re-entrant server has no push operation, or in custom nets), the
/// set falls back to actions with at least one feasible outcome: a server with
/// nothing to work on idles.
std::vector<ActionId> available_actions(const NetworkSpec& net, const State& z);

struct WeightedDisplacement {
    Displacement displacement;
    Rational probability;
};

/// Homogeneous one-step law of an action: rate(d) / total rate.
std::vector<WeightedDisplacement> transition_distribution(const NetworkSpec& net, ActionId action);

/// Law used at a specific state: infeasible outcomes (idle servers) are
/// dropped and the rest renormalized. Equals transition_distribution when
/// the action is fully feasible.
std::vector<WeightedDisplacement> transition_distribution_at(const NetworkSpec& net, ActionId action, const State& z);

} // namespace nonstab
