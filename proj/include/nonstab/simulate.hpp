#pragma once

#include "nonstab/netmodel.hpp"
#include "nonstab/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace nonstab {

// ---------------------------------------------------------------------------
// Random streams
//
// Trial t of a run seeded with s draws from std::mt19937_64 seeded with
// substream_seed(s, t) = splitmix64(s + 0x9E3779B97F4A7C15 * (t + 1)), where
// splitmix64 is the standard finalizer
//   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//   z ^= z >> 27; z *= 0x94D049BB133111EB;
//   z ^= z >> 31.
// Uniforms on [0,1) are (draw >> 11) * 2^-53. Results therefore do not depend
// on trial order or on how trials are spread across threads.

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t z);
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial);
Rng substream(std::uint64_t seed, std::uint64_t trial);
double uniform01(Rng& rng);

// ---------------------------------------------------------------------------
// Policies

enum class PolicyKind { PullPriority, PushPriority, Threshold, CustomTable };

std::string_view policy_name(PolicyKind kind);
/// Accepts "pull-priority", "push-priority", "threshold", "custom".
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyParams {
    /// threshold(c): a server pulls iff its pull queue holds more than c jobs.
    std::int64_t threshold = 0;
    /// custom table: explicit state -> action map, default_action elsewhere.
    std::map<std::vector<std::int64_t>, ActionId> table;
    ActionId default_action = 0;
};

/// Deterministic stationary state -> action map.
///
/// Push-pull and ring: pull-priority pulls whenever the server's pull queue is
/// nonempty, push-priority always pushes, threshold(c) pulls above c.
/// Re-entrant: pull-priority is last-buffer-first-served per server (largest
/// step among workable operations, lower stream first on ties);
/// push-priority is first-buffer-first-served (smallest step). A server with
/// no workable operation idles.
class Policy {
public:
    PolicyKind kind() const { return kind_; }
    std::int64_t threshold() const { return threshold_; }

    ActionId resolve(std::span<const std::int64_t> z) const;

private:
    friend Policy make_policy(const NetworkSpec&, PolicyKind, const PolicyParams&);

    struct Preference {
        std::size_t index = 0; // position in the server's operation list
        std::optional<std::size_t> queue;
    };

    Policy() = default;

    PolicyKind kind_ = PolicyKind::PullPriority;
    Family family_ = Family::Custom;
    std::int64_t threshold_ = 0;
    std::vector<std::size_t> pull_queue_;
    std::vector<Preference> preferences_[2];
    std::size_t server2_ops_ = 0;
    std::map<std::vector<std::int64_t>, ActionId> table_;
    ActionId default_action_ = 0;
};

/// Throws std::invalid_argument for unsupported kind/family combinations:
/// threshold on re-entrant nets, anything but a custom table on custom nets.
Policy make_policy(const NetworkSpec& net, PolicyKind kind, const PolicyParams& params = {});

// ---------------------------------------------------------------------------
// Embedded chain

/// Per-action sampling tables built once from the exact transition laws.
/// Outcomes are in lexicographic displacement order; sampling inverts the
/// cumulative distribution.
class TransitionSampler {
public:
    explicit TransitionSampler(const NetworkSpec& net);

    const NetworkSpec& network() const { return *net_; }

    /// True iff the action may be taken at z under the availability rule.
    bool available(ActionId action, std::span<const std::int64_t> z) const;

    /// Samples an outcome of the action at z and applies it in place.
    /// Returns the outcome index. Throws std::logic_error if the action is
    /// not available at z.
    std::size_t advance(ActionId action, std::span<std::int64_t> z, Rng& rng) const;

private:
    struct Move {
        int up = -1;   // queue incremented, -1 if none
        int down = -1; // queue decremented, -1 if none
        double probability = 0;
        double cumulative = 0;
    };

    bool fully_feasible(ActionId action, std::span<const std::int64_t> z) const;
    bool any_feasible(ActionId action, std::span<const std::int64_t> z) const;

    const NetworkSpec* net_;
    std::vector<std::vector<Move>> moves_;
    bool has_pure_arrival_action_ = false;
};

/// One step of the chain from z under the policy.
State step(const NetworkSpec& net, const Policy& policy, const State& z, Rng& rng);

// ---------------------------------------------------------------------------
// Experiments

struct SimConfig {
    std::uint64_t seed = 0;
    std::size_t steps = 1000;
    std::size_t trials = 10000;
    std::size_t cap = 10000;
    State x0{std::vector<std::int64_t>{}};
    /// Worker threads; 0 means hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
};

/// Throws std::invalid_argument if a count is zero or x0 has the wrong dimension.
void validate_config(const NetworkSpec& net, const SimConfig& cfg);

struct ReturnTimeStats {
    std::size_t trials = 0;
    std::size_t returned = 0;
    std::size_t censored = 0;
    Rational censored_fraction;
    double mean_uncensored = 0; // NaN when no trial returned
    double mean_censored_at_cap = 0;
};

/// First return to x0 (n >= 1), censored at cfg.cap steps.
ReturnTimeStats estimate_return_time(const NetworkSpec& net, const Policy& policy, const SimConfig& cfg);

struct ActionIncrementStats {
    ActionId action = 0;
    std::size_t count = 0;
    double mean = 0;
    double std_error = 0;
};

struct MartingaleReport {
    std::size_t trials = 0;
    std::size_t steps = 0;
    double mean_delta_Z = 0;
    double std_error = 0;
    double max_abs_increment = 0;
    double bound = 0;
    /// One-step increments of Z grouped by the action taken.
    std::vector<ActionIncrementStats> per_action;
};

/// Largest |alpha'd| over arrival/departure queues and transfer pairs.
Rational increment_bound(const NetworkSpec& net, const RationalVector& alpha);

/// Z_n = alpha'X_n along cfg.trials trajectories of cfg.steps steps.
MartingaleReport martingale_test(const NetworkSpec& net, const Policy& policy, const RationalVector& alpha,
                                 const SimConfig& cfg);

struct GrowthReport {
    std::size_t trials = 0;
    std::size_t steps = 0;
    /// Least-squares slope of the total queue length against n, averaged over trials.
    double slope = 0;
    /// Fraction of trials ending with more jobs than they started with.
    double fraction_growing = 0;
    /// Same slope for Z_n = alpha'X_n, when alpha is given.
    std::optional<double> z_slope;
};

GrowthReport blowup_probe(const NetworkSpec& net, const Policy& policy, const SimConfig& cfg,
                          const std::optional<RationalVector>& alpha = std::nullopt);

struct TrajectorySummary {
    std::size_t trials = 0;
    std::size_t steps = 0;
    double mean_final_total = 0;
    std::int64_t max_total = 0;
    std::vector<double> mean_final_queue;
};

TrajectorySummary simulate_trajectories(const NetworkSpec& net, const Policy& policy, const SimConfig& cfg);

} // namespace nonstab
