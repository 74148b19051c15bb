#include "nonstab/simulate.hpp"

#include "nonstab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace nonstab {

// ---------------------------------------------------------------------------
// Random streams

std::uint64_t splitmix64(std::uint64_t z)
{
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial)
{
    return splitmix64(seed + 0x9E3779B97F4A7C15ull * (trial + 1));
}

Rng substream(std::uint64_t seed, std::uint64_t trial)
{
    return Rng(substream_seed(seed, trial));
}

double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Policies

std::string_view policy_name(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::PullPriority:
        return "pull-priority";
    case PolicyKind::PushPriority:
        return "push-priority";
    case PolicyKind::Threshold:
        return "threshold";
    case PolicyKind::CustomTable:
        return "custom";
    }
    return "custom";
}

PolicyKind parse_policy_kind(std::string_view name)
{
    for (auto kind : {PolicyKind::PullPriority, PolicyKind::PushPriority, PolicyKind::Threshold,
                      PolicyKind::CustomTable}) {
        if (policy_name(kind) == name) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown policy '" + std::string(name) +
                                "' (expected pull-priority, push-priority, threshold or custom)");
}

Policy make_policy(const NetworkSpec& net, PolicyKind kind, const PolicyParams& params)
{
    Policy p;
    p.kind_ = kind;
    p.family_ = net.family();

    if (kind == PolicyKind::CustomTable) {
        for (const auto& [state, action] : params.table) {
            if (state.size() != net.queue_count() || action >= net.action_count()) {
                throw std::invalid_argument("custom policy table entry does not match the network");
            }
        }
        if (params.default_action >= net.action_count()) {
            throw std::invalid_argument("custom policy default action is out of range");
        }
        p.table_ = params.table;
        p.default_action_ = params.default_action;
        return p;
    }

    switch (net.family()) {
    case Family::PushPull:
    case Family::Ring: {
        if (kind == PolicyKind::Threshold && params.threshold < 0) {
            throw std::invalid_argument("threshold must be nonnegative");
        }
        p.threshold_ = kind == PolicyKind::PushPriority ? std::numeric_limits<std::int64_t>::max()
                       : kind == PolicyKind::Threshold  ? params.threshold
                                                        : 0;
        const std::size_t m = net.queue_count();
        for (std::size_t s = 0; s < m; ++s) {
            p.pull_queue_.push_back((s + m - 1) % m);
        }
        return p;
    }
    case Family::Reentrant: {
        if (kind == PolicyKind::Threshold) {
            throw std::invalid_argument("threshold policy is not defined for re-entrant networks");
        }
        const auto& layout = *net.reentrant();
        for (int server = 1; server <= 2; ++server) {
            const auto& ops = layout.server_operations(server);
            std::vector<std::size_t> order(ops.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            const bool last_first = kind == PolicyKind::PullPriority;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (ops[a].step != ops[b].step) {
                    return last_first ? ops[a].step > ops[b].step : ops[a].step < ops[b].step;
                }
                return ops[a].stream < ops[b].stream;
            });
            for (auto idx : order) {
                const auto& op = ops[idx];
                Policy::Preference pref{idx, std::nullopt};
                if (op.step > 0) {
                    pref.queue = layout.queue_of(op.stream, op.step);
                }
                p.preferences_[server - 1].push_back(pref);
            }
        }
        p.server2_ops_ = layout.server_operations(2).size();
        return p;
    }
    case Family::Custom:
        break;
    }
    throw std::invalid_argument("policy '" + std::string(policy_name(kind)) +
                                "' is not defined for custom networks; use a custom table");
}

ActionId Policy::resolve(std::span<const std::int64_t> z) const
{
    if (kind_ == PolicyKind::CustomTable) {
        const auto it = table_.find(std::vector<std::int64_t>(z.begin(), z.end()));
        return it == table_.end() ? default_action_ : it->second;
    }
    switch (family_) {
    case Family::PushPull: {
        const bool s1 = z[pull_queue_[0]] > threshold_;
        const bool s2 = z[pull_queue_[1]] > threshold_;
        // (push,push), (pull,push), (push,pull), (pull,pull)
        static constexpr ActionId by_pattern[4] = {0, 3, 2, 1};
        return by_pattern[(s1 ? 1 : 0) | (s2 ? 2 : 0)];
    }
    case Family::Ring: {
        const std::size_t m = pull_queue_.size();
        ActionId id = 0;
        for (std::size_t s = 0; s < m; ++s) {
            if (z[pull_queue_[s]] > threshold_) {
                id |= ActionId{1} << (m - 1 - s);
            }
        }
        return id;
    }
    case Family::Reentrant: {
        std::size_t chosen[2] = {0, 0};
        for (int s = 0; s < 2; ++s) {
            const auto& prefs = preferences_[s];
            chosen[s] = prefs.front().index;
            for (const auto& pref : prefs) {
                if (!pref.queue || z[*pref.queue] >= 1) {
                    chosen[s] = pref.index;
                    break;
                }
            }
        }
        return chosen[0] * server2_ops_ + chosen[1];
    }
    case Family::Custom:
        break;
    }
    return default_action_;
}

// ---------------------------------------------------------------------------
// Embedded chain

TransitionSampler::TransitionSampler(const NetworkSpec& net) : net_(&net)
{
    for (const auto& a : net.actions()) {
        std::vector<Move> moves;
        Rational cumulative = 0;
        bool pure_arrival = true;
        for (const auto& o : a.outcomes) {
            const Rational p = o.rate.value() / a.total_rate.value();
            cumulative += p;
            Move mv;
            if (auto k = o.displacement.incremented()) {
                mv.up = static_cast<int>(*k);
            }
            if (auto k = o.displacement.decremented()) {
                mv.down = static_cast<int>(*k);
                pure_arrival = false;
            }
            mv.probability = p.get_d();
            mv.cumulative = cumulative.get_d();
            moves.push_back(mv);
        }
        moves.back().cumulative = 1.0;
        has_pure_arrival_action_ = has_pure_arrival_action_ || pure_arrival;
        moves_.push_back(std::move(moves));
    }
}

bool TransitionSampler::fully_feasible(ActionId action, std::span<const std::int64_t> z) const
{
    for (const auto& mv : moves_[action]) {
        if (mv.down >= 0 && z[static_cast<std::size_t>(mv.down)] < 1) {
            return false;
        }
    }
    return true;
}

bool TransitionSampler::any_feasible(ActionId action, std::span<const std::int64_t> z) const
{
    for (const auto& mv : moves_[action]) {
        if (mv.down < 0 || z[static_cast<std::size_t>(mv.down)] >= 1) {
            return true;
        }
    }
    return false;
}

bool TransitionSampler::available(ActionId action, std::span<const std::int64_t> z) const
{
    if (action >= moves_.size()) {
        return false;
    }
    if (fully_feasible(action, z)) {
        return true;
    }
    if (has_pure_arrival_action_) {
        return false;
    }
    for (ActionId a = 0; a < moves_.size(); ++a) {
        if (fully_feasible(a, z)) {
            return false;
        }
    }
    return any_feasible(action, z);
}

namespace {

std::string describe_state(std::span<const std::int64_t> z)
{
    std::string s = "(";
    for (std::size_t k = 0; k < z.size(); ++k) {
        s += (k ? "," : "") + std::to_string(z[k]);
    }
    return s + ")";
}

} // namespace

std::size_t TransitionSampler::advance(ActionId action, std::span<std::int64_t> z, Rng& rng) const
{
    if (!available(action, z)) {
        const std::string label = action < net_->action_count() ? net_->action(action).label : std::to_string(action);
        throw std::logic_error("policy chose unavailable action " + label + " at state " + describe_state(z));
    }
    const auto& moves = moves_[action];
    const double u = uniform01(rng);
    std::size_t pick = moves.size() - 1;
    if (fully_feasible(action, z)) {
        for (std::size_t i = 0; i < moves.size(); ++i) {
            if (u < moves[i].cumulative) {
                pick = i;
                break;
            }
        }
    } else {
        // idle servers: renormalize over the feasible outcomes
        double mass = 0;
        for (const auto& mv : moves) {
            if (mv.down < 0 || z[static_cast<std::size_t>(mv.down)] >= 1) {
                mass += mv.probability;
            }
        }
        const double target = u * mass;
        double acc = 0;
        for (std::size_t i = 0; i < moves.size(); ++i) {
            const auto& mv = moves[i];
            if (mv.down < 0 || z[static_cast<std::size_t>(mv.down)] >= 1) {
                pick = i;
                acc += mv.probability;
                if (target < acc) {
                    break;
                }
            }
        }
    }
    const auto& mv = moves[pick];
    if (mv.up >= 0) {
        ++z[static_cast<std::size_t>(mv.up)];
    }
    if (mv.down >= 0) {
        --z[static_cast<std::size_t>(mv.down)];
    }
    return pick;
}

State step(const NetworkSpec& net, const Policy& policy, const State& z, Rng& rng)
{
    if (z.size() != net.queue_count()) {
        throw std::invalid_argument("state dimension does not match the network");
    }
    TransitionSampler sampler(net);
    std::vector<std::int64_t> next(z.queues().begin(), z.queues().end());
    sampler.advance(policy.resolve(next), next, rng);
    return State(std::move(next));
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

unsigned worker_count(unsigned requested, std::size_t trials)
{
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, trials));
}

/// Runs body(trial, worker) for every trial; worker w handles trials w, w+n, ...
template <class Body>
void for_each_trial(std::size_t trials, unsigned workers, Body body)
{
    if (workers <= 1) {
        for (std::size_t t = 0; t < trials; ++t) {
            body(t, 0u);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t t = w; t < trials; t += workers) {
                    body(t, w);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

double mean_of(const std::vector<double>& xs)
{
    double s = 0;
    for (double x : xs) {
        s += x;
    }
    return xs.empty() ? std::nan("") : s / static_cast<double>(xs.size());
}

/// Centered least-squares slope accumulator for y_n, n = 0..steps.
class SlopeAccumulator {
public:
    explicit SlopeAccumulator(std::size_t steps) : center_(static_cast<double>(steps) / 2.0)
    {
        const double n = static_cast<double>(steps + 1);
        denominator_ = n * (n * n - 1.0) / 12.0;
    }
    void add(std::size_t n, double y) { numerator_ += (static_cast<double>(n) - center_) * y; }
    double slope() const { return numerator_ / denominator_; }

private:
    double center_;
    double denominator_;
    double numerator_ = 0;
};

std::vector<double> alpha_increments(const NetworkSpec& net, const RationalVector& alpha, std::size_t action)
{
    std::vector<double> out;
    for (const auto& o : net.action(action).outcomes) {
        Rational s = 0;
        for (std::size_t k = 0; k < o.displacement.size(); ++k) {
            s += o.displacement[k] * alpha[k];
        }
        out.push_back(s.get_d());
    }
    return out;
}

std::int64_t total_of(std::span<const std::int64_t> z)
{
    return std::accumulate(z.begin(), z.end(), std::int64_t{0});
}

} // namespace

void validate_config(const NetworkSpec& net, const SimConfig& cfg)
{
    if (cfg.steps == 0 || cfg.trials == 0 || cfg.cap == 0) {
        throw std::invalid_argument("steps, trials and cap must be positive");
    }
    if (cfg.x0.size() != net.queue_count()) {
        throw std::invalid_argument("x0 has " + std::to_string(cfg.x0.size()) + " entries, network has M = " +
                                    std::to_string(net.queue_count()));
    }
}

ReturnTimeStats estimate_return_time(const NetworkSpec& net, const Policy& policy, const SimConfig& cfg)
{
    validate_config(net, cfg);
    const TransitionSampler sampler(net);
    const std::vector<std::int64_t> start(cfg.x0.queues().begin(), cfg.x0.queues().end());
    std::vector<std::size_t> times(cfg.trials, 0);
    std::vector<char> returned(cfg.trials, 0);

    for_each_trial(cfg.trials, worker_count(cfg.threads, cfg.trials), [&](std::size_t t, unsigned) {
        Rng rng = substream(cfg.seed, t);
        std::vector<std::int64_t> z = start;
        for (std::size_t n = 1; n <= cfg.cap; ++n) {
            sampler.advance(policy.resolve(z), z, rng);
            if (z == start) {
                times[t] = n;
                returned[t] = 1;
                return;
            }
        }
        times[t] = cfg.cap;
    });

    ReturnTimeStats stats;
    stats.trials = cfg.trials;
    double sum_returned = 0;
    double sum_all = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        sum_all += static_cast<double>(times[t]);
        if (returned[t]) {
            ++stats.returned;
            sum_returned += static_cast<double>(times[t]);
        }
    }
    stats.censored = stats.trials - stats.returned;
    stats.censored_fraction = Rational(static_cast<unsigned long>(stats.censored),
                                       static_cast<unsigned long>(stats.trials));
    stats.censored_fraction.canonicalize();
    stats.mean_uncensored = stats.returned ? sum_returned / static_cast<double>(stats.returned) : std::nan("");
    stats.mean_censored_at_cap = sum_all / static_cast<double>(stats.trials);
    return stats;
}

Rational increment_bound(const NetworkSpec& net, const RationalVector& alpha)
{
    Rational bound = 0;
    for (auto i : net.arrival_departure_set()) {
        bound = std::max(bound, Rational(abs(alpha.at(i))));
    }
    for (const auto& tr : net.transfer_set()) {
        bound = std::max(bound, Rational(abs(alpha.at(tr.to) - alpha.at(tr.from))));
    }
    return bound;
}

MartingaleReport martingale_test(const NetworkSpec& net, const Policy& policy, const RationalVector& alpha,
                                 const SimConfig& cfg)
{
    validate_config(net, cfg);
    if (alpha.size() != net.queue_count()) {
        throw std::invalid_argument("alpha dimension does not match the network");
    }
    const TransitionSampler sampler(net);
    std::vector<std::vector<double>> increments;
    std::vector<std::size_t> offsets;
    std::size_t slots = 0;
    for (std::size_t a = 0; a < net.action_count(); ++a) {
        increments.push_back(alpha_increments(net, alpha, a));
        offsets.push_back(slots);
        slots += increments.back().size();
    }

    const unsigned workers = worker_count(cfg.threads, cfg.trials);
    std::vector<double> deltas(cfg.trials, 0);
    std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(slots, 0));
    std::vector<double> max_abs(workers, 0);
    const std::vector<std::int64_t> start(cfg.x0.queues().begin(), cfg.x0.queues().end());

    for_each_trial(cfg.trials, workers, [&](std::size_t t, unsigned w) {
        Rng rng = substream(cfg.seed, t);
        std::vector<std::int64_t> z = start;
        double delta = 0;
        auto& my_counts = counts[w];
        double my_max = max_abs[w];
        for (std::size_t n = 0; n < cfg.steps; ++n) {
            const ActionId a = policy.resolve(z);
            const std::size_t o = sampler.advance(a, z, rng);
            const double inc = increments[a][o];
            delta += inc;
            my_max = std::max(my_max, std::abs(inc));
            ++my_counts[offsets[a] + o];
        }
        max_abs[w] = my_max;
        deltas[t] = delta;
    });

    MartingaleReport report;
    report.trials = cfg.trials;
    report.steps = cfg.steps;
    report.bound = increment_bound(net, alpha).get_d();
    report.max_abs_increment = *std::max_element(max_abs.begin(), max_abs.end());
    report.mean_delta_Z = mean_of(deltas);
    if (cfg.trials > 1) {
        double ss = 0;
        for (double d : deltas) {
            ss += (d - report.mean_delta_Z) * (d - report.mean_delta_Z);
        }
        report.std_error = std::sqrt(ss / static_cast<double>(cfg.trials - 1) / static_cast<double>(cfg.trials));
    }

    std::vector<std::uint64_t> total(slots, 0);
    for (const auto& c : counts) {
        for (std::size_t i = 0; i < slots; ++i) {
            total[i] += c[i];
        }
    }
    for (std::size_t a = 0; a < net.action_count(); ++a) {
        ActionIncrementStats s;
        s.action = a;
        double sum = 0;
        for (std::size_t o = 0; o < increments[a].size(); ++o) {
            s.count += total[offsets[a] + o];
            sum += static_cast<double>(total[offsets[a] + o]) * increments[a][o];
        }
        if (s.count == 0) {
            continue;
        }
        s.mean = sum / static_cast<double>(s.count);
        if (s.count > 1) {
            double ss = 0;
            for (std::size_t o = 0; o < increments[a].size(); ++o) {
                const double dev = increments[a][o] - s.mean;
                ss += static_cast<double>(total[offsets[a] + o]) * dev * dev;
            }
            s.std_error = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
        }
        report.per_action.push_back(s);
    }
    return report;
}

GrowthReport blowup_probe(const NetworkSpec& net, const Policy& policy, const SimConfig& cfg,
                          const std::optional<RationalVector>& alpha)
{
    validate_config(net, cfg);
    if (alpha && alpha->size() != net.queue_count()) {
        throw std::invalid_argument("alpha dimension does not match the network");
    }
    const TransitionSampler sampler(net);
    std::vector<double> alpha_d;
    if (alpha) {
        for (const auto& a : *alpha) {
            alpha_d.push_back(a.get_d());
        }
    }
    const std::vector<std::int64_t> start(cfg.x0.queues().begin(), cfg.x0.queues().end());
    const std::int64_t start_total = total_of(start);
    std::vector<double> slopes(cfg.trials, 0);
    std::vector<double> z_slopes(cfg.trials, 0);
    std::vector<char> growing(cfg.trials, 0);

    auto z_value = [&](const std::vector<std::int64_t>& z) {
        double s = 0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            s += alpha_d[k] * static_cast<double>(z[k]);
        }
        return s;
    };

    for_each_trial(cfg.trials, worker_count(cfg.threads, cfg.trials), [&](std::size_t t, unsigned) {
        Rng rng = substream(cfg.seed, t);
        std::vector<std::int64_t> z = start;
        SlopeAccumulator total_fit(cfg.steps);
        SlopeAccumulator z_fit(cfg.steps);
        std::int64_t total = start_total;
        total_fit.add(0, static_cast<double>(total));
        if (alpha) {
            z_fit.add(0, z_value(z));
        }
        for (std::size_t n = 1; n <= cfg.steps; ++n) {
            sampler.advance(policy.resolve(z), z, rng);
            total = total_of(z);
            total_fit.add(n, static_cast<double>(total));
            if (alpha) {
                z_fit.add(n, z_value(z));
            }
        }
        slopes[t] = total_fit.slope();
        z_slopes[t] = z_fit.slope();
        growing[t] = total > start_total ? 1 : 0;
    });

    GrowthReport report;
    report.trials = cfg.trials;
    report.steps = cfg.steps;
    report.slope = mean_of(slopes);
    report.fraction_growing = static_cast<double>(std::count(growing.begin(), growing.end(), 1)) /
                              static_cast<double>(cfg.trials);
    if (alpha) {
        report.z_slope = mean_of(z_slopes);
    }
    return report;
}

TrajectorySummary simulate_trajectories(const NetworkSpec& net, const Policy& policy, const SimConfig& cfg)
{
    validate_config(net, cfg);
    const TransitionSampler sampler(net);
    const std::size_t m = net.queue_count();
    const std::vector<std::int64_t> start(cfg.x0.queues().begin(), cfg.x0.queues().end());
    std::vector<std::vector<std::int64_t>> finals(cfg.trials);
    std::vector<std::int64_t> peaks(cfg.trials, 0);

    for_each_trial(cfg.trials, worker_count(cfg.threads, cfg.trials), [&](std::size_t t, unsigned) {
        Rng rng = substream(cfg.seed, t);
        std::vector<std::int64_t> z = start;
        std::int64_t peak = total_of(z);
        for (std::size_t n = 0; n < cfg.steps; ++n) {
            sampler.advance(policy.resolve(z), z, rng);
            peak = std::max(peak, total_of(z));
        }
        finals[t] = std::move(z);
        peaks[t] = peak;
    });

    TrajectorySummary out;
    out.trials = cfg.trials;
    out.steps = cfg.steps;
    out.mean_final_queue.assign(m, 0.0);
    double total = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        for (std::size_t k = 0; k < m; ++k) {
            out.mean_final_queue[k] += static_cast<double>(finals[t][k]);
        }
        total += static_cast<double>(total_of(finals[t]));
        out.max_total = std::max(out.max_total, peaks[t]);
    }
    for (auto& q : out.mean_final_queue) {
        q /= static_cast<double>(cfg.trials);
    }
    out.mean_final_total = total / static_cast<double>(cfg.trials);
    return out;
}

} // namespace nonstab
