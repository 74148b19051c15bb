#include "nonstab/netmodel.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace nonstab {

namespace {

constexpr std::size_t kMaxRingServers = 24;

/// Sorts by displacement and merges repeated displacements by summing rates.
std::vector<Outcome> canonical_outcomes(std::vector<Outcome> outcomes)
{
    std::map<Displacement, Rational> merged;
    for (auto& o : outcomes) {
        auto [it, inserted] = merged.try_emplace(o.displacement, o.rate.value());
        if (!inserted) {
            it->second += o.rate.value();
        }
    }
    std::vector<Outcome> out;
    out.reserve(merged.size());
    for (auto& [d, r] : merged) {
        out.push_back(Outcome{d, Rate(r)});
    }
    return out;
}

ActionSpec make_action(ActionId id, std::string label, std::vector<Outcome> outcomes)
{
    if (outcomes.empty()) {
        throw std::invalid_argument("action '" + label + "' has no outcomes");
    }
    ActionSpec a;
    a.id = id;
    a.label = std::move(label);
    a.outcomes = canonical_outcomes(std::move(outcomes));
    Rational total = 0;
    for (const auto& o : a.outcomes) {
        total += o.rate.value();
    }
    a.total_rate = Rate(total);
    return a;
}

std::string pattern_label(std::uint32_t pattern, std::size_t servers)
{
    std::string label = "(";
    for (std::size_t s = 0; s < servers; ++s) {
        if (s > 0) {
            label += ",";
        }
        label += (pattern >> s) & 1u ? "pull" : "push";
    }
    return label + ")";
}

std::string operation_label(const OperationRef& op)
{
    return "(" + std::to_string(op.stream + 1) + "," + std::to_string(op.step) + ")";
}

} // namespace

std::string_view family_name(Family family)
{
    switch (family) {
    case Family::PushPull:
        return "pushpull";
    case Family::Ring:
        return "ring";
    case Family::Reentrant:
        return "reentrant";
    case Family::Custom:
        return "custom";
    }
    return "custom";
}

// ---------------------------------------------------------------------------
// Displacement

Displacement::Displacement(std::vector<int> entries) : entries_(std::move(entries))
{
    int plus = 0;
    int minus = 0;
    for (int e : entries_) {
        if (e == 1) {
            ++plus;
        } else if (e == -1) {
            ++minus;
        } else if (e != 0) {
            throw std::invalid_argument("displacement entries must lie in {-1,0,1}");
        }
    }
    const bool single = plus + minus == 1;
    const bool pair = plus == 1 && minus == 1;
    if (!single && !pair) {
        throw std::invalid_argument("displacement must be +e_i, -e_i or e_i - e_j");
    }
}

Displacement Displacement::arrival(std::size_t dim, std::size_t queue)
{
    std::vector<int> e(dim, 0);
    e.at(queue) = 1;
    return Displacement(std::move(e));
}

Displacement Displacement::departure(std::size_t dim, std::size_t queue)
{
    std::vector<int> e(dim, 0);
    e.at(queue) = -1;
    return Displacement(std::move(e));
}

Displacement Displacement::transfer(std::size_t dim, std::size_t from, std::size_t to)
{
    if (from == to) {
        throw std::invalid_argument("transfer needs two distinct queues");
    }
    std::vector<int> e(dim, 0);
    e.at(from) = -1;
    e.at(to) = 1;
    return Displacement(std::move(e));
}

Displacement::Shape Displacement::shape() const
{
    const bool up = incremented().has_value();
    const bool down = decremented().has_value();
    if (up && down) {
        return Shape::Transfer;
    }
    return up ? Shape::Arrival : Shape::Departure;
}

std::optional<std::size_t> Displacement::decremented() const
{
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (entries_[k] < 0) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> Displacement::incremented() const
{
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (entries_[k] > 0) {
            return k;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// ReentrantLayout

ReentrantLayout::ReentrantLayout(std::vector<std::vector<OperationSpec>> streams) : streams_(std::move(streams))
{
    if (streams_.empty()) {
        throw std::invalid_argument("re-entrant network needs at least one stream");
    }
    for (std::size_t i = 0; i < streams_.size(); ++i) {
        if (streams_[i].size() < 2) {
            throw std::invalid_argument("stream " + std::to_string(i + 1) + " needs at least one buffer (n_i >= 1)");
        }
        offsets_.push_back(queue_count_);
        queue_count_ += streams_[i].size() - 1;
        for (std::size_t j = 0; j < streams_[i].size(); ++j) {
            const int server = streams_[i][j].server;
            if (server != 1 && server != 2) {
                throw std::invalid_argument("operation (" + std::to_string(i + 1) + "," + std::to_string(j) +
                                            ") has server " + std::to_string(server) + ", expected 1 or 2");
            }
            server_ops_[server - 1].push_back(OperationRef{i, j});
        }
    }
    for (int s = 0; s < 2; ++s) {
        if (server_ops_[s].empty()) {
            throw std::invalid_argument("server " + std::to_string(s + 1) + " has no operations");
        }
    }
}

std::size_t ReentrantLayout::queue_of(std::size_t stream, std::size_t step) const
{
    if (stream >= streams_.size() || step == 0 || step > buffers(stream)) {
        throw std::out_of_range("no buffer for operation (" + std::to_string(stream + 1) + "," + std::to_string(step) + ")");
    }
    return offsets_[stream] + step - 1;
}

OperationRef ReentrantLayout::buffer_of(std::size_t queue) const
{
    if (queue >= queue_count_) {
        throw std::out_of_range("queue index out of range");
    }
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), queue);
    const auto stream = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    return OperationRef{stream, queue - offsets_[stream] + 1};
}

Displacement ReentrantLayout::operation_displacement(std::size_t stream, std::size_t step) const
{
    const std::size_t n = buffers(stream);
    if (step == 0) {
        return Displacement::arrival(queue_count_, queue_of(stream, 1));
    }
    if (step == n) {
        return Displacement::departure(queue_count_, queue_of(stream, n));
    }
    return Displacement::transfer(queue_count_, queue_of(stream, step), queue_of(stream, step + 1));
}

RationalVector ReentrantLayout::operation_drift(std::size_t stream, std::size_t step) const
{
    const Displacement d = operation_displacement(stream, step);
    const Rational& rate = operation(stream, step).rate.value();
    RationalVector v(queue_count_);
    for (std::size_t k = 0; k < queue_count_; ++k) {
        v[k] = rate * d[k];
    }
    return v;
}

std::vector<std::size_t> ReentrantLayout::feed_queues() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < streams_.size(); ++i) {
        out.push_back(queue_of(i, 1));
    }
    return out;
}

std::vector<std::size_t> ReentrantLayout::drain_queues() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < streams_.size(); ++i) {
        out.push_back(queue_of(i, buffers(i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// NetworkSpec

const ActionSpec& NetworkSpec::action(ActionId id) const
{
    if (id >= actions_.size()) {
        throw std::out_of_range("unknown action id " + std::to_string(id));
    }
    return actions_[id];
}

std::vector<std::size_t> NetworkSpec::arrival_departure_set() const
{
    std::set<std::size_t> found;
    for (const auto& a : actions_) {
        for (const auto& o : a.outcomes) {
            if (o.displacement.shape() != Displacement::Shape::Transfer) {
                found.insert(o.displacement.incremented().value_or(o.displacement.decremented().value_or(0)));
            }
        }
    }
    return {found.begin(), found.end()};
}

std::vector<NetworkSpec::Transfer> NetworkSpec::transfer_set() const
{
    std::set<Transfer> found;
    for (const auto& a : actions_) {
        for (const auto& o : a.outcomes) {
            if (o.displacement.shape() == Displacement::Shape::Transfer) {
                found.insert(Transfer{*o.displacement.decremented(), *o.displacement.incremented()});
            }
        }
    }
    return {found.begin(), found.end()};
}

NetworkSpec build_push_pull(const Rate& lambda1, const Rate& lambda2, const Rate& mu1, const Rate& mu2)
{
    NetworkSpec net;
    net.queue_count_ = 2;
    net.family_ = Family::PushPull;
    net.lambda_ = {lambda1, lambda2};
    net.mu_ = {mu1, mu2};

    const auto up1 = Displacement::arrival(2, 0);
    const auto up2 = Displacement::arrival(2, 1);
    const auto down1 = Displacement::departure(2, 0);
    const auto down2 = Displacement::departure(2, 1);
    // bit 0: server 1 pulls queue 2; bit 1: server 2 pulls queue 1
    net.actions_.push_back(make_action(0, "(push,push)", {{up1, lambda1}, {up2, lambda2}}));
    net.actions_.push_back(make_action(1, "(pull,pull)", {{down1, mu1}, {down2, mu2}}));
    net.actions_.push_back(make_action(2, "(push,pull)", {{up1, lambda1}, {down1, mu1}}));
    net.actions_.push_back(make_action(3, "(pull,push)", {{up2, lambda2}, {down2, mu2}}));
    net.patterns_ = {0b00, 0b11, 0b10, 0b01};
    return net;
}

NetworkSpec build_ring(const std::vector<Rate>& lambda, const std::vector<Rate>& mu)
{
    const std::size_t m = lambda.size();
    if (mu.size() != m) {
        throw std::invalid_argument("ring needs as many pull rates as push rates");
    }
    if (m < 2) {
        throw std::invalid_argument("ring needs at least 2 servers");
    }
    if (m > kMaxRingServers) {
        throw std::invalid_argument("ring with " + std::to_string(m) + " servers exceeds the supported " +
                                    std::to_string(kMaxRingServers));
    }
    NetworkSpec net;
    net.queue_count_ = m;
    net.family_ = Family::Ring;
    net.lambda_ = lambda;
    net.mu_ = mu;

    const std::size_t count = std::size_t{1} << m;
    for (std::size_t index = 0; index < count; ++index) {
        std::uint32_t pattern = 0;
        std::vector<Outcome> outcomes;
        for (std::size_t s = 0; s < m; ++s) {
            const bool pulls = (index >> (m - 1 - s)) & 1u;
            if (pulls) {
                pattern |= 1u << s;
                const std::size_t q = (s + m - 1) % m;
                outcomes.push_back({Displacement::departure(m, q), mu[q]});
            } else {
                outcomes.push_back({Displacement::arrival(m, s), lambda[s]});
            }
        }
        net.actions_.push_back(make_action(index, pattern_label(pattern, m), std::move(outcomes)));
        net.patterns_.push_back(pattern);
    }
    return net;
}

NetworkSpec build_reentrant(std::vector<std::vector<OperationSpec>> streams)
{
    ReentrantLayout layout(std::move(streams));
    NetworkSpec net;
    net.queue_count_ = layout.queue_count();
    net.family_ = Family::Reentrant;

    const auto& ops1 = layout.server_operations(1);
    const auto& ops2 = layout.server_operations(2);
    for (std::size_t a = 0; a < ops1.size(); ++a) {
        for (std::size_t b = 0; b < ops2.size(); ++b) {
            const auto& p = ops1[a];
            const auto& q = ops2[b];
            std::vector<Outcome> outcomes{
                {layout.operation_displacement(p.stream, p.step), layout.operation(p.stream, p.step).rate},
                {layout.operation_displacement(q.stream, q.step), layout.operation(q.stream, q.step).rate},
            };
            const ActionId id = net.actions_.size();
            net.actions_.push_back(
                make_action(id, "(" + operation_label(p) + "," + operation_label(q) + ")", std::move(outcomes)));
            net.op_pairs_.emplace_back(a, b);
        }
    }
    net.layout_ = std::move(layout);
    return net;
}

NetworkSpec build_custom(std::size_t queue_count, std::vector<CustomAction> actions)
{
    if (queue_count == 0) {
        throw std::invalid_argument("custom network needs M >= 1");
    }
    if (actions.empty()) {
        throw std::invalid_argument("custom network needs at least one action");
    }
    NetworkSpec net;
    net.queue_count_ = queue_count;
    net.family_ = Family::Custom;
    bool has_arrival = false;
    for (auto& spec : actions) {
        for (const auto& o : spec.outcomes) {
            if (o.displacement.size() != queue_count) {
                throw std::invalid_argument("action '" + spec.label + "' has a displacement of length " +
                                            std::to_string(o.displacement.size()) + ", expected " +
                                            std::to_string(queue_count));
            }
            has_arrival = has_arrival || o.displacement.shape() == Displacement::Shape::Arrival;
        }
        const ActionId id = net.actions_.size();
        net.actions_.push_back(make_action(id, std::move(spec.label), std::move(spec.outcomes)));
    }
    if (!has_arrival) {
        throw std::invalid_argument("custom network has no arrival outcome; the empty state would have no action");
    }
    return net;
}

// ---------------------------------------------------------------------------
// States and transitions

State::State(std::vector<std::int64_t> queues) : queues_(std::move(queues))
{
    for (auto q : queues_) {
        if (q < 0) {
            throw std::invalid_argument("queue lengths must be nonnegative");
        }
    }
}

bool fully_feasible(const ActionSpec& action, std::span<const std::int64_t> z)
{
    for (const auto& o : action.outcomes) {
        if (auto k = o.displacement.decremented(); k && z[*k] < 1) {
            return false;
        }
    }
    return true;
}

namespace {

bool outcome_feasible(const Outcome& o, std::span<const std::int64_t> z)
{
    const auto k = o.displacement.decremented();
    return !k || z[*k] >= 1;
}

void check_dimension(const NetworkSpec& net, const State& z)
{
    if (z.size() != net.queue_count()) {
        throw std::invalid_argument("state has " + std::to_string(z.size()) + " queues, network has " +
                                    std::to_string(net.queue_count()));
    }
}

} // namespace

std::vector<ActionId> available_actions(const NetworkSpec& net, const State& z)
{
    check_dimension(net, z);
    std::vector<ActionId> out;
    for (const auto& a : net.actions()) {
        if (fully_feasible(a, z.queues())) {
            out.push_back(a.id);
        }
    }
    if (!out.empty()) {
        return out;
    }
    for (const auto& a : net.actions()) {
        if (std::any_of(a.outcomes.begin(), a.outcomes.end(),
                        [&](const Outcome& o) { return outcome_feasible(o, z.queues()); })) {
            out.push_back(a.id);
        }
    }
    return out;
}

std::vector<WeightedDisplacement> transition_distribution(const NetworkSpec& net, ActionId action)
{
    const ActionSpec& a = net.action(action);
    std::vector<WeightedDisplacement> out;
    out.reserve(a.outcomes.size());
    for (const auto& o : a.outcomes) {
        out.push_back({o.displacement, o.rate.value() / a.total_rate.value()});
    }
    return out;
}

std::vector<WeightedDisplacement> transition_distribution_at(const NetworkSpec& net, ActionId action, const State& z)
{
    check_dimension(net, z);
    const ActionSpec& a = net.action(action);
    Rational total = 0;
    for (const auto& o : a.outcomes) {
        if (outcome_feasible(o, z.queues())) {
            total += o.rate.value();
        }
    }
    if (sgn(total) == 0) {
        throw std::domain_error("action '" + a.label + "' has no feasible outcome at this state");
    }
    std::vector<WeightedDisplacement> out;
    for (const auto& o : a.outcomes) {
        if (outcome_feasible(o, z.queues())) {
            out.push_back({o.displacement, o.rate.value() / total});
        }
    }
    return out;
}

} // namespace nonstab
