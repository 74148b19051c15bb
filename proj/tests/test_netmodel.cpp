#include "nonstab/netmodel.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

namespace nonstab {
namespace {

using Multiset = std::map<std::vector<int>, Rational>;

Multiset outcome_multiset(const ActionSpec& a)
{
    Multiset m;
    for (const auto& o : a.outcomes) {
        m[std::vector<int>(o.displacement.entries().begin(), o.displacement.entries().end())] += o.rate.value();
    }
    return m;
}

const ActionSpec& by_label(const NetworkSpec& net, const std::string& label)
{
    for (const auto& a : net.actions()) {
        if (a.label == label) {
            return a;
        }
    }
    throw std::runtime_error("no action " + label);
}

std::vector<Rate> rates(std::initializer_list<int> xs)
{
    std::vector<Rate> out;
    for (int x : xs) {
        out.emplace_back(x);
    }
    return out;
}

NetworkSpec two_stream_net()
{
    std::mt19937_64 rng(7);
    return build_reentrant(testing::random_critical_streams(testing::two_stream_servers(), rng));
}

TEST(Rational, ParseAndPrint)
{
    EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
    EXPECT_EQ(parse_rational("-7"), Rational(-7));
    EXPECT_EQ(to_string(Rational(3, 2)), "3/2");
    EXPECT_EQ(to_string(parse_rational("-4/2")), "-2");
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(parse_rational("1.5"), std::invalid_argument);
    EXPECT_THROW(parse_rational(""), std::invalid_argument);
    EXPECT_THROW(Rate::parse("0"), std::invalid_argument);
    EXPECT_THROW(Rate::parse("-1/2"), std::invalid_argument);
    EXPECT_EQ(Rate::parse("4/6").value(), Rational(2, 3));
}

TEST(Rational, NormalizeDirection)
{
    EXPECT_EQ(normalize_direction({Rational(1), Rational(-1, 2), Rational(1, 3), Rational(-1, 4)}),
              (RationalVector{12, -6, 4, -3}));
    EXPECT_EQ(normalize_direction({Rational(-2), Rational(4)}), (RationalVector{1, -2}));
    EXPECT_EQ(normalize_direction({Rational(0), Rational(-3, 7)}), (RationalVector{0, 1}));
    EXPECT_TRUE(proportional({Rational(1), Rational(-1, 2)}, {Rational(2), Rational(-1)}));
}

TEST(Displacement, ThreeShapes)
{
    EXPECT_EQ(Displacement({0, 1, 0}).shape(), Displacement::Shape::Arrival);
    EXPECT_EQ(Displacement({-1, 0}).shape(), Displacement::Shape::Departure);
    EXPECT_EQ(Displacement({1, -1}).shape(), Displacement::Shape::Transfer);
    EXPECT_THROW(Displacement({0, 0}), std::invalid_argument);
    EXPECT_THROW(Displacement({1, 1}), std::invalid_argument);
    EXPECT_THROW(Displacement({2, 0}), std::invalid_argument);
    EXPECT_THROW(Displacement({1, -1, 1}), std::invalid_argument);
    EXPECT_THROW(Displacement::transfer(3, 1, 1), std::invalid_argument);
}

TEST(PushPull, UnitRates)
{
    const auto net = build_push_pull(1, 1, 1, 1);
    EXPECT_EQ(net.queue_count(), 2u);
    ASSERT_EQ(net.action_count(), 4u);
    const auto& a = by_label(net, "(push,pull)");
    EXPECT_EQ(outcome_multiset(a), (Multiset{{{1, 0}, 1}, {{-1, 0}, 1}}));
    for (const auto& wd : transition_distribution(net, a.id)) {
        EXPECT_EQ(wd.probability, Rational(1, 2));
    }
}

TEST(PushPull, PushPushProbabilities)
{
    const auto net = build_push_pull(1, 2, 3, 4);
    const auto dist = transition_distribution(net, by_label(net, "(push,push)").id);
    ASSERT_EQ(dist.size(), 2u);
    // lexicographic order: (0,1) before (1,0)
    EXPECT_EQ(dist[0].displacement, Displacement({0, 1}));
    EXPECT_EQ(dist[0].probability, Rational(2, 3));
    EXPECT_EQ(dist[1].displacement, Displacement({1, 0}));
    EXPECT_EQ(dist[1].probability, Rational(1, 3));
}

TEST(PushPull, NonPositiveRateRejected)
{
    EXPECT_THROW(build_push_pull(1, 1, Rate(0), 1), std::invalid_argument);
}

TEST(PushPull, TransitionDistributions)
{
    const auto net = build_push_pull(1, 1, 1, 1);
    const auto pullpull = transition_distribution(net, by_label(net, "(pull,pull)").id);
    ASSERT_EQ(pullpull.size(), 2u);
    EXPECT_EQ(pullpull[0].displacement, Displacement({-1, 0}));
    EXPECT_EQ(pullpull[0].probability, Rational(1, 2));
    EXPECT_EQ(pullpull[1].displacement, Displacement({0, -1}));
    EXPECT_EQ(pullpull[1].probability, Rational(1, 2));

    const auto net2 = build_push_pull(1, 2, 1, 2);
    const auto pushpush = transition_distribution(net2, 0);
    EXPECT_EQ(pushpush[1].probability, Rational(1, 3)); // +e1
    EXPECT_EQ(pushpush[0].probability, Rational(2, 3)); // +e2

    EXPECT_THROW(transition_distribution(net, 4), std::out_of_range);
}

TEST(PushPull, Availability)
{
    const auto net = build_push_pull(1, 1, 1, 1);
    EXPECT_EQ(available_actions(net, State({0, 0})), (std::vector<ActionId>{0}));
    for (std::int64_t x : {1, 5, 100}) {
        const auto avail = available_actions(net, State({x, 0}));
        ASSERT_EQ(avail.size(), 2u);
        EXPECT_EQ(net.action(avail[0]).label, "(push,push)");
        EXPECT_EQ(net.action(avail[1]).label, "(push,pull)");
        const auto mirrored = available_actions(net, State({0, x}));
        EXPECT_EQ(net.action(mirrored[1]).label, "(pull,push)");
    }
    EXPECT_EQ(available_actions(net, State({2, 3})).size(), 4u);
}

TEST(Ring, TwoServersMatchPushPull)
{
    const auto lambda = std::vector<Rate>{Rate(2), Rate(3, 2)};
    const auto mu = std::vector<Rate>{Rate(5), Rate(1, 7)};
    const auto ring = build_ring(lambda, mu);
    const auto pp = build_push_pull(lambda[0], lambda[1], mu[0], mu[1]);
    ASSERT_EQ(ring.action_count(), pp.action_count());
    for (const auto& a : pp.actions()) {
        EXPECT_EQ(outcome_multiset(by_label(ring, a.label)), outcome_multiset(a)) << a.label;
    }
}

TEST(Ring, FourServersAllPush)
{
    const auto net = build_ring(rates({1, 1, 1, 1}), rates({1, 1, 1, 1}));
    EXPECT_EQ(net.action_count(), 16u);
    const auto& all_push = by_label(net, "(push,push,push,push)");
    const auto dist = transition_distribution(net, all_push.id);
    ASSERT_EQ(dist.size(), 4u);
    for (const auto& wd : dist) {
        EXPECT_EQ(wd.probability, Rational(1, 4));
        EXPECT_EQ(wd.displacement.shape(), Displacement::Shape::Arrival);
    }
    EXPECT_EQ(available_actions(net, State({1, 1, 1, 1})).size(), 16u);
}

TEST(Ring, ThreeServersPushPullPull)
{
    // server 1 pushes stream 1, server 2 pulls stream 1, server 3 pulls stream 2
    const auto net = build_ring(rates({1, 1, 1}), rates({1, 1, 1}));
    const auto& a = by_label(net, "(push,pull,pull)");
    EXPECT_EQ(outcome_multiset(a), (Multiset{{{1, 0, 0}, 1}, {{-1, 0, 0}, 1}, {{0, -1, 0}, 1}}));
}

TEST(Ring, Errors)
{
    EXPECT_THROW(build_ring(rates({1}), rates({1})), std::invalid_argument);
    EXPECT_THROW(build_ring(rates({1, 1}), rates({1})), std::invalid_argument);
}

TEST(Reentrant, TwoStreamCounts)
{
    const auto net = two_stream_net();
    EXPECT_EQ(net.queue_count(), 7u);
    EXPECT_EQ(net.action_count(), 20u);
    EXPECT_EQ(net.reentrant()->server_operations(1).size(), 4u);
    EXPECT_EQ(net.reentrant()->server_operations(2).size(), 5u);
}

TEST(Reentrant, SmallestInstance)
{
    const auto net = build_reentrant({{{1, Rate(1)}, {2, Rate(1)}}});
    EXPECT_EQ(net.queue_count(), 1u);
    ASSERT_EQ(net.action_count(), 1u);
    EXPECT_EQ(outcome_multiset(net.action(0)), (Multiset{{{1}, 1}, {{-1}, 1}}));
    const auto dist = transition_distribution(net, 0);
    ASSERT_EQ(dist.size(), 2u);
    EXPECT_EQ(dist[0].probability, Rational(1, 2));
    EXPECT_EQ(dist[1].probability, Rational(1, 2));
}

TEST(Reentrant, ServerWithoutPushIdlesWhenStarved)
{
    const auto net = build_reentrant({{{1, Rate(1)}, {2, Rate(1)}}});
    EXPECT_EQ(available_actions(net, State({0})), (std::vector<ActionId>{0}));
    const auto at_zero = transition_distribution_at(net, 0, State({0}));
    ASSERT_EQ(at_zero.size(), 1u);
    EXPECT_EQ(at_zero[0].displacement, Displacement({1}));
    EXPECT_EQ(at_zero[0].probability, Rational(1));
    EXPECT_EQ(transition_distribution_at(net, 0, State({3})).size(), 2u);
}

TEST(Reentrant, PushPullShapedEqualsPushPull)
{
    const Rate m10(3), m11(5), m20(2, 3), m21(7);
    const auto re = build_reentrant({{{1, m10}, {2, m11}}, {{2, m20}, {1, m21}}});
    const auto pp = build_push_pull(m10, m20, m11, m21);
    EXPECT_EQ(re.queue_count(), pp.queue_count());
    ASSERT_EQ(re.action_count(), pp.action_count());
    std::vector<Multiset> lhs, rhs;
    for (const auto& a : re.actions()) {
        lhs.push_back(outcome_multiset(a));
    }
    for (const auto& a : pp.actions()) {
        rhs.push_back(outcome_multiset(a));
    }
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    EXPECT_EQ(lhs, rhs);
}

TEST(Reentrant, QueueNumberingAndIndexSets)
{
    const auto net = two_stream_net();
    const auto& layout = *net.reentrant();
    EXPECT_EQ(layout.queue_of(0, 1), 0u);
    EXPECT_EQ(layout.queue_of(0, 3), 2u);
    EXPECT_EQ(layout.queue_of(1, 1), 3u);
    EXPECT_EQ(layout.queue_of(1, 4), 6u);
    for (std::size_t k = 0; k < 7; ++k) {
        const auto ref = layout.buffer_of(k);
        EXPECT_EQ(layout.queue_of(ref.stream, ref.step), k);
    }
    EXPECT_EQ(layout.feed_queues(), (std::vector<std::size_t>{0, 3}));
    EXPECT_EQ(layout.drain_queues(), (std::vector<std::size_t>{2, 6}));

    std::vector<NetworkSpec::Transfer> expected;
    for (std::size_t i = 0; i < layout.stream_count(); ++i) {
        for (std::size_t j = 1; j < layout.buffers(i); ++j) {
            expected.push_back({layout.queue_of(i, j), layout.queue_of(i, j + 1)});
        }
    }
    EXPECT_EQ(net.transfer_set(), expected);
    EXPECT_EQ(net.arrival_departure_set(), (std::vector<std::size_t>{0, 2, 3, 6}));
}

TEST(Reentrant, Errors)
{
    EXPECT_THROW(build_reentrant({}), std::invalid_argument);
    EXPECT_THROW(build_reentrant({{{1, Rate(1)}}}), std::invalid_argument);
    EXPECT_THROW(build_reentrant({{{1, Rate(1)}, {1, Rate(1)}}}), std::invalid_argument);
    EXPECT_THROW(build_reentrant({{{1, Rate(1)}, {3, Rate(1)}}}), std::invalid_argument);
}

TEST(Custom, MergesDuplicatesAndValidates)
{
    const auto net = build_custom(2, {{"a", {{Displacement({1, 0}), Rate(1)}, {Displacement({1, 0}), Rate(2)}}},
                                      {"b", {{Displacement({-1, 1}), Rate(1)}}}});
    ASSERT_EQ(net.action(0).outcomes.size(), 1u);
    EXPECT_EQ(net.action(0).outcomes[0].rate.value(), Rational(3));
    EXPECT_EQ(net.action(0).total_rate.value(), Rational(3));
    EXPECT_EQ(net.transfer_set(), (std::vector<NetworkSpec::Transfer>{{0, 1}}));

    EXPECT_THROW(build_custom(2, {{"no arrival", {{Displacement({-1, 0}), Rate(1)}}}}), std::invalid_argument);
    EXPECT_THROW(build_custom(2, {{"wrong dim", {{Displacement({1, 0, 0}), Rate(1)}}}}), std::invalid_argument);
    EXPECT_THROW(build_custom(2, {}), std::invalid_argument);
}

// Properties over every constructor.

std::vector<NetworkSpec> sample_networks()
{
    std::mt19937_64 rng(11);
    std::vector<NetworkSpec> nets;
    nets.push_back(build_push_pull(Rate(testing::random_positive_rational(rng)), Rate(2), Rate(3, 4), Rate(1)));
    for (std::size_t m = 2; m <= 6; ++m) {
        std::vector<Rate> l, u;
        for (std::size_t i = 0; i < m; ++i) {
            l.emplace_back(testing::random_positive_rational(rng));
            u.emplace_back(testing::random_positive_rational(rng));
        }
        nets.push_back(build_ring(l, u));
    }
    nets.push_back(two_stream_net());
    nets.push_back(build_reentrant({{{1, Rate(1)}, {2, Rate(2)}, {1, Rate(3)}}, {{2, Rate(1)}, {1, Rate(5)}}}));
    return nets;
}

TEST(NetworkProperties, SupportsHaveThreeShapesAndLawsSumToOne)
{
    for (const auto& net : sample_networks()) {
        for (const auto& a : net.actions()) {
            Rational total = 0;
            for (const auto& wd : transition_distribution(net, a.id)) {
                EXPECT_EQ(wd.displacement.size(), net.queue_count());
                EXPECT_GT(wd.probability, 0);
                total += wd.probability;
            }
            EXPECT_EQ(total, 1);
        }
    }
}

TEST(NetworkProperties, AvailabilityNonemptyAndFullInInterior)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> q(0, 2);
    for (const auto& net : sample_networks()) {
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::int64_t> z(net.queue_count());
            for (auto& x : z) {
                x = q(rng);
            }
            const auto avail = available_actions(net, State(z));
            EXPECT_FALSE(avail.empty());
            for (auto a : avail) {
                for (const auto& wd : transition_distribution_at(net, a, State(z))) {
                    for (std::size_t k = 0; k < z.size(); ++k) {
                        EXPECT_GE(z[k] + wd.displacement[k], 0);
                    }
                }
            }
        }
        std::vector<std::int64_t> ones(net.queue_count(), 1);
        EXPECT_EQ(available_actions(net, State(ones)).size(), net.action_count());
    }
}

TEST(NetworkProperties, NoTransfersInPushPullAndRing)
{
    for (const auto& net : sample_networks()) {
        if (net.family() == Family::PushPull || net.family() == Family::Ring) {
            EXPECT_TRUE(net.transfer_set().empty());
            EXPECT_EQ(net.arrival_departure_set().size(), net.queue_count());
        }
    }
}

TEST(State, RejectsNegative)
{
    EXPECT_THROW(State({0, -1}), std::invalid_argument);
    const auto net = build_push_pull(1, 1, 1, 1);
    EXPECT_THROW(available_actions(net, State({0, 0, 0})), std::invalid_argument);
}

} // namespace
} // namespace nonstab
