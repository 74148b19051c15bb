#include "nonstab/cli.hpp"

#include "nonstab/certify.hpp"
#include "nonstab/report.hpp"
#include "nonstab/simulate.hpp"
#include "nonstab/spec_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

namespace nonstab::cli {

namespace {

struct Options {
    std::string spec_path;
    std::string format = "text";
    // certify
    int coef_bound = 3;
    std::size_t max_combinations = 100000;
    // simulation
    std::string policy = "pull-priority";
    std::int64_t threshold = 0;
    std::uint64_t seed = 0;
    std::size_t steps = 1000;
    std::size_t trials = 10000;
    std::size_t cap = 10000;
    std::string x0;
    std::string alpha;
    unsigned threads = 0;
};

std::vector<std::string> split_commas(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        parts.push_back(item);
    }
    return parts;
}

State parse_x0(const std::string& text, std::size_t dim)
{
    if (text.empty()) {
        return State::origin(dim);
    }
    std::vector<std::int64_t> queues;
    for (const auto& part : split_commas(text)) {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || ptr != part.data() + part.size() || v < 0) {
            throw std::invalid_argument("--x0: '" + part + "' is not a nonnegative integer");
        }
        queues.push_back(v);
    }
    if (queues.size() != dim) {
        throw std::invalid_argument("--x0 has " + std::to_string(queues.size()) + " entries, network has M = " +
                                    std::to_string(dim));
    }
    return State(std::move(queues));
}

RationalVector parse_alpha(const std::string& text, std::size_t dim)
{
    RationalVector alpha;
    for (const auto& part : split_commas(text)) {
        alpha.push_back(parse_rational(part));
    }
    if (alpha.size() != dim) {
        throw std::invalid_argument("--alpha has " + std::to_string(alpha.size()) + " entries, network has M = " +
                                    std::to_string(dim));
    }
    if (is_zero(alpha)) {
        throw std::invalid_argument("--alpha must be nonzero");
    }
    return alpha;
}

Policy policy_from(const NetworkSpec& net, const Options& opt)
{
    const PolicyKind kind = parse_policy_kind(opt.policy);
    if (kind == PolicyKind::CustomTable) {
        throw std::invalid_argument("custom policy tables are not available from the command line");
    }
    PolicyParams params;
    params.threshold = opt.threshold;
    return make_policy(net, kind, params);
}

SimConfig config_from(const NetworkSpec& net, const Options& opt)
{
    SimConfig cfg;
    cfg.seed = opt.seed;
    cfg.steps = opt.steps;
    cfg.trials = opt.trials;
    cfg.cap = opt.cap;
    cfg.threads = opt.threads;
    cfg.x0 = parse_x0(opt.x0, net.queue_count());
    validate_config(net, cfg);
    return cfg;
}

int dispatch(const std::string& verb, const Options& opt, std::ostream& out)
{
    const NetworkSpec net = load_network_spec(opt.spec_path);
    const bool json = opt.format == "json";
    auto emit = [&](const std::string& text) {
        out << text;
        if (json) {
            out << '\n';
        }
    };

    if (verb == "certify") {
        CertifyOptions co;
        co.coefficient_bound = opt.coef_bound;
        co.max_combinations = opt.max_combinations;
        const auto result = certify_nonstabilizable(net, co);
        emit(json ? certificate_json(result) : certificate_text(result));
        return result.verdict == Verdict::NonStabilizable ? kExitCertified : kExitInconclusive;
    }
    if (verb == "drift") {
        const auto d = drift_matrix(net);
        const auto r = rank(d);
        emit(json ? drift_json(net, d, r) : drift_text(net, d, r));
        return 0;
    }
    if (verb == "alpha") {
        RationalVector alpha;
        switch (net.family()) {
        case Family::PushPull:
        case Family::Ring:
            alpha = ring_alpha_even(net);
            break;
        case Family::Reentrant:
            alpha = reentrant_alpha(net);
            break;
        case Family::Custom:
            throw std::domain_error("custom networks have no closed-form alpha");
        }
        emit(json ? alpha_json(net, alpha) : alpha_text(net, alpha));
        return 0;
    }
    if (verb == "export") {
        out << export_custom_spec(net);
        return 0;
    }

    const Policy policy = policy_from(net, opt);
    const SimConfig cfg = config_from(net, opt);
    if (verb == "simulate") {
        const auto s = simulate_trajectories(net, policy, cfg);
        emit(json ? trajectory_json(s) : trajectory_text(s));
        return 0;
    }
    if (verb == "return-time") {
        const auto s = estimate_return_time(net, policy, cfg);
        emit(json ? return_time_json(s) : return_time_text(s));
        return 0;
    }
    if (verb == "martingale") {
        RationalVector alpha;
        if (!opt.alpha.empty()) {
            alpha = parse_alpha(opt.alpha, net.queue_count());
        } else {
            const auto cert = certify_nonstabilizable(net);
            if (cert.verdict != Verdict::NonStabilizable) {
                throw std::domain_error("no harmonic certificate for this network; pass --alpha explicitly");
            }
            alpha = cert.certificate->alpha;
        }
        const auto r = martingale_test(net, policy, alpha, cfg);
        emit(json ? martingale_json(r) : martingale_text(r));
        return 0;
    }
    if (verb == "blowup") {
        std::optional<RationalVector> alpha;
        if (!opt.alpha.empty()) {
            alpha = parse_alpha(opt.alpha, net.queue_count());
        }
        const auto r = blowup_probe(net, policy, cfg, alpha);
        emit(json ? growth_json(r) : growth_text(r));
        return 0;
    }
    throw std::logic_error("unhandled command " + verb);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Harmonic certificates of non-stabilizability for controlled queueing networks", "nonstab"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("spec", opt.spec_path, "Network spec file (JSON)")->required();
        sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };
    auto add_simulation = [&](CLI::App* sub) {
        sub->add_option("--policy", opt.policy, "pull-priority, push-priority or threshold");
        sub->add_option("--threshold", opt.threshold, "Pull iff the pull queue holds more than this (threshold policy)");
        sub->add_option("--seed", opt.seed, "Base seed");
        sub->add_option("--steps", opt.steps, "Steps per trajectory");
        sub->add_option("--trials", opt.trials, "Independent trials");
        sub->add_option("--cap", opt.cap, "Censoring horizon for return times");
        sub->add_option("--x0", opt.x0, "Initial state, comma separated (default: origin)");
        sub->add_option("--threads", opt.threads, "Worker threads (0: hardware concurrency)");
    };

    auto* certify = app.add_subcommand("certify", "Search for a harmonic certificate (exit 0 certified, 2 inconclusive)");
    add_common(certify);
    certify->add_option("--coef-bound", opt.coef_bound, "Coefficient bound for basis combinations");
    certify->add_option("--max-combinations", opt.max_combinations, "Budget of basis combinations");

    add_common(app.add_subcommand("drift", "Print the action drift matrix and its rank"));
    add_common(app.add_subcommand("alpha", "Print the family's closed-form alpha"));
    add_common(app.add_subcommand("export", "Print the network as a custom-family spec"));

    auto* simulate = app.add_subcommand("simulate", "Trajectory summary under a policy");
    add_common(simulate);
    add_simulation(simulate);
    auto* return_time = app.add_subcommand("return-time", "Return-time statistics to x0");
    add_common(return_time);
    add_simulation(return_time);
    auto* martingale = app.add_subcommand("martingale", "Empirical drift of alpha'X_n");
    add_common(martingale);
    add_simulation(martingale);
    martingale->add_option("--alpha", opt.alpha, "Comma-separated rationals (default: certificate alpha)");
    auto* blowup = app.add_subcommand("blowup", "Growth rate of the total queue length");
    add_common(blowup);
    add_simulation(blowup);
    blowup->add_option("--alpha", opt.alpha, "Also report the slope of alpha'X_n");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        const auto* chosen = app.get_subcommands().front();
        return dispatch(chosen->get_name(), opt, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace nonstab::cli
