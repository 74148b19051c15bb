#include "nonstab/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <utility>
#include <vector>

namespace nonstab {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Flat object writer; values are pre-rendered JSON.
class FlatObject {
public:
    FlatObject& raw(std::string key, std::string value)
    {
        fields_.emplace_back(std::move(key), std::move(value));
        return *this;
    }
    FlatObject& number(std::string key, double value) { return raw(std::move(key), format_double(value)); }
    FlatObject& integer(std::string key, long long value) { return raw(std::move(key), std::to_string(value)); }
    FlatObject& string(std::string key, const std::string& value)
    {
        return raw(std::move(key), ordered_json(value).dump());
    }

    std::string str() const
    {
        std::string out = "{";
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            out += (i ? "," : "") + ordered_json(fields_[i].first).dump() + ":" + fields_[i].second;
        }
        return out + "}";
    }

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

std::string join(const std::vector<std::string>& parts, const char* sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? sep : "") + parts[i];
    }
    return out;
}

std::string bracketed(const RationalVector& v)
{
    return "[" + join(to_strings(v), ", ") + "]";
}

std::string_view verdict_name(Verdict v)
{
    return v == Verdict::NonStabilizable ? "non-stabilizable" : "inconclusive";
}

} // namespace

std::string format_double(double x)
{
    if (!std::isfinite(x)) {
        return "null";
    }
    return fmt::format("{:.17g}", x);
}

std::string certificate_json(const CertificationResult& result)
{
    ordered_json doc;
    doc["verdict"] = verdict_name(result.verdict);
    doc["rank"] = result.rank;
    doc["M"] = result.queue_count;
    doc["L"] = result.action_count;
    doc["alpha"] = result.certificate ? to_strings(result.certificate->alpha) : std::vector<std::string>{};
    doc["nondegeneracy"] = {
        {"direct", result.certificate && result.certificate->checks.nondeg_direct},
        {"lemma", result.certificate && result.certificate->checks.nondeg_lemma},
    };
    doc["critical"] = result.critical ? ordered_json(*result.critical) : ordered_json(nullptr);
    auto basis = ordered_json::array();
    for (const auto& b : result.null_space_basis) {
        basis.push_back(to_strings(b));
    }
    doc["null_space_basis"] = std::move(basis);
    return doc.dump();
}

std::string certificate_text(const CertificationResult& result)
{
    std::string out;
    out += fmt::format("verdict: {}\n", verdict_name(result.verdict));
    out += fmt::format("rank: {} (M = {}, L = {})\n", result.rank, result.queue_count, result.action_count);
    out += fmt::format("critical: {}\n", result.critical ? (*result.critical ? "yes" : "no") : "n/a");
    if (result.certificate) {
        const auto& c = *result.certificate;
        out += fmt::format("alpha: {}\n", bracketed(c.alpha));
        out += fmt::format("D alpha = 0: {}\n", c.checks.dalpha_zero ? "yes" : "no");
        out += fmt::format("non-degenerate (support): {}\n", c.checks.nondeg_direct ? "yes" : "no");
        out += fmt::format("non-degenerate (index sets): {}\n", c.checks.nondeg_lemma ? "yes" : "no");
    }
    if (!result.null_space_basis.empty()) {
        out += "null space basis:\n";
        for (const auto& b : result.null_space_basis) {
            out += "  " + bracketed(b) + "\n";
        }
    }
    return out;
}

std::string drift_json(const NetworkSpec& net, const DriftMatrix& d, std::size_t rank)
{
    ordered_json doc;
    doc["M"] = net.queue_count();
    doc["L"] = net.action_count();
    doc["rank"] = rank;
    auto labels = ordered_json::array();
    auto rows = ordered_json::array();
    for (std::size_t a = 0; a < d.rows(); ++a) {
        labels.push_back(net.action(a).label);
        rows.push_back(to_strings(d.row(a)));
    }
    doc["labels"] = std::move(labels);
    doc["rows"] = std::move(rows);
    return doc.dump();
}

std::string drift_text(const NetworkSpec& net, const DriftMatrix& d, std::size_t rank)
{
    std::size_t width = 0;
    for (const auto& a : net.actions()) {
        width = std::max(width, a.label.size());
    }
    std::string out = fmt::format("drift matrix: {} x {}, rank {}\n", d.rows(), d.cols(), rank);
    for (std::size_t a = 0; a < d.rows(); ++a) {
        out += fmt::format("  {:<{}}  {}\n", net.action(a).label, width, bracketed(d.row(a)));
    }
    return out;
}

std::string alpha_json(const NetworkSpec& net, const RationalVector& alpha)
{
    ordered_json doc;
    doc["family"] = family_name(net.family());
    doc["alpha"] = to_strings(alpha);
    doc["alpha_normalized"] = to_strings(normalize_direction(alpha));
    return doc.dump();
}

std::string alpha_text(const NetworkSpec& net, const RationalVector& alpha)
{
    return fmt::format("{} closed form alpha: {}\nnormalized: {}\n", family_name(net.family()), bracketed(alpha),
                       bracketed(normalize_direction(alpha)));
}

std::string return_time_json(const ReturnTimeStats& s)
{
    return FlatObject()
        .integer("trials", static_cast<long long>(s.trials))
        .integer("returned", static_cast<long long>(s.returned))
        .integer("censored", static_cast<long long>(s.censored))
        .string("censored_fraction", to_string(s.censored_fraction))
        .number("mean_uncensored", s.mean_uncensored)
        .number("mean_censored_at_cap", s.mean_censored_at_cap)
        .str();
}

std::string return_time_text(const ReturnTimeStats& s)
{
    return fmt::format("trials: {}\nreturned: {}\ncensored: {} ({})\nmean return time (uncensored): {}\n"
                       "mean return time (censored at cap): {}\n",
                       s.trials, s.returned, s.censored, to_string(s.censored_fraction),
                       format_double(s.mean_uncensored), format_double(s.mean_censored_at_cap));
}

std::string martingale_json(const MartingaleReport& r)
{
    return FlatObject()
        .integer("trials", static_cast<long long>(r.trials))
        .integer("steps", static_cast<long long>(r.steps))
        .number("mean_delta_Z", r.mean_delta_Z)
        .number("std_error", r.std_error)
        .number("max_abs_increment", r.max_abs_increment)
        .number("bound", r.bound)
        .str();
}

std::string martingale_text(const MartingaleReport& r)
{
    return fmt::format("trials: {}, steps: {}\nmean Z_n - Z_0: {} (std error {})\nmax |increment|: {} (bound {})\n",
                       r.trials, r.steps, format_double(r.mean_delta_Z), format_double(r.std_error),
                       format_double(r.max_abs_increment), format_double(r.bound));
}

std::string growth_json(const GrowthReport& r)
{
    FlatObject obj;
    obj.integer("trials", static_cast<long long>(r.trials))
        .integer("steps", static_cast<long long>(r.steps))
        .number("slope", r.slope)
        .number("fraction_growing", r.fraction_growing);
    if (r.z_slope) {
        obj.number("z_slope", *r.z_slope);
    }
    return obj.str();
}

std::string growth_text(const GrowthReport& r)
{
    std::string out = fmt::format("trials: {}, steps: {}\ntotal queue slope: {} jobs/step\nfraction growing: {}\n",
                                  r.trials, r.steps, format_double(r.slope), format_double(r.fraction_growing));
    if (r.z_slope) {
        out += fmt::format("alpha'X slope: {}\n", format_double(*r.z_slope));
    }
    return out;
}

std::string trajectory_json(const TrajectorySummary& s)
{
    std::vector<std::string> means;
    for (double q : s.mean_final_queue) {
        means.push_back(format_double(q));
    }
    return FlatObject()
        .integer("trials", static_cast<long long>(s.trials))
        .integer("steps", static_cast<long long>(s.steps))
        .number("mean_final_total", s.mean_final_total)
        .integer("max_total", s.max_total)
        .raw("mean_final_queue", "[" + join(means, ",") + "]")
        .str();
}

std::string trajectory_text(const TrajectorySummary& s)
{
    std::vector<std::string> means;
    for (double q : s.mean_final_queue) {
        means.push_back(format_double(q));
    }
    return fmt::format("trials: {}, steps: {}\nmean final total: {}\nmax total seen: {}\nmean final queues: [{}]\n",
                       s.trials, s.steps, format_double(s.mean_final_total), s.max_total, join(means, ", "));
}

} // namespace nonstab
