#include "nonstab/spec_io.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace nonstab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message)
{
    throw SpecError("field '" + path + "': " + message);
}

void expect_fields(const json& obj, const std::string& path, std::initializer_list<const char*> allowed,
                   std::initializer_list<const char*> required)
{
    if (!obj.is_object()) {
        fail(path, "expected an object");
    }
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            fail(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
    for (const char* key : required) {
        if (!obj.contains(key)) {
            fail(path.empty() ? std::string(key) : path + "." + key, "missing required field");
        }
    }
}

Rate read_rate(const json& v, const std::string& path)
{
    if (!v.is_string()) {
        fail(path, "rate must be a string \"num\" or \"num/den\"");
    }
    try {
        return Rate::parse(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

std::vector<Rate> read_rates(const json& v, const std::string& path)
{
    if (!v.is_array()) {
        fail(path, "expected an array of rates");
    }
    std::vector<Rate> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(read_rate(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

NetworkSpec read_push_pull(const json& doc)
{
    expect_fields(doc, "", {"family", "lambda", "mu"}, {"lambda", "mu"});
    const auto lambda = read_rates(doc["lambda"], "lambda");
    const auto mu = read_rates(doc["mu"], "mu");
    if (lambda.size() != 2) {
        fail("lambda", "push-pull needs exactly 2 rates");
    }
    if (mu.size() != 2) {
        fail("mu", "push-pull needs exactly 2 rates");
    }
    return build_push_pull(lambda[0], lambda[1], mu[0], mu[1]);
}

NetworkSpec read_ring(const json& doc)
{
    expect_fields(doc, "", {"family", "lambda", "mu"}, {"lambda", "mu"});
    const auto lambda = read_rates(doc["lambda"], "lambda");
    const auto mu = read_rates(doc["mu"], "mu");
    if (lambda.size() < 2) {
        fail("lambda", "ring needs at least 2 rates");
    }
    if (mu.size() != lambda.size()) {
        fail("mu", "ring needs as many pull rates as push rates");
    }
    return build_ring(lambda, mu);
}

NetworkSpec read_reentrant(const json& doc)
{
    expect_fields(doc, "", {"family", "streams"}, {"streams"});
    const json& streams = doc["streams"];
    if (!streams.is_array() || streams.empty()) {
        fail("streams", "expected a nonempty array of streams");
    }
    std::vector<std::vector<OperationSpec>> out;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const std::string spath = "streams[" + std::to_string(i) + "]";
        if (!streams[i].is_array() || streams[i].size() < 2) {
            fail(spath, "a stream lists operations j = 0..n_i with n_i >= 1");
        }
        std::vector<OperationSpec> ops;
        for (std::size_t j = 0; j < streams[i].size(); ++j) {
            const std::string opath = spath + "[" + std::to_string(j) + "]";
            const json& op = streams[i][j];
            expect_fields(op, opath, {"server", "rate"}, {"server", "rate"});
            if (!op["server"].is_number_integer() || (op["server"] != 1 && op["server"] != 2)) {
                fail(opath + ".server", "server must be 1 or 2");
            }
            ops.push_back(OperationSpec{op["server"].get<int>(), read_rate(op["rate"], opath + ".rate")});
        }
        out.push_back(std::move(ops));
    }
    return build_reentrant(std::move(out));
}

NetworkSpec read_custom(const json& doc)
{
    expect_fields(doc, "", {"family", "M", "actions"}, {"M", "actions"});
    if (!doc["M"].is_number_unsigned() || doc["M"].get<std::size_t>() == 0) {
        fail("M", "expected a positive integer");
    }
    const auto m = doc["M"].get<std::size_t>();
    const json& actions = doc["actions"];
    if (!actions.is_array() || actions.empty()) {
        fail("actions", "expected a nonempty array");
    }
    std::vector<CustomAction> out;
    for (std::size_t a = 0; a < actions.size(); ++a) {
        const std::string apath = "actions[" + std::to_string(a) + "]";
        const json& act = actions[a];
        expect_fields(act, apath, {"label", "outcomes"}, {"outcomes"});
        CustomAction ca;
        if (act.contains("label")) {
            if (!act["label"].is_string()) {
                fail(apath + ".label", "expected a string");
            }
            ca.label = act["label"].get<std::string>();
        } else {
            ca.label = "a" + std::to_string(a);
        }
        const json& outcomes = act["outcomes"];
        if (!outcomes.is_array() || outcomes.empty()) {
            fail(apath + ".outcomes", "expected a nonempty array");
        }
        for (std::size_t o = 0; o < outcomes.size(); ++o) {
            const std::string opath = apath + ".outcomes[" + std::to_string(o) + "]";
            expect_fields(outcomes[o], opath, {"disp", "rate"}, {"disp", "rate"});
            const json& disp = outcomes[o]["disp"];
            if (!disp.is_array() || disp.size() != m) {
                fail(opath + ".disp", "expected an array of " + std::to_string(m) + " integers");
            }
            std::vector<int> entries;
            for (const auto& e : disp) {
                if (!e.is_number_integer()) {
                    fail(opath + ".disp", "entries must be integers");
                }
                entries.push_back(e.get<int>());
            }
            try {
                ca.outcomes.push_back({Displacement(std::move(entries)), read_rate(outcomes[o]["rate"], opath + ".rate")});
            } catch (const std::invalid_argument& e) {
                fail(opath + ".disp", e.what());
            }
        }
        out.push_back(std::move(ca));
    }
    return build_custom(m, std::move(out));
}

std::string position_of(std::string_view text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

} // namespace

NetworkSpec parse_network_spec(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // byte is one past the offending character
        throw SpecError("syntax error at " + position_of(text, e.byte ? e.byte - 1 : 0) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw SpecError("spec must be a JSON object");
    }
    if (!doc.contains("family") || !doc["family"].is_string()) {
        fail("family", "missing or not a string");
    }
    const auto family = doc["family"].get<std::string>();
    try {
        if (family == "pushpull") {
            return read_push_pull(doc);
        }
        if (family == "ring") {
            return read_ring(doc);
        }
        if (family == "reentrant") {
            return read_reentrant(doc);
        }
        if (family == "custom") {
            return read_custom(doc);
        }
    } catch (const SpecError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("invalid network: ") + e.what());
    }
    fail("family", "expected one of pushpull, ring, reentrant, custom; got '" + family + "'");
}

NetworkSpec load_network_spec(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SpecError("cannot open spec file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_network_spec(buf.str());
    } catch (const SpecError& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
}

std::string export_custom_spec(const NetworkSpec& net)
{
    nlohmann::ordered_json doc;
    doc["family"] = "custom";
    doc["M"] = net.queue_count();
    auto actions = nlohmann::ordered_json::array();
    for (const auto& a : net.actions()) {
        nlohmann::ordered_json act;
        act["label"] = a.label;
        auto outcomes = nlohmann::ordered_json::array();
        for (const auto& o : a.outcomes) {
            nlohmann::ordered_json out;
            out["disp"] = std::vector<int>(o.displacement.entries().begin(), o.displacement.entries().end());
            out["rate"] = to_string(o.rate.value());
            outcomes.push_back(std::move(out));
        }
        act["outcomes"] = std::move(outcomes);
        actions.push_back(std::move(act));
    }
    doc["actions"] = std::move(actions);
    return doc.dump(2) + "\n";
}

} // namespace nonstab
