#pragma once

#include "nonstab/netmodel.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nonstab {

/// A malformed network spec document. what() names the line/column of a
/// syntax error or the JSON path of the offending field.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a network spec document:
///   {"family":"pushpull","lambda":[r,r],"mu":[r,r]}
///   {"family":"ring","lambda":[...],"mu":[...]}
///   {"family":"reentrant","streams":[[{"server":1,"rate":r},...],...]}
///   {"family":"custom","M":m,"actions":[{"label":s,"outcomes":[{"disp":[...],"rate":r}]}]}
/// Rates are strings "num" or "num/den". Unknown fields are rejected.
NetworkSpec parse_network_spec(std::string_view text);

NetworkSpec load_network_spec(const std::filesystem::path& path);

/// The network written as a custom-family document (pretty-printed JSON).
std::string export_custom_spec(const NetworkSpec& net);

} // namespace nonstab
