#pragma once

#include "hbfq/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace hbfq {

/// Parses a scenario written in a TOML subset: `key = value` pairs, `[table]`
/// headers, dotted keys, numbers, strings and flat numeric arrays.
///
/// Keys: lambda, mu1, mu2 (defaults to mu1), c, m (defaults to 0),
/// profile.kind (uniform | piecewise-linear | truncated-exponential),
/// profile.a, profile.b, profile.rate, profile.knots, profile.probs,
/// service.kind (exponential | deterministic | erlang | hyperexponential),
/// service.k, service.p, service.mean1.
///
/// Throws ParseError (with the offending line) on syntax or schema problems
/// and InvalidArgument / UnstableRouting when the values violate the model.
Scenario parse_scenario(std::string_view text);

Scenario load_scenario(const std::filesystem::path& path);

/// Canonical TOML rendering; parse_scenario(format_scenario(s)) reproduces s.
std::string format_scenario(const Scenario& scenario);

}  // namespace hbfq
