#pragma once

#include <string>

#include "oscillopf/case.hpp"

namespace oscillopf {

/// Parse a MATPOWER v2 case body (bus/branch/gen matrices). Tap and phase
/// shift columns are ignored; gencost rows are ignored and generator costs
/// default to the uniform (c_p, c_q) = (1, 0.1).
RawCase parse_matpower(const std::string& text);

/// Parse the dynamics sidecar for `c`. Lines are
///   inertia <bus> <M>
///   damping <bus> <D>
///   xint <bus> <x>
///   gamma <value>
/// with `#` comments. Missing synchronous-bus inertias (and internal
/// reactances) default to 0.10 x the mean over generator buses. gamma falls
/// back to mean(D)/mean(M) when absent; missing dampings are set to
/// gamma * M_n. With `strict_assumption`, explicit dampings must satisfy
/// D_n = gamma * M_n.
DynamicParams load_dynamics(const std::string& text, const RawCase& c,
                            bool strict_assumption = false);

/// Canonical JSON dump of a RawCase and its inverse.
std::string case_to_json(const RawCase& c);
RawCase case_from_json(const std::string& json_text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace oscillopf
