#pragma once

#include "mavnav/mission.hpp"

#include <stdexcept>
#include <string>

namespace mavnav {

/// Malformed scenario text; the message names the offending "section.key".
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates a JSON scenario. Missing keys keep their defaults;
/// unknown keys are rejected.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Writes every field, so parse_scenario(dump_scenario(s)) == s.
std::string dump_scenario(const Scenario& scenario);

const char* to_string(LatticeMode mode);
LatticeMode lattice_mode_from(const std::string& name);

}  // namespace mavnav
