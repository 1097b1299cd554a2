#pragma once

// Builds solver inputs from a parsed configuration.

#include "bll/config.hpp"
#include "bll/diagnostics.hpp"
#include "bll/nsf_solver.hpp"
#include "bll/ob_solver.hpp"

#include <string>

namespace bll {

Frame parse_frame(const std::string& name);

// Shared OB/NSF description over the [nsf] horizon, with the [ob] step.
LimitScenario limit_scenario(const ScenarioConfig& c);

// Standalone OB run over the [ob] horizon.
ObScenario ob_scenario(const ScenarioConfig& c);

// Standalone NSF run at the given eps over the [nsf] horizon.
NsfScenario nsf_scenario(const ScenarioConfig& c, double eps);

} // namespace bll
