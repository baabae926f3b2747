#pragma once

#include <string>

#include "mtmv/parameter_solver.hpp"
#include "mtmv/simulator.hpp"
#include "mtmv/strategy.hpp"

namespace mtmv {

/// JSON snapshots of the result types. All serializers emit 2-space pretty
/// JSON with a trailing newline; doubles round-trip exactly.
std::string to_json(const FeasibilityReport& report);
std::string to_json(const MultiplierSet& mult);
std::string to_json(const RiccatiChain& chain);
std::string to_json(const MultiplierSolution& solution, const ProblemSpec& spec);
std::string to_json(const PolicyReport& report);
std::string to_json(const SimulationReport& report);
std::string to_json(const ComparisonReport& report);
std::string to_json(const SweepTable& table);

}  // namespace mtmv
