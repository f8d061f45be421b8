#pragma once
// Scenario registry: named experiment setups with complete default configs,
// plus the builders that turn a validated config into solver run configs.

#include <string>
#include <vector>

#include "vbl/config.hpp"
#include "vbl/scalar_solver.hpp"
#include "vbl/system_solver.hpp"

namespace vbl {

enum class ScenarioType { scalar, system, recursion };

struct ScenarioInfo {
    std::string name;
    std::string description;
    std::string hook;  // which bound or inequality the scenario exercises
    ScenarioType type = ScenarioType::scalar;
    std::string default_config;  // complete INI text, validates as-is
};

const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo* find_scenario(const std::string& name);
std::string list_scenarios_text();

ScalarRunConfig build_scalar_run(const ExperimentConfig& c);
SystemRunConfig build_system_run(const ExperimentConfig& c);

// Scalar trajectory -> analyzer trajectory with u = (theta, theta, theta)
// and nu = mu (the embedding that reduces the scalar equation to the system
// with lambda = 0 carries viscosity 2*(mu/2) = mu).
Trajectory make_scalar_trajectory(const ScalarRunResult& run, const ScalarField& mu);
Trajectory make_system_trajectory(const SystemRunResult& run, const ScalarField& mu,
                                  const ScalarField& lambda, double kappa);

}  // namespace vbl
