#pragma once
// Experiment orchestration: runs a validated config end to end (solver ->
// analyzer -> CSVs + summary + plot script), the density-floor uniformity
// sweep, and the recursion demos. This is the only module that touches the
// filesystem.
//
// Exit codes: 0 all checks pass, 2 config error, 3 numerical failure,
// 4 check failure.

#include <map>
#include <string>
#include <vector>

#include "vbl/config.hpp"

namespace vbl {

struct CheckLine {
    bool pass = false;
    std::string name;
    std::string detail;
    std::string inequality;  // the bound the line certifies, spelled out
};

struct RunOutcome {
    int exit_code = 0;
    std::string out_dir;
    std::vector<CheckLine> checks;
    std::map<std::string, double> metrics;  // for tests and the sweep
    std::string error;                      // set on numerical failure
};

// Output directory resolution: VBL_OUTPUT_DIR env var wins, then the
// override, then config.output_dir.
std::string resolve_output_dir(const ExperimentConfig& c, const std::string& override_dir);

RunOutcome run_experiment(const ExperimentConfig& c, const std::string& override_dir = "");

// Density-floor uniformity sweep; members run concurrently, one directory
// each, then the spread statistic max/min of sup_{t>=t0}|theta| is written.
RunOutcome run_sweep(const ExperimentConfig& c, const std::vector<double>& floors,
                     const std::string& override_dir = "");

}  // namespace vbl
