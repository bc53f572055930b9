#pragma once

// Subcommands behind superosc_cli. Exit codes: 0 all checks pass, 2 a physics
// check failed, 3 configuration or missing-artifact error.

#include <string>

#include "superosc/config.hpp"

namespace superosc {

constexpr int kExitOk = 0;
constexpr int kExitPhysics = 2;
constexpr int kExitConfig = 3;

int cmd_prepare(const ScenarioConfig& config);
int cmd_run(const ScenarioConfig& config);
int cmd_analyze(const ScenarioConfig& config);
int cmd_sweep(const ScenarioConfig& config);
int cmd_report(const ScenarioConfig& config);

/// Full command line handling (argv[0] is the program name).
int run_cli(int argc, char** argv);

}  // namespace superosc
