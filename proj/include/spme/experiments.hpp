#pragma once

// Suite dispatch for the CLI: each suite runs its checks against the
// configured model and returns report rows plus a pass flag.

#include "spme/config.hpp"
#include "spme/report.hpp"

#include <string>
#include <vector>

namespace spme {

struct SuiteResult {
    std::string name;
    std::vector<ReportRow> rows;
    bool pass = true;
    double wall_ms = 0;
};

struct ExperimentResult {
    std::vector<SuiteResult> suites;
    int exit_status = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, ExecPolicy policy, bool quiet);

// One CSV per suite plus summary.json under cfg.out_dir.
void write_reports(const ExperimentConfig& cfg, const ExperimentResult& result);

} // namespace spme
