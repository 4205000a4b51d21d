#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dsub/experiment.hpp"
#include "dsub/metrics.hpp"

namespace dsub::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitDiverged = 2,
};

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_real(double value);

/// `iteration,msd_linear,msd_db[,node_1..node_N]`, one row per trace entry.
void write_trace_csv(std::ostream& out, const metrics::MsdTrace& trace);

void write_summary(std::ostream& out, const experiment::ExperimentConfig& config,
                   const experiment::ExperimentResult& result);

/// Entry point behind the `dsubspace` executable. Diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsub::cli
