#pragma once

#include "gaussifs/table.hpp"

namespace gaussifs {

// Exit codes: 0 all good, 1 assertion/invariant failure, 2 usage error,
// 3 numerical nonconvergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNonConvergence = 3;

ResultTable cmd_dim(const RunConfig& cfg);
ResultTable cmd_measure(const RunConfig& cfg);
ResultTable cmd_operator(const RunConfig& cfg);
ResultTable cmd_sweep(const RunConfig& cfg);

/// Runs the invariant suites (optionally a single one via cfg.suite) and
/// prints one line per suite; returns the count of failed assertions.
int cmd_verify(const RunConfig& cfg, std::string& report);

int cli_main(int argc, const char* const* argv);

}  // namespace gaussifs
