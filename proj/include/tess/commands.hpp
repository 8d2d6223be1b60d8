#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tess/io.hpp"
#include "tess/report.hpp"

namespace tess {

inline constexpr std::string_view kCommands[] = {"scan",  "permtest",     "simulate", "power",
                                                 "holdout", "oracle-check", "theory"};

struct CommandOutput {
  RunReport report;
  double wall_seconds = 0.0;
};

/// Runs one subcommand. `data` replaces reading opts.input when given.
/// simulate writes opts.output; power writes opts.jsonl when non-empty.
[[nodiscard]] CommandOutput run_command(std::string_view command, const RunOptions& opts,
                                        const std::optional<LoadedData>& data = {});

/// One JSON object per replicate, newline separated.
[[nodiscard]] std::string power_jsonl(const PowerReport& report);

}  // namespace tess
