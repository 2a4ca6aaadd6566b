#pragma once

#include <iosfwd>
#include <string>

#include "coop/cli/config.hpp"
#include "coop/error.hpp"

namespace coop::cli {

/// 0 success, 2 config or domain, 3 assumption violation, 4 numerical
/// failure, 5 I/O, 1 anything else.
int exit_code_for(ErrorKind kind);

/// One-line JSON error record.
std::string error_record(ErrorKind kind, std::string_view message);

/// Result payload for the command, without metadata. Deterministic for a
/// fixed config.
std::string render_payload(const ExperimentConfig& config);

/// Runs the command and writes payload plus metadata to config.output.path
/// (atomically) or to `fallback` when the path is empty. Returns the exit
/// status; errors are reported on `err` as an error record.
int run_experiment(const ExperimentConfig& config, std::ostream& fallback, std::ostream& err);

/// Payload part of a written result: drops "# " metadata lines of CSV
/// output or the "metadata" member of JSON output.
std::string strip_metadata(const std::string& text);

}  // namespace coop::cli
