// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Workflow layer: every tool command (ingest, stats, split, synth, train,
// crossval, evaluate, compare, generalize, lexical, predict) implemented over
// a JSON options object — the same schema the CLI flags map onto. Each
// artifact-producing command writes a run manifest next to its outputs.

#ifndef MMPHASE_PIPELINE_HPP
#define MMPHASE_PIPELINE_HPP

#include <string>
#include <vector>

namespace mmphase {

inline constexpr const char* kToolVersion = "0.1.0";

std::vector<std::string> command_names();

// Runs one command; returns a JSON result summary. Throws ConfigError for
// usage problems (exit 2 at the tool boundary) and std::runtime_error for
// runtime failures (exit 1).
std::string run_command(const std::string& command, const std::string& options_json);

}  // namespace mmphase

#endif
