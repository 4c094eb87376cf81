// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "phase.hpp"

#include <stdexcept>

namespace mmphase {

namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "Arrival of Refugees",
    "Temporal stay at Asylums",
    "Rehabilitation of Refugees",
    "Integration of Refugees",
    "Infographics",
};

constexpr std::array<std::string_view, kNumClasses> kSlugs = {
    "arrival", "asylum", "rehabilitation", "integration", "infographics",
};

}  // namespace

std::string_view phase_name(PhaseLabel label) { return kNames[static_cast<int>(label)]; }

std::string_view phase_slug(PhaseLabel label) { return kSlugs[static_cast<int>(label)]; }

std::optional<PhaseLabel> parse_phase(std::string_view s) {
    for (int i = 0; i < kNumClasses; ++i) {
        if (s == kNames[i] || s == kSlugs[i]) {
            return static_cast<PhaseLabel>(i);
        }
    }
    return std::nullopt;
}

PhaseLabel phase_from_index(int index) {
    if (index < 0 || index >= kNumClasses) {
        throw std::runtime_error("phase index out of range: " + std::to_string(index));
    }
    return static_cast<PhaseLabel>(index);
}

}  // namespace mmphase
