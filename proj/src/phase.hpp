// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#ifndef MMPHASE_PHASE_HPP
#define MMPHASE_PHASE_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace mmphase {

// Canonical class order. Every confusion matrix, report and probability
// vector uses this index order.
enum class PhaseLabel : int {
    Arrival = 0,
    Asylum = 1,
    Rehabilitation = 2,
    Integration = 3,
    Infographics = 4,
};

inline constexpr int kNumClasses = 5;

inline constexpr std::array<PhaseLabel, kNumClasses> kAllPhases = {
    PhaseLabel::Arrival,    PhaseLabel::Asylum,       PhaseLabel::Rehabilitation,
    PhaseLabel::Integration, PhaseLabel::Infographics,
};

// Label strings as they appear in corpus manifests.
std::string_view phase_name(PhaseLabel label);
// Short machine-friendly form used in reports and CSV columns.
std::string_view phase_slug(PhaseLabel label);

// Accepts the full manifest string or the slug; nullopt for anything else.
std::optional<PhaseLabel> parse_phase(std::string_view s);

inline int phase_index(PhaseLabel label) { return static_cast<int>(label); }
PhaseLabel phase_from_index(int index);  // throws on out-of-range

}  // namespace mmphase

#endif
