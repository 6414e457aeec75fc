#pragma once

#include <stdexcept>
#include <string>

#include "timing/simulator.hpp"

namespace timing {

/// Stable shortest-round-trip formatting ("%.12g") so identical runs produce
/// byte-identical files.
std::string format_double(double v);

/// Per-validator rows: validator, tag, leaderships, reward, time_share,
/// utility, utility_stderr.
std::string report_to_csv(const UtilityReport& report);

/// Key=value summary block: advantage, violation counters, run shape.
std::string report_summary_text(const UtilityReport& report);

std::string weight_distribution_to_csv(const WeightDistribution& dist);

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Writes via a temp file + rename so a failed run leaves no partial output.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace timing
