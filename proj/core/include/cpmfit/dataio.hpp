#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpmfit/types.hpp"

namespace cpmfit {

// One CSV row in raw units.
struct RawRecord {
    double speed = 0.0;
    double m_dot = 0.0;
    double pi = 0.0;
};

inline constexpr std::string_view kCsvHeader = "speed,m_dot,pi";

// Parses the `speed,m_dot,pi` format. Blank lines and lines starting with
// '#' are skipped. Throws MissingHeaderError / ParseError with 1-based line
// numbers.
std::vector<RawRecord> parse_map_csv(std::string_view text);

// Groups records into speedlines. Speeds within `rel_tol` (relative) of a
// group's first speed join that group; the group is keyed by its mean speed.
// Throws EmptyInputError and DuplicateAbscissaError.
CompressorMap group_speedlines(std::span<const RawRecord> records, double rel_tol = 1e-6, std::string id = "",
                               std::string type_label = "");

// Min-max extents of a map, used to normalize and to undo it.
struct ScaleRecord {
    double m_min = 0.0;
    double m_max = 1.0;
    double pi_min = 0.0;
    double pi_max = 1.0;

    OperatingPoint normalize(const OperatingPoint& p) const;
    OperatingPoint denormalize(const OperatingPoint& p) const;
};

// Maps every point into [0, 1]² using the extents of the whole map.
// Throws DegenerateSpanError if either axis has zero range.
std::pair<CompressorMap, ScaleRecord> normalize_map(const CompressorMap& map);

CompressorMap denormalize_map(const CompressorMap& map, const ScaleRecord& scale);

// Inverse of group_speedlines: one record per point, speed then mass flow.
std::vector<RawRecord> flatten(const CompressorMap& map);

std::string write_map_csv(const CompressorMap& map);

// Shortest round-trip decimal form; empty for non-finite values.
std::string format_number(double v);

}  // namespace cpmfit
