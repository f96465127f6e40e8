#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpmfit/optimize.hpp"
#include "cpmfit/types.hpp"

namespace cpmfit {

// Search box for one speedline, derived from the data extents: surge and
// choke may sit up to half a span beyond the measured range, curvature in
// [1.05, 20]. Throws DegenerateSpanError when either coordinate span is zero.
Bounds default_bounds(std::span<const OperatingPoint> points);

struct StageRecord {
    std::string stage;
    double objective = 0.0;  // best-so-far after the stage
};

struct FitResult {
    BetaVector beta;
    double objective = 0.0;
    MetricKind metric = MetricKind::Ortho;
    std::vector<StageRecord> stage_trace;
    bool used_fallback = false;
    // Fewer than five points for five parameters.
    bool under_determined = false;
    std::uint64_t seed = 0;
    std::size_t evaluations = 0;
};

// Global initialization, local refinement, optional fallback, then bounds
// and invariant validation. Keeps the best point seen, so the recorded stage
// objectives never increase.
//
// Throws InsufficientDataError below three points, DegenerateSpanError from
// default_bounds and FitFailure when no stage yields a valid beta.
FitResult fit_speedline(const Speedline& line, const FitConfig& cfg);

// Seed used for a speedline inside a map: derived from the run seed and the
// speed value, so it does not depend on which other lines are present.
std::uint64_t line_seed(std::uint64_t run_seed, double speed);

struct LineFit {
    double speed = 0.0;
    std::optional<FitResult> result;
    std::string error;  // empty on success

    bool ok() const { return result.has_value(); }
};

// Fits every speedline (concurrently where hardware allows) with per-line
// seeds from line_seed(). Failures are captured per line, never thrown.
std::vector<LineFit> fit_map(const CompressorMap& map, const FitConfig& cfg);

}  // namespace cpmfit
