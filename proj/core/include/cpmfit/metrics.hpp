#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cpmfit/types.hpp"

namespace cpmfit {

enum class MetricKind { Rmse, Mape, ResidualSd, Ortho };

// Which coordinate is predicted from which during evaluation.
enum class EvalMode { Pressure, Massflow };

std::string_view to_string(MetricKind kind);
std::string_view to_string(EvalMode mode);
MetricKind parse_metric(std::string_view text);
EvalMode parse_mode(std::string_view text);

// Points with |truth| at or below this are excluded from MAPE.
inline constexpr double kMapeEpsilon = 1e-12;

// One metric evaluated over a set of points.
//   value  - the metric itself (RMSE, MAPE %, residual SD, ortho sum); NaN if undefined
//   mean/sd - statistics of the per-point contributions over valid entries
struct ErrorSummary {
    MetricKind kind = MetricKind::Rmse;
    double value = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n_valid = 0;
    std::size_t n_skipped = 0;
    bool has_nonfinite = false;

    bool defined() const;
};

struct MapeResult {
    double value = 0.0;
    std::size_t n_used = 0;
    std::size_t n_skipped = 0;
};

double rmse(std::span<const double> truth, std::span<const double> pred);

// Mean absolute percentage error over the points whose truth exceeds
// kMapeEpsilon in magnitude. Throws UndefinedMapeError if none does.
MapeResult mape(std::span<const double> truth, std::span<const double> pred);

// Sample standard deviation of residuals; needs at least two entries.
double residual_sd(std::span<const double> residuals);

struct NearestPoint {
    OperatingPoint point;
    double distance_squared = 0.0;
};

// Projects points onto one superellipse. Precomputes a 257-sample grid over
// the curve parameter once, so repeated projections against the same beta
// (as in ortho_sum) share that work.
class CurveProjector {
public:
    static constexpr std::size_t kGridSize = 257;

    explicit CurveProjector(const BetaVector& beta);

    // Curve point for parameter t in [0, pi/2]; t = 0 is choke, t = pi/2 is surge.
    OperatingPoint at(double t) const;

    NearestPoint nearest(const OperatingPoint& p) const;

private:
    BetaVector beta_;
    double knee_;  // 2^(-1/cur), normalized coordinate where u == v
    std::vector<OperatingPoint> grid_;
};

// Closest curve point to `p` (coarse grid, then golden-section refinement).
NearestPoint nearest_point_on_curve(const BetaVector& beta, const OperatingPoint& p);

// Sum (not mean) of squared orthogonal distances.
double ortho_sum(const BetaVector& beta, std::span<const OperatingPoint> points);

struct Evaluation {
    EvalMode mode = EvalMode::Pressure;
    ErrorSummary rmse;
    ErrorSummary mape;
    ErrorSummary residual_sd;
    ErrorSummary ortho;
    double max_abs_error = 0.0;
    std::size_t n_points = 0;
    std::size_t n_out_of_domain = 0;
    std::vector<bool> out_of_domain;

    const ErrorSummary& get(MetricKind kind) const;
};

// Compares a beta curve with measured points. Abscissae outside the
// surge-choke interval are clamped to the nearest endpoint and flagged.
// Non-finite intermediates are skipped and reported, never thrown.
// `include_ortho = false` skips the projection work (the ortho summary is then
// left undefined); used by objectives that only need the pointwise metrics.
Evaluation evaluate_prediction(const BetaVector& beta, std::span<const OperatingPoint> measured, EvalMode mode,
                               bool include_ortho = true);

}  // namespace cpmfit
