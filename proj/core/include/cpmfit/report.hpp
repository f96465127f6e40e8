#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpmfit/fit.hpp"
#include "cpmfit/predict.hpp"
#include "cpmfit/types.hpp"

namespace cpmfit {

enum class ReportFormat { Csv, Json };
ReportFormat parse_format(std::string_view text);

// Column order of export_report's CSV; JSON objects carry the same keys.
inline constexpr std::string_view kReportColumns =
    "index,speed,kind,rmse,rmse_sd,mape,mape_sd,ortho,ortho_sd,status,flags";

// One row per prediction report. Failed reports keep their row with empty
// metric cells.
std::string export_report(std::span<const PredictionReport> reports, ReportFormat format);

// Per-kind aggregate table (counts, mean/sd/median per metric).
std::string export_summary(std::span<const KindSummary> summary, ReportFormat format);

// Per-speedline fit results.
std::string export_fit_table(std::span<const LineFit> fits, ReportFormat format);

// speed + the five beta components for every successful fit.
std::string export_beta_table(std::span<const LineFit> fits);

// Fitted betas plus the regression polynomials sampled at `samples` speeds
// across the fitted range.
std::string export_beta_evolution(const BetaTable& table, const PolyModel& model, std::size_t samples = 100);

// Space-separated flag tokens for a report (empty when nothing happened).
std::string report_flags(const PredictionReport& report);

// Measured speedlines as solid polylines with markers, predicted curves
// (200-sample superellipses) dashed. Output is deterministic.
std::string export_curve_svg(std::span<const Speedline> measured,
                             std::span<const std::pair<double, BetaVector>> predicted,
                             std::string_view title = "");

}  // namespace cpmfit
