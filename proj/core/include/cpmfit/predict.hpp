#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpmfit/fit.hpp"
#include "cpmfit/metrics.hpp"
#include "cpmfit/types.hpp"

namespace cpmfit {

struct BetaTableEntry {
    double speed = 0.0;
    BetaVector beta;
    std::optional<FitResult> fit;
};

// Fitted betas keyed by strictly increasing speed.
class BetaTable {
public:
    BetaTable() = default;
    explicit BetaTable(std::vector<BetaTableEntry> entries);

    // Successful fits from fit_map(), in speed order.
    static BetaTable from_fits(std::span<const LineFit> fits);

    const std::vector<BetaTableEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<BetaTableEntry> entries_;
};

struct PredictionConfig {
    std::size_t degree = 4;
    bool normalize_speed = true;
    double enforce_cur_min = 2.0;
    bool enforce_nonneg = true;
    EvalMode eval_mode = EvalMode::Pressure;

    void validate() const;
};

// One least-squares polynomial per beta component over speed (optionally
// mapped to [0, 1] using the table's speed range).
struct PolyModel {
    std::array<std::vector<double>, 5> coefficients;  // ascending powers
    std::size_t requested_degree = 0;
    std::size_t degree = 0;
    bool normalized = false;
    double speed_min = 0.0;
    double speed_max = 1.0;

    bool degree_reduced() const { return degree < requested_degree; }
    double variable(double speed) const;
    double evaluate(std::size_t component, double speed) const;
    BetaVector evaluate(double speed) const;
};

// Effective degree is min(cfg.degree, entries - 1).
// Throws InsufficientDataError for fewer than two entries.
PolyModel fit_beta_polynomials(const BetaTable& table, const PredictionConfig& cfg);

struct RepairFlags {
    bool cur_clamped = false;
    std::size_t nonneg_clamped = 0;

    bool any() const { return cur_clamped || nonneg_clamped > 0; }
};

struct PredictedBeta {
    BetaVector beta;
    BetaVector raw;
    RepairFlags repairs;
};

// Evaluates the polynomials and applies the physical constraints (curvature
// floor, non-negativity). Throws InvalidPrediction with the raw values when
// the repaired vector still violates the surge/choke ordering.
PredictedBeta predict_beta(const PolyModel& model, double speed, const PredictionConfig& cfg);

enum class PredictionKind { Interpolation, Extrapolation };
std::string_view to_string(PredictionKind kind);

// Interpolation iff min <= target <= max of the remaining speeds.
PredictionKind classify(double target_speed, std::span<const double> remaining_speeds);

enum class ReportStatus { Ok, Failed };
std::string_view to_string(ReportStatus status);

struct PredictionReport {
    std::size_t index = 0;  // position of the target in its map
    double target_speed = 0.0;
    PredictionKind kind = PredictionKind::Interpolation;
    ReportStatus status = ReportStatus::Ok;
    std::string failure;

    std::optional<BetaVector> predicted_beta;
    std::optional<BetaVector> raw_beta;
    EvalMode eval_mode = EvalMode::Pressure;
    std::optional<Evaluation> pressure;
    std::optional<Evaluation> massflow;

    RepairFlags repairs;
    std::size_t effective_degree = 0;
    bool degree_reduced = false;
    std::size_t failed_fits = 0;  // remaining lines that could not be fitted

    bool ok() const { return status == ReportStatus::Ok; }
    // Evaluation in the configured mode; null for failed reports.
    const Evaluation* evaluation() const;
};

// Holds out the speedline at `target_speed`, fits the others, regresses the
// betas over speed and scores the prediction against the held-out points.
// Fit and prediction failures end up in the report; a missing target or
// fewer than two remaining lines throw.
PredictionReport holdout_predict(const CompressorMap& map, double target_speed, const FitConfig& fit_cfg,
                                 const PredictionConfig& pred_cfg);

// Same as holdout_predict, reusing per-line fits from fit_map(map, ...).
PredictionReport holdout_predict(const CompressorMap& map, std::size_t target_index, std::span<const LineFit> fits,
                                 const PredictionConfig& pred_cfg);

struct MetricAggregate {
    MetricKind metric = MetricKind::Rmse;
    std::size_t n = 0;  // reports with a defined value
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
};

struct KindSummary {
    PredictionKind kind = PredictionKind::Interpolation;
    std::size_t total = 0;
    std::size_t ok = 0;
    std::size_t failed = 0;
    std::array<MetricAggregate, 4> metrics;  // rmse, mape, residual_sd, ortho

    const MetricAggregate& get(MetricKind kind) const;
};

struct CrossValidation {
    std::vector<PredictionReport> reports;
    std::array<KindSummary, 2> summary;  // interpolation, extrapolation
    std::vector<LineFit> fits;           // every speedline, fitted once
};

// Aggregates successful reports per kind; failed ones are only counted.
std::array<KindSummary, 2> summarize(std::span<const PredictionReport> reports);

// Leave-one-out over every speedline. Throws InsufficientDataError for maps
// with fewer than three speedlines.
CrossValidation loo_crossval(const CompressorMap& map, const FitConfig& fit_cfg, const PredictionConfig& pred_cfg);

}  // namespace cpmfit
