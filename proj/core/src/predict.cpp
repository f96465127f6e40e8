#include "cpmfit/predict.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpmfit/errors.hpp"
#include "cpmfit/numeric.hpp"
#include "cpmfit/parallel.hpp"

namespace cpmfit {

namespace {

constexpr std::array<MetricKind, 4> kAggregated = {MetricKind::Rmse, MetricKind::Mape, MetricKind::ResidualSd,
                                                   MetricKind::Ortho};

std::size_t metric_slot(MetricKind kind) {
    for (std::size_t i = 0; i < kAggregated.size(); ++i) {
        if (kAggregated[i] == kind) return i;
    }
    return 0;
}

}  // namespace

BetaTable::BetaTable(std::vector<BetaTableEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (!(entries_[i].speed > entries_[i - 1].speed)) throw DomainError("beta table speeds must be strictly increasing");
    }
}

BetaTable BetaTable::from_fits(std::span<const LineFit> fits) {
    std::vector<BetaTableEntry> entries;
    for (const auto& lf : fits) {
        if (lf.ok()) entries.push_back({lf.speed, lf.result->beta, lf.result});
    }
    return BetaTable(std::move(entries));
}

void PredictionConfig::validate() const {
    if (degree < 1) throw DomainError("polynomial degree must be at least 1");
    if (!(enforce_cur_min >= kMinCurvature)) throw DomainError("curvature floor must be at least 1.05");
}

double PolyModel::variable(double speed) const {
    return normalized ? (speed - speed_min) / (speed_max - speed_min) : speed;
}

double PolyModel::evaluate(std::size_t component, double speed) const {
    const double x = variable(speed);
    const auto& c = coefficients[component];
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

BetaVector PolyModel::evaluate(double speed) const {
    std::array<double, 5> v{};
    for (std::size_t k = 0; k < 5; ++k) v[k] = evaluate(k, speed);
    return BetaVector::from_array(v);
}

PolyModel fit_beta_polynomials(const BetaTable& table, const PredictionConfig& cfg) {
    cfg.validate();
    const auto& entries = table.entries();
    if (entries.size() < 2) throw InsufficientDataError("beta regression needs at least two fitted speedlines");

    PolyModel model;
    model.requested_degree = cfg.degree;
    model.degree = std::min(cfg.degree, entries.size() - 1);
    model.normalized = cfg.normalize_speed;
    model.speed_min = entries.front().speed;
    model.speed_max = entries.back().speed;

    const auto n = static_cast<Eigen::Index>(entries.size());
    const auto cols = static_cast<Eigen::Index>(model.degree + 1);
    Eigen::MatrixXd vander(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = model.variable(entries[static_cast<std::size_t>(i)].speed);
        double power = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            vander(i, j) = power;
            power *= x;
        }
    }
    // Column equilibration keeps the raw-speed Vandermonde usable.
    const Eigen::VectorXd col_scale = vander.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = vander * col_scale.cwiseInverse().asDiagonal();
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);

    for (std::size_t k = 0; k < 5; ++k) {
        Eigen::VectorXd rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) rhs(i) = entries[static_cast<std::size_t>(i)].beta.to_array()[k];
        const Eigen::VectorXd sol = qr.solve(rhs).cwiseQuotient(col_scale);
        model.coefficients[k].assign(sol.data(), sol.data() + sol.size());
    }
    return model;
}

PredictedBeta predict_beta(const PolyModel& model, double speed, const PredictionConfig& cfg) {
    PredictedBeta out;
    out.raw = model.evaluate(speed);
    BetaVector b = out.raw;
    if (b.cur < cfg.enforce_cur_min) {
        b.cur = cfg.enforce_cur_min;
        out.repairs.cur_clamped = true;
    }
    if (cfg.enforce_nonneg) {
        for (double* v : {&b.m_zs, &b.pi_zs, &b.m_ch, &b.pi_ch}) {
            if (*v < 0.0) {
                *v = 0.0;
                ++out.repairs.nonneg_clamped;
            }
        }
    }
    if (!b.is_valid(std::min(cfg.enforce_cur_min, kMinCurvature))) {
        throw InvalidPrediction("predicted beta at speed " + std::to_string(speed) +
                                    " violates the surge/choke ordering",
                                out.raw);
    }
    out.beta = b;
    return out;
}

std::string_view to_string(PredictionKind kind) {
    return kind == PredictionKind::Interpolation ? "INTERPOLATION" : "EXTRAPOLATION";
}

std::string_view to_string(ReportStatus status) { return status == ReportStatus::Ok ? "OK" : "FAILED"; }

PredictionKind classify(double target_speed, std::span<const double> remaining_speeds) {
    if (remaining_speeds.empty()) throw EmptyInputError("classification needs remaining speeds");
    const auto [lo, hi] = std::minmax_element(remaining_speeds.begin(), remaining_speeds.end());
    return (target_speed >= *lo && target_speed <= *hi) ? PredictionKind::Interpolation
                                                        : PredictionKind::Extrapolation;
}

const Evaluation* PredictionReport::evaluation() const {
    const auto& ev = eval_mode == EvalMode::Pressure ? pressure : massflow;
    return ev ? &*ev : nullptr;
}

PredictionReport holdout_predict(const CompressorMap& map, std::size_t target_index, std::span<const LineFit> fits,
                                 const PredictionConfig& pred_cfg) {
    pred_cfg.validate();
    if (target_index >= map.size()) throw Error("hold-out index out of range");
    if (fits.size() != map.size()) throw LengthMismatchError("one fit per speedline expected");
    if (map.size() < 3) throw InsufficientDataError("hold-out prediction needs at least two other speedlines");

    const Speedline& target = map.speedlines()[target_index];
    PredictionReport report;
    report.index = target_index;
    report.target_speed = target.speed();
    report.eval_mode = pred_cfg.eval_mode;

    std::vector<double> remaining;
    std::vector<LineFit> rest;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (i == target_index) continue;
        remaining.push_back(map.speedlines()[i].speed());
        if (fits[i].ok()) {
            rest.push_back(fits[i]);
        } else {
            ++report.failed_fits;
        }
    }
    report.kind = classify(target.speed(), remaining);

    const auto fail = [&](std::string why) {
        report.status = ReportStatus::Failed;
        report.failure = std::move(why);
        return report;
    };

    if (rest.size() < 2) return fail("fewer than two remaining speedlines could be fitted");
    const BetaTable table = BetaTable::from_fits(rest);
    const PolyModel model = fit_beta_polynomials(table, pred_cfg);
    report.effective_degree = model.degree;
    report.degree_reduced = model.degree_reduced();

    try {
        const PredictedBeta predicted = predict_beta(model, target.speed(), pred_cfg);
        report.predicted_beta = predicted.beta;
        report.raw_beta = predicted.raw;
        report.repairs = predicted.repairs;
    } catch (const InvalidPrediction& e) {
        report.raw_beta = e.raw();
        return fail(e.what());
    }

    report.pressure = evaluate_prediction(*report.predicted_beta, target.points(), EvalMode::Pressure);
    report.massflow = evaluate_prediction(*report.predicted_beta, target.points(), EvalMode::Massflow);
    return report;
}

PredictionReport holdout_predict(const CompressorMap& map, double target_speed, const FitConfig& fit_cfg,
                                 const PredictionConfig& pred_cfg) {
    const int idx = map.find_speed(target_speed);
    if (idx < 0) throw Error("map has no speedline at speed " + std::to_string(target_speed));
    if (map.size() < 3) throw InsufficientDataError("hold-out prediction needs at least two other speedlines");

    const auto index = static_cast<std::size_t>(idx);
    const std::vector<LineFit> rest_fits = fit_map(map.without(index), fit_cfg);
    std::vector<LineFit> fits;
    fits.reserve(map.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (i == index) {
            LineFit placeholder;
            placeholder.speed = map.speedlines()[i].speed();
            placeholder.error = "held out";
            fits.push_back(std::move(placeholder));
        } else {
            fits.push_back(rest_fits[r++]);
        }
    }
    return holdout_predict(map, index, fits, pred_cfg);
}

const MetricAggregate& KindSummary::get(MetricKind kind) const { return metrics[metric_slot(kind)]; }

std::array<KindSummary, 2> summarize(std::span<const PredictionReport> reports) {
    std::array<KindSummary, 2> out;
    out[0].kind = PredictionKind::Interpolation;
    out[1].kind = PredictionKind::Extrapolation;
    for (auto& s : out) {
        for (std::size_t m = 0; m < kAggregated.size(); ++m) s.metrics[m].metric = kAggregated[m];
    }
    for (std::size_t k = 0; k < 2; ++k) {
        KindSummary& s = out[k];
        std::array<std::vector<double>, 4> values;
        for (const auto& r : reports) {
            if (r.kind != s.kind) continue;
            ++s.total;
            if (!r.ok()) {
                ++s.failed;
                continue;
            }
            ++s.ok;
            const Evaluation* ev = r.evaluation();
            for (std::size_t m = 0; m < kAggregated.size(); ++m) {
                const double v = ev->get(kAggregated[m]).value;
                if (std::isfinite(v)) values[m].push_back(v);
            }
        }
        for (std::size_t m = 0; m < kAggregated.size(); ++m) {
            auto& agg = s.metrics[m];
            agg.n = values[m].size();
            if (agg.n == 0) {
                agg.mean = agg.sd = agg.median = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            agg.mean = mean(values[m]);
            agg.sd = sample_sd(values[m]);
            agg.median = median(values[m]);
        }
    }
    return out;
}

CrossValidation loo_crossval(const CompressorMap& map, const FitConfig& fit_cfg, const PredictionConfig& pred_cfg) {
    if (map.size() < 3) throw InsufficientDataError("cross-validation needs at least three speedlines");
    pred_cfg.validate();
    CrossValidation cv;
    cv.fits = fit_map(map, fit_cfg);
    cv.reports.resize(map.size());
    parallel_for(map.size(), [&](std::size_t i) { cv.reports[i] = holdout_predict(map, i, cv.fits, pred_cfg); });
    cv.summary = summarize(cv.reports);
    return cv;
}

}  // namespace cpmfit
