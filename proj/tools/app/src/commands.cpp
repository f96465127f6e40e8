#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpmfit/app/app.hpp"
#include "cpmfit/app/artifacts.hpp"
#include "cpmfit/conic.hpp"
#include "cpmfit/errors.hpp"
#include "cpmfit/fit.hpp"
#include "cpmfit/numeric.hpp"
#include "cpmfit/parallel.hpp"
#include "cpmfit/predict.hpp"
#include "cpmfit/report.hpp"
#include "cpmfit/superellipse.hpp"

namespace cpmfit::app::detail {

namespace {

using nlohmann::ordered_json;

constexpr std::size_t kCurveSamples = 200;

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json beta_json(const BetaVector& b) {
    ordered_json j = ordered_json::object();
    const auto values = b.to_array();
    for (std::size_t k = 0; k < values.size(); ++k) j[std::string(kBetaFieldNames[k])] = number(values[k]);
    return j;
}

std::string scale_json(const ScaleRecord& s) {
    ordered_json j;
    j["m_min"] = s.m_min;
    j["m_max"] = s.m_max;
    j["pi_min"] = s.pi_min;
    j["pi_max"] = s.pi_max;
    return j.dump(2) + "\n";
}

std::string curve_csv(const BetaVector& beta) {
    std::string text = "m_dot,pi\n";
    for (const auto& p : sample_curve(beta, kCurveSamples)) {
        text += format_number(p.m_dot) + "," + format_number(p.pi) + "\n";
    }
    return text;
}

FitConfig seeded(const RunConfig& cfg) {
    FitConfig fit = cfg.fit;
    fit.seed = cfg.resolved_seed();
    return fit;
}

void add_scale(ArtifactSet& artifacts, const LoadedMap& loaded) {
    if (loaded.scale) artifacts.add("scale.json", scale_json(*loaded.scale));
}

void announce(std::ostream& out, const std::vector<std::filesystem::path>& written) {
    for (const auto& path : written) out << "wrote " << path.string() << "\n";
}

const Speedline& line_at(const CompressorMap& map, double speed) {
    const int idx = map.find_speed(speed);
    return map.speedlines().at(static_cast<std::size_t>(idx));
}

}  // namespace

LoadedMap load_map(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("no input file given");
    const std::string text = read_text_file(cfg.input);
    try {
        const auto records = parse_map_csv(text);
        CompressorMap map = group_speedlines(records, cfg.speed_tolerance, cfg.input.stem().string());
        if (!cfg.normalize) return {std::move(map), std::nullopt};
        auto [normalized, scale] = normalize_map(map);
        return {std::move(normalized), scale};
    } catch (const ParseError& e) {
        throw ParseError(e.line(), cfg.input.string() + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(cfg.input.string() + ": " + e.what());
    }
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const LoadedMap loaded = load_map(cfg);
    const auto fits = fit_map(loaded.map, seeded(cfg));

    std::vector<std::pair<double, BetaVector>> curves;
    std::size_t n_ok = 0;
    for (const auto& f : fits) {
        if (f.ok()) {
            ++n_ok;
            curves.emplace_back(f.speed, f.result->beta);
        } else {
            err << "speedline " << format_number(f.speed) << ": " << f.error << "\n";
        }
    }

    ArtifactSet artifacts;
    artifacts.add("fit_results.csv", export_fit_table(fits, ReportFormat::Csv));
    artifacts.add("fit_results.json", export_fit_table(fits, ReportFormat::Json));
    artifacts.add("beta_table.csv", export_beta_table(fits));
    artifacts.add("fitted_curves.svg", export_curve_svg(loaded.map.speedlines(), curves, "fitted speedlines"));
    add_scale(artifacts, loaded);
    announce(out, artifacts.commit(cfg.out_dir));

    out << "fitted " << n_ok << "/" << fits.size() << " speedlines\n";
    if (n_ok == fits.size()) return kSuccess;
    return n_ok == 0 ? kHardError : kPartial;
}

int cmd_crossval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const LoadedMap loaded = load_map(cfg);
    if (loaded.map.size() < 3) {
        err << "crossval needs at least 3 speedlines, input has " << loaded.map.size() << "\n";
        return kHardError;
    }
    const CrossValidation cv = loo_crossval(loaded.map, seeded(cfg), cfg.predict);

    bool degraded = false;
    std::vector<std::pair<double, BetaVector>> interpolated;
    std::vector<std::pair<double, BetaVector>> extrapolated;
    for (const auto& r : cv.reports) {
        if (!r.ok()) {
            degraded = true;
            err << "prediction at " << format_number(r.target_speed) << " failed: " << r.failure << "\n";
            continue;
        }
        auto& bucket = r.kind == PredictionKind::Interpolation ? interpolated : extrapolated;
        bucket.emplace_back(r.target_speed, *r.predicted_beta);
    }
    std::vector<Speedline> interp_lines;
    std::vector<Speedline> extrap_lines;
    for (const auto& r : cv.reports) {
        auto& bucket = r.kind == PredictionKind::Interpolation ? interp_lines : extrap_lines;
        bucket.push_back(line_at(loaded.map, r.target_speed));
    }

    ArtifactSet artifacts;
    artifacts.add("loo_report.csv", export_report(cv.reports, ReportFormat::Csv));
    artifacts.add("loo_report.json", export_report(cv.reports, ReportFormat::Json));
    artifacts.add("summary.csv", export_summary(cv.summary, ReportFormat::Csv));
    artifacts.add("summary.json", export_summary(cv.summary, ReportFormat::Json));
    artifacts.add("beta_table.csv", export_beta_table(cv.fits));
    try {
        const BetaTable table = BetaTable::from_fits(cv.fits);
        const PolyModel model = fit_beta_polynomials(table, cfg.predict);
        artifacts.add("beta_evolution.csv", export_beta_evolution(table, model));
    } catch (const Error& e) {
        degraded = true;
        err << "beta evolution unavailable: " << e.what() << "\n";
    }
    artifacts.add("loo_interpolation.svg", export_curve_svg(interp_lines, interpolated, "interpolation"));
    artifacts.add("loo_extrapolation.svg", export_curve_svg(extrap_lines, extrapolated, "extrapolation"));
    add_scale(artifacts, loaded);
    announce(out, artifacts.commit(cfg.out_dir));

    for (const auto& s : cv.summary) {
        out << to_string(s.kind) << ": " << s.ok << "/" << s.total << " ok";
        if (s.ok > 0) out << ", mean rmse " << format_number(s.get(MetricKind::Rmse).mean);
        out << "\n";
    }
    return degraded ? kPartial : kSuccess;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.target) throw ConfigError("predict needs --target <speed>");
    const double target = *cfg.target;
    const LoadedMap loaded = load_map(cfg);
    const FitConfig fit = seeded(cfg);
    ArtifactSet artifacts;

    if (loaded.map.find_speed(target) >= 0) {
        const PredictionReport report = holdout_predict(loaded.map, target, fit, cfg.predict);
        const std::array<PredictionReport, 1> one{report};
        artifacts.add("prediction.csv", export_report(one, ReportFormat::Csv));
        artifacts.add("prediction.json", export_report(one, ReportFormat::Json));
        std::vector<std::pair<double, BetaVector>> curves;
        if (report.predicted_beta) {
            artifacts.add("predicted_curve.csv", curve_csv(*report.predicted_beta));
            curves.emplace_back(target, *report.predicted_beta);
        }
        const std::array<Speedline, 1> measured{line_at(loaded.map, target)};
        artifacts.add("prediction.svg", export_curve_svg(measured, curves, "hold-out prediction"));
        add_scale(artifacts, loaded);
        announce(out, artifacts.commit(cfg.out_dir));

        out << to_string(report.kind) << " at " << format_number(target) << ": " << to_string(report.status);
        if (const Evaluation* ev = report.evaluation()) {
            out << ", rmse " << format_number(ev->rmse.value) << ", ortho " << format_number(ev->ortho.value);
        }
        out << "\n";
        if (!report.ok()) {
            err << "prediction failed: " << report.failure << "\n";
            return kPartial;
        }
        return kSuccess;
    }

    // Pure prediction: no measured line at the target speed.
    const auto fits = fit_map(loaded.map, fit);
    const BetaTable table = BetaTable::from_fits(fits);
    const PolyModel model = fit_beta_polynomials(table, cfg.predict);
    std::vector<double> speeds;
    for (const auto& e : table.entries()) speeds.push_back(e.speed);
    const PredictionKind kind = classify(target, speeds);
    const std::size_t failed_fits = fits.size() - table.size();

    std::optional<PredictedBeta> predicted;
    BetaVector raw;
    std::string failure;
    try {
        predicted = predict_beta(model, target, cfg.predict);
        raw = predicted->raw;
    } catch (const InvalidPrediction& e) {
        raw = e.raw();
        failure = e.what();
    }

    std::string flags = "no_ground_truth";
    if (predicted && predicted->repairs.cur_clamped) flags += " cur_clamped";
    if (predicted && predicted->repairs.nonneg_clamped > 0) {
        flags += " nonneg_clamped=" + std::to_string(predicted->repairs.nonneg_clamped);
    }
    if (model.degree_reduced()) flags += " degree_reduced=" + std::to_string(model.degree);
    if (failed_fits > 0) flags += " failed_fits=" + std::to_string(failed_fits);
    const std::string status(to_string(predicted ? ReportStatus::Ok : ReportStatus::Failed));

    ordered_json j;
    j["target_speed"] = target;
    j["kind"] = std::string(to_string(kind));
    j["status"] = status;
    j["failure"] = failure;
    j["no_ground_truth"] = true;
    j["effective_degree"] = model.degree;
    j["flags"] = flags;
    j["predicted_beta"] = predicted ? beta_json(predicted->beta) : ordered_json(nullptr);
    j["raw_beta"] = beta_json(raw);
    artifacts.add("prediction.json", j.dump(2) + "\n");

    std::string csv = "target_speed,kind,status,m_zs,pi_zs,m_ch,pi_ch,cur,flags\n";
    csv += format_number(target) + "," + std::string(to_string(kind)) + "," + status;
    const auto values = (predicted ? predicted->beta : raw).to_array();
    for (double v : values) csv += "," + format_number(v);
    csv += "," + flags + "\n";
    artifacts.add("prediction.csv", csv);

    std::vector<std::pair<double, BetaVector>> curves;
    if (predicted) {
        artifacts.add("predicted_curve.csv", curve_csv(predicted->beta));
        curves.emplace_back(target, predicted->beta);
    }
    artifacts.add("prediction.svg", export_curve_svg(loaded.map.speedlines(), curves, "prediction"));
    add_scale(artifacts, loaded);
    announce(out, artifacts.commit(cfg.out_dir));

    out << to_string(kind) << " at " << format_number(target) << ": " << status << " (no ground truth)\n";
    if (!predicted) {
        err << "prediction failed: " << failure << "\n";
        return kPartial;
    }
    return kSuccess;
}

namespace {

struct BenchRun {
    std::string strategy;
    double speed = 0.0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double max_error = std::numeric_limits<double>::quiet_NaN();
    double ortho = std::numeric_limits<double>::quiet_NaN();
    std::size_t evaluations = 0;
    bool fallback = false;
};

BenchRun bench_superellipse(const Speedline& line, const FitConfig& base, InitStrategy strategy, std::size_t repeat,
                            std::uint64_t run_seed) {
    BenchRun run;
    run.strategy = std::string(to_string(strategy));
    run.speed = line.speed();
    run.repeat = repeat;
    run.seed = line_seed(mix_seed(run_seed, repeat), line.speed());
    FitConfig cfg = base;
    cfg.init_strategy = strategy;
    cfg.seed = run.seed;
    try {
        const FitResult fit = fit_speedline(line, cfg);
        const Evaluation ev = evaluate_prediction(fit.beta, line.points(), base.mode);
        run.ok = true;
        run.objective = fit.objective;
        run.rmse = ev.rmse.value;
        run.max_error = ev.max_abs_error;
        run.ortho = ev.ortho.value;
        run.evaluations = fit.evaluations;
        run.fallback = fit.used_fallback;
    } catch (const Error& e) {
        run.error = e.what();
    }
    return run;
}

// Direct ellipse fit scored by orthogonal distance; pointwise errors are not
// defined for a closed conic.
BenchRun bench_direct_ellipse(const Speedline& line) {
    BenchRun run;
    run.strategy = "DIRECT_ELLIPSE";
    run.speed = line.speed();
    try {
        const EllipseGeometry geom = ellipse_geometry(fit_direct_conic(line.points()));
        double sum = 0.0;
        for (const auto& p : line.points()) sum += ellipse_distance_squared(geom, p);
        run.ok = true;
        run.ortho = sum;
        run.objective = sum;
    } catch (const Error& e) {
        run.error = e.what();
    }
    return run;
}

struct BenchGroup {
    std::string strategy;
    std::string speed;  // "all" for the per-strategy row
    std::size_t runs = 0;
    std::size_t failed = 0;
    double objective_mean = std::numeric_limits<double>::quiet_NaN();
    double objective_sd = std::numeric_limits<double>::quiet_NaN();
    double rmse_median = std::numeric_limits<double>::quiet_NaN();
    double max_error_median = std::numeric_limits<double>::quiet_NaN();
    double max_error_max = std::numeric_limits<double>::quiet_NaN();
    double ortho_median = std::numeric_limits<double>::quiet_NaN();
    double ortho_mean = std::numeric_limits<double>::quiet_NaN();
    double ortho_max = std::numeric_limits<double>::quiet_NaN();
    std::string flags;
};

double max_of(const std::vector<double>& v) {
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(v.begin(), v.end());
}

BenchGroup summarize_group(const std::string& strategy, const std::string& speed,
                           const std::vector<const BenchRun*>& runs, std::size_t repeats) {
    BenchGroup g;
    g.strategy = strategy;
    g.speed = speed;
    g.runs = runs.size();
    std::vector<double> objective, rmse, max_error, ortho;
    for (const BenchRun* r : runs) {
        if (!r->ok) {
            ++g.failed;
            continue;
        }
        objective.push_back(r->objective);
        if (std::isfinite(r->rmse)) rmse.push_back(r->rmse);
        if (std::isfinite(r->max_error)) max_error.push_back(r->max_error);
        ortho.push_back(r->ortho);
    }
    if (!objective.empty()) g.objective_mean = mean(objective);
    if (objective.size() >= 2 && repeats >= 2) g.objective_sd = sample_sd(objective);
    if (!rmse.empty()) g.rmse_median = median(rmse);
    if (!max_error.empty()) {
        g.max_error_median = median(max_error);
        g.max_error_max = max_of(max_error);
    }
    if (!ortho.empty()) {
        g.ortho_median = median(ortho);
        g.ortho_mean = mean(ortho);
        g.ortho_max = max_of(ortho);
    }
    if (repeats < 2) g.flags = "sd_undefined";
    return g;
}

}  // namespace

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.repeats == 0) throw ConfigError("--repeats must be at least 1");
    const LoadedMap loaded = load_map(cfg);
    const auto& lines = loaded.map.speedlines();
    const std::uint64_t run_seed = cfg.resolved_seed();
    const std::array<InitStrategy, 3> strategies{InitStrategy::None, InitStrategy::Pso, InitStrategy::De};

    const std::size_t per_strategy = cfg.repeats * lines.size();
    std::vector<BenchRun> runs(strategies.size() * per_strategy);
    parallel_for(runs.size(), [&](std::size_t i) {
        const std::size_t s = i / per_strategy;
        const std::size_t r = (i % per_strategy) / lines.size();
        const std::size_t l = i % lines.size();
        runs[i] = bench_superellipse(lines[l], cfg.fit, strategies[s], r, run_seed);
    });
    if (cfg.bench_baseline) {
        for (const auto& line : lines) runs.push_back(bench_direct_ellipse(line));
    }

    const std::string solver(to_string(cfg.fit.local_solver));
    std::string runs_csv = "strategy,solver,speed,repeat,seed,status,objective,rmse,max_error,ortho,evaluations,fallback\n";
    std::size_t failures = 0;
    for (const auto& r : runs) {
        const bool baseline = r.strategy == "DIRECT_ELLIPSE";
        if (!r.ok) {
            if (!baseline) ++failures;
            err << r.strategy << " at " << format_number(r.speed) << ": " << r.error << "\n";
        }
        runs_csv += r.strategy + "," + (baseline ? "" : solver) + "," + format_number(r.speed) + "," +
                    std::to_string(r.repeat) + "," + (baseline ? "" : std::to_string(r.seed)) + "," +
                    (r.ok ? "OK" : "FAILED") + "," + format_number(r.objective) + "," + format_number(r.rmse) + "," +
                    format_number(r.max_error) + "," + format_number(r.ortho) + "," + std::to_string(r.evaluations) +
                    "," + (r.fallback ? "1" : "0") + "\n";
    }

    std::vector<std::string> names;
    for (auto s : strategies) names.emplace_back(to_string(s));
    if (cfg.bench_baseline) names.emplace_back("DIRECT_ELLIPSE");

    std::vector<BenchGroup> groups;
    for (const auto& name : names) {
        const std::size_t repeats = name == "DIRECT_ELLIPSE" ? 1 : cfg.repeats;
        std::vector<const BenchRun*> all;
        std::vector<double> line_sds;
        for (const auto& line : lines) {
            std::vector<const BenchRun*> members;
            for (const auto& r : runs) {
                if (r.strategy == name && r.speed == line.speed()) members.push_back(&r);
            }
            all.insert(all.end(), members.begin(), members.end());
            groups.push_back(summarize_group(name, format_number(line.speed()), members, repeats));
            if (std::isfinite(groups.back().objective_sd)) line_sds.push_back(groups.back().objective_sd);
        }
        BenchGroup total = summarize_group(name, "all", all, repeats);
        // Run-to-run stability of the whole strategy: mean of the per-line SDs.
        total.objective_sd = line_sds.empty() ? std::numeric_limits<double>::quiet_NaN() : mean(line_sds);
        groups.push_back(total);
    }

    std::string summary_csv =
        "strategy,solver,speed,runs,failed,objective_mean,objective_sd,rmse_median,max_error_median,max_error_max,"
        "ortho_median,ortho_mean,ortho_max,flags\n";
    ordered_json summary_json = ordered_json::array();
    for (const auto& g : groups) {
        const bool baseline = g.strategy == "DIRECT_ELLIPSE";
        summary_csv += g.strategy + "," + (baseline ? "" : solver) + "," + g.speed + "," + std::to_string(g.runs) + "," +
                       std::to_string(g.failed) + "," + format_number(g.objective_mean) + "," +
                       format_number(g.objective_sd) + "," + format_number(g.rmse_median) + "," +
                       format_number(g.max_error_median) + "," + format_number(g.max_error_max) + "," +
                       format_number(g.ortho_median) + "," + format_number(g.ortho_mean) + "," +
                       format_number(g.ortho_max) + "," + g.flags + "\n";
        ordered_json j;
        j["strategy"] = g.strategy;
        j["solver"] = baseline ? "" : solver;
        j["speed"] = g.speed;
        j["runs"] = g.runs;
        j["failed"] = g.failed;
        j["objective_mean"] = number(g.objective_mean);
        j["objective_sd"] = number(g.objective_sd);
        j["rmse_median"] = number(g.rmse_median);
        j["max_error_median"] = number(g.max_error_median);
        j["max_error_max"] = number(g.max_error_max);
        j["ortho_median"] = number(g.ortho_median);
        j["ortho_mean"] = number(g.ortho_mean);
        j["ortho_max"] = number(g.ortho_max);
        j["flags"] = g.flags;
        summary_json.push_back(std::move(j));
    }

    ArtifactSet artifacts;
    artifacts.add("bench_runs.csv", runs_csv);
    artifacts.add("bench_summary.csv", summary_csv);
    artifacts.add("bench_summary.json", summary_json.dump(2) + "\n");
    add_scale(artifacts, loaded);
    announce(out, artifacts.commit(cfg.out_dir));

    for (const auto& g : groups) {
        if (g.speed == "all") {
            out << g.strategy << ": median ortho " << format_number(g.ortho_median) << ", max ortho "
                << format_number(g.ortho_max) << "\n";
        }
    }
    return failures == 0 ? kSuccess : kPartial;
}

}  // namespace cpmfit::app::detail
