#include "cpmfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpmfit/errors.hpp"
#include "cpmfit/numeric.hpp"
#include "cpmfit/parallel.hpp"

namespace cpmfit {

namespace {

constexpr double kMaxCurvature = 20.0;

std::string stage_name(std::string_view prefix, std::string_view name) {
    return std::string(prefix) + ":" + std::string(name);
}

}  // namespace

Bounds default_bounds(std::span<const OperatingPoint> points) {
    if (points.size() < 3) throw InsufficientDataError("bounds need at least three points");
    double m_min = points[0].m_dot, m_max = points[0].m_dot;
    double p_min = points[0].pi, p_max = points[0].pi;
    for (const auto& p : points) {
        m_min = std::min(m_min, p.m_dot);
        m_max = std::max(m_max, p.m_dot);
        p_min = std::min(p_min, p.pi);
        p_max = std::max(p_max, p.pi);
    }
    const double dm = m_max - m_min;
    const double dp = p_max - p_min;
    if (!(dm > 0.0)) throw DegenerateSpanError("speedline has zero mass-flow span");
    if (!(dp > 0.0)) throw DegenerateSpanError("speedline has zero pressure-ratio span");

    Bounds b;
    b.lower = {m_min - 0.5 * dm, p_max, m_max, p_min - 0.5 * dp, kMinCurvature};
    b.upper = {m_min, p_max + 0.5 * dp, m_max + 0.5 * dm, p_min, kMaxCurvature};
    return b;
}

FitResult fit_speedline(const Speedline& line, const FitConfig& cfg) {
    cfg.validate();
    const auto& points = line.points();
    if (points.size() < 3) throw InsufficientDataError("speedline " + std::to_string(line.speed()) + " has fewer than three points");
    const Bounds bounds = cfg.bounds ? *cfg.bounds : default_bounds(points);
    bounds.validate();

    const Objective f = [&](const Vec5& x) {
        const double outside = bounds.violation(x);
        if (outside > 0.0) return kPenalty + outside;
        return objective(BetaVector::from_array(x), points, cfg.metric, cfg.mode);
    };
    const auto valid = [&](const Vec5& x, double value) {
        return std::isfinite(value) && value < kPenalty && bounds.contains(x) && BetaVector::from_array(x).is_valid();
    };

    FitResult result;
    result.metric = cfg.metric;
    result.seed = cfg.seed;
    result.under_determined = points.size() < 5;

    Vec5 best{};
    double best_f = 0.0;
    switch (cfg.init_strategy) {
        case InitStrategy::None: {
            best = bounds.midpoint();
            best[4] = std::clamp(2.0, bounds.lower[4], bounds.upper[4]);
            best_f = f(best);
            ++result.evaluations;
            break;
        }
        case InitStrategy::De: {
            const OptimResult r = differential_evolution(f, bounds, cfg, mix_seed(cfg.seed, 1));
            best = r.x;
            best_f = r.value;
            result.evaluations += r.evaluations;
            break;
        }
        case InitStrategy::Pso: {
            const OptimResult r = particle_swarm(f, bounds, cfg, mix_seed(cfg.seed, 2));
            best = r.x;
            best_f = r.value;
            result.evaluations += r.evaluations;
            break;
        }
    }
    const double init_f = best_f;
    result.stage_trace.push_back({stage_name("init", to_string(cfg.init_strategy)), best_f});

    const auto run_local = [&](LocalSolver solver, const Vec5& start) {
        OptimResult r = solver == LocalSolver::NelderMead ? nelder_mead(f, start, bounds, cfg)
                                                          : projected_quasi_newton(f, start, bounds, cfg);
        result.evaluations += r.evaluations;
        return r;
    };
    const auto adopt = [&](const OptimResult& r) {
        if (valid(r.x, r.value) && r.value < best_f) {
            best = r.x;
            best_f = r.value;
        }
    };

    const OptimResult primary = run_local(cfg.local_solver, best);
    const bool improved = primary.value < init_f || init_f <= cfg.objective_tol;
    const bool primary_ok = valid(primary.x, primary.value) && improved;
    adopt(primary);
    result.stage_trace.push_back({stage_name("local", to_string(cfg.local_solver)), best_f});

    if (!primary_ok) {
        result.used_fallback = true;
        adopt(run_local(LocalSolver::NelderMead, best));
        result.stage_trace.push_back({stage_name("fallback", to_string(LocalSolver::NelderMead)), best_f});
    }

    if (!valid(best, best_f)) {
        throw FitFailure("no stage produced a valid beta for speedline " + std::to_string(line.speed()),
                         BetaVector::from_array(best), best_f);
    }
    result.stage_trace.push_back({"validate", best_f});
    result.beta = BetaVector::from_array(best);
    result.objective = best_f;
    return result;
}

std::uint64_t line_seed(std::uint64_t run_seed, double speed) { return mix_seed(run_seed, speed_salt(speed)); }

std::vector<LineFit> fit_map(const CompressorMap& map, const FitConfig& cfg) {
    const auto& lines = map.speedlines();
    std::vector<LineFit> out(lines.size());
    parallel_for(lines.size(), [&](std::size_t i) {
        FitConfig line_cfg = cfg;
        line_cfg.seed = line_seed(cfg.seed, lines[i].speed());
        out[i].speed = lines[i].speed();
        try {
            out[i].result = fit_speedline(lines[i], line_cfg);
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

}  // namespace cpmfit
