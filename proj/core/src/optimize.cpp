#include "cpmfit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cpmfit/errors.hpp"
#include "cpmfit/numeric.hpp"

namespace cpmfit {

namespace {

constexpr std::size_t kDim = 5;

// Bit-level uniform draws so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) {
        return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
    }

private:
    std::mt19937_64 engine_;
};

Vec5 random_point(Rng& rng, const Bounds& b) {
    Vec5 x{};
    for (std::size_t j = 0; j < kDim; ++j) x[j] = rng.uniform(b.lower[j], b.upper[j]);
    return x;
}

double reflect(double v, double lo, double hi, Rng& rng) {
    if (v < lo) v = lo + (lo - v);
    if (v > hi) v = hi - (v - hi);
    if (v < lo || v > hi) v = rng.uniform(lo, hi);
    return v;
}

}  // namespace

void Bounds::validate() const {
    for (std::size_t j = 0; j < kDim; ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(lower[j] < upper[j])) {
            throw DomainError("bounds must satisfy lower < upper for component " + std::string(kBetaFieldNames[j]));
        }
    }
    if (lower[4] < kMinCurvature) throw DomainError("curvature lower bound below 1.05");
}

bool Bounds::contains(const Vec5& x) const {
    for (std::size_t j = 0; j < kDim; ++j) {
        if (!(x[j] >= lower[j] && x[j] <= upper[j])) return false;
    }
    return true;
}

Vec5 Bounds::clamp(const Vec5& x) const {
    Vec5 out{};
    for (std::size_t j = 0; j < kDim; ++j) out[j] = std::clamp(x[j], lower[j], upper[j]);
    return out;
}

Vec5 Bounds::midpoint() const {
    Vec5 out{};
    for (std::size_t j = 0; j < kDim; ++j) out[j] = 0.5 * (lower[j] + upper[j]);
    return out;
}

double Bounds::violation(const Vec5& x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) {
        if (x[j] < lower[j]) v += lower[j] - x[j];
        if (x[j] > upper[j]) v += x[j] - upper[j];
    }
    return v;
}

std::string_view to_string(InitStrategy s) {
    switch (s) {
        case InitStrategy::None: return "none";
        case InitStrategy::Pso: return "pso";
        case InitStrategy::De: return "de";
    }
    return "?";
}

std::string_view to_string(LocalSolver s) { return s == LocalSolver::NelderMead ? "nelder_mead" : "quasi_newton"; }

InitStrategy parse_init(std::string_view text) {
    if (text == "none") return InitStrategy::None;
    if (text == "pso") return InitStrategy::Pso;
    if (text == "de") return InitStrategy::De;
    throw DomainError("unknown init strategy '" + std::string(text) + "'");
}

LocalSolver parse_solver(std::string_view text) {
    if (text == "nm" || text == "nelder_mead") return LocalSolver::NelderMead;
    if (text == "qn" || text == "quasi_newton") return LocalSolver::QuasiNewton;
    throw DomainError("unknown local solver '" + std::string(text) + "'");
}

void FitConfig::validate() const {
    if (de_population < 4) throw DomainError("DE population must be at least 4");
    if (de_max_iters == 0 || pso_particles == 0 || local_max_iters == 0) {
        throw DomainError("iteration and population counts must be positive");
    }
    if (!(objective_tol > 0.0) || !(simplex_tol > 0.0) || !(de_rel_tol >= 0.0)) {
        throw DomainError("tolerances must be positive");
    }
    if (bounds) bounds->validate();
}

double objective(const BetaVector& beta, std::span<const OperatingPoint> points, MetricKind metric, EvalMode mode) {
    for (double v : beta.to_array()) {
        if (!std::isfinite(v)) return 2.0 * kPenalty;
    }
    double violation = 0.0;
    bool invalid = false;
    if (!(beta.m_ch > beta.m_zs)) {
        violation += beta.m_zs - beta.m_ch;
        invalid = true;
    }
    if (!(beta.pi_zs > beta.pi_ch)) {
        violation += beta.pi_ch - beta.pi_zs;
        invalid = true;
    }
    if (beta.cur < kMinCurvature) {
        violation += kMinCurvature - beta.cur;
        invalid = true;
    }
    if (invalid) return kPenalty + violation;

    double value = 0.0;
    if (metric == MetricKind::Ortho) {
        value = ortho_sum(beta, points);
    } else {
        const Evaluation ev = evaluate_prediction(beta, points, mode, false);
        value = ev.get(metric).value;
    }
    return std::isfinite(value) ? value : kPenalty;
}

OptimResult differential_evolution(const Objective& f, const Bounds& bounds, const FitConfig& cfg,
                                   std::uint64_t seed) {
    bounds.validate();
    Rng rng(seed);
    const std::size_t np = std::max<std::size_t>(cfg.de_population, 4);

    std::vector<Vec5> pop(np);
    std::vector<double> fit(np);
    OptimResult out;
    for (std::size_t i = 0; i < np; ++i) {
        pop[i] = random_point(rng, bounds);
        fit[i] = f(pop[i]);
        ++out.evaluations;
    }

    const auto converged = [&] {
        const double m = mean(fit);
        return sample_sd(fit) <= cfg.objective_tol + cfg.de_rel_tol * std::abs(m);
    };

    for (; out.iterations < cfg.de_max_iters; ++out.iterations) {
        if (converged()) {
            out.converged = true;
            break;
        }
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t r1 = 0, r2 = 0, r3 = 0;
            do r1 = rng.index(np); while (r1 == i);
            do r2 = rng.index(np); while (r2 == i || r2 == r1);
            do r3 = rng.index(np); while (r3 == i || r3 == r1 || r3 == r2);

            const std::size_t forced = rng.index(kDim);
            Vec5 trial = pop[i];
            for (std::size_t j = 0; j < kDim; ++j) {
                if (j == forced || rng.uniform() < cfg.de_crossover) {
                    const double mutant = pop[r1][j] + cfg.de_mutation * (pop[r2][j] - pop[r3][j]);
                    trial[j] = reflect(mutant, bounds.lower[j], bounds.upper[j], rng);
                }
            }
            const double ft = f(trial);
            ++out.evaluations;
            if (ft <= fit[i]) {
                pop[i] = trial;
                fit[i] = ft;
            }
        }
    }
    if (!out.converged && converged()) out.converged = true;

    const auto best = static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
    out.x = pop[best];
    out.value = fit[best];
    return out;
}

OptimResult particle_swarm(const Objective& f, const Bounds& bounds, const FitConfig& cfg, std::uint64_t seed) {
    bounds.validate();
    Rng rng(seed);
    const std::size_t n = std::max<std::size_t>(cfg.pso_particles, 1);

    Vec5 vmax{};
    for (std::size_t j = 0; j < kDim; ++j) vmax[j] = 0.5 * bounds.span(j);

    std::vector<Vec5> pos(n), vel(n), pbest(n);
    std::vector<double> pbest_f(n);
    OptimResult out;
    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = random_point(rng, bounds);
        for (std::size_t j = 0; j < kDim; ++j) vel[i][j] = rng.uniform(-vmax[j], vmax[j]);
        pbest[i] = pos[i];
        pbest_f[i] = f(pos[i]);
        ++out.evaluations;
        if (pbest_f[i] < pbest_f[g]) g = i;
    }

    for (; out.iterations < cfg.pso_iters; ++out.iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < kDim; ++j) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double v = cfg.pso_inertia * vel[i][j] + cfg.pso_cognitive * r1 * (pbest[i][j] - pos[i][j]) +
                           cfg.pso_social * r2 * (pbest[g][j] - pos[i][j]);
                v = std::clamp(v, -vmax[j], vmax[j]);
                vel[i][j] = v;
                pos[i][j] = std::clamp(pos[i][j] + v, bounds.lower[j], bounds.upper[j]);
            }
            const double fi = f(pos[i]);
            ++out.evaluations;
            if (fi < pbest_f[i]) {
                pbest[i] = pos[i];
                pbest_f[i] = fi;
                if (fi < pbest_f[g]) g = i;
            }
        }
    }
    out.x = pbest[g];
    out.value = pbest_f[g];
    return out;
}

namespace {

OptimResult nelder_mead_pass(const Objective& f, const Vec5& x0, const Bounds& bounds, const FitConfig& cfg,
                             std::size_t max_iters) {
    constexpr double kReflect = 1.0;
    constexpr double kExpand = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink = 0.5;
    constexpr std::size_t nv = kDim + 1;

    OptimResult out;
    std::array<Vec5, nv> x{};
    std::array<double, nv> fx{};
    x[0] = x0;
    for (std::size_t j = 0; j < kDim; ++j) {
        x[j + 1] = x0;
        const double step = 0.05 * bounds.span(j);
        // Step inward when x0 sits on the upper face.
        x[j + 1][j] += (x0[j] + step <= bounds.upper[j]) ? step : -step;
    }
    for (std::size_t k = 0; k < nv; ++k) {
        fx[k] = f(x[k]);
        ++out.evaluations;
    }

    std::array<std::size_t, nv> order{};
    const auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::array<Vec5, nv> xs{};
        std::array<double, nv> fs{};
        for (std::size_t k = 0; k < nv; ++k) {
            xs[k] = x[order[k]];
            fs[k] = fx[order[k]];
        }
        x = xs;
        fx = fs;
    };
    const auto diameter = [&] {
        double d = 0.0;
        for (std::size_t k = 1; k < nv; ++k) {
            for (std::size_t j = 0; j < kDim; ++j) d = std::max(d, std::abs(x[k][j] - x[0][j]));
        }
        return d;
    };
    const auto along = [](const Vec5& from, const Vec5& to, double t) {
        Vec5 p{};
        for (std::size_t j = 0; j < kDim; ++j) p[j] = from[j] + t * (to[j] - from[j]);
        return p;
    };

    sort_simplex();
    for (; out.iterations < max_iters; ++out.iterations) {
        if (diameter() <= cfg.simplex_tol && std::abs(fx[nv - 1] - fx[0]) <= cfg.objective_tol) {
            out.converged = true;
            break;
        }
        Vec5 centroid{};
        for (std::size_t k = 0; k + 1 < nv; ++k) {
            for (std::size_t j = 0; j < kDim; ++j) centroid[j] += x[k][j] / static_cast<double>(kDim);
        }
        const Vec5 xr = along(centroid, x[nv - 1], -kReflect);
        const double fr = f(xr);
        ++out.evaluations;

        if (fr < fx[0]) {
            const Vec5 xe = along(centroid, x[nv - 1], -kExpand);
            const double fe = f(xe);
            ++out.evaluations;
            if (fe < fr) {
                x[nv - 1] = xe;
                fx[nv - 1] = fe;
            } else {
                x[nv - 1] = xr;
                fx[nv - 1] = fr;
            }
        } else if (fr < fx[nv - 2]) {
            x[nv - 1] = xr;
            fx[nv - 1] = fr;
        } else {
            const bool outside = fr < fx[nv - 1];
            const Vec5 xc = outside ? along(centroid, xr, kContract) : along(centroid, x[nv - 1], kContract);
            const double fc = f(xc);
            ++out.evaluations;
            if (fc < (outside ? fr : fx[nv - 1])) {
                x[nv - 1] = xc;
                fx[nv - 1] = fc;
            } else {
                for (std::size_t k = 1; k < nv; ++k) {
                    x[k] = along(x[0], x[k], kShrink);
                    fx[k] = f(x[k]);
                    ++out.evaluations;
                }
            }
        }
        sort_simplex();
    }
    out.x = x[0];
    out.value = fx[0];
    return out;
}

}  // namespace

// A converged simplex can be degenerate; restarting from the best vertex with
// a fresh simplex continues until a restart no longer improves the value.
OptimResult nelder_mead(const Objective& f, const Vec5& x0, const Bounds& bounds, const FitConfig& cfg) {
    OptimResult best = nelder_mead_pass(f, x0, bounds, cfg, cfg.local_max_iters);
    while (best.converged && best.iterations < cfg.local_max_iters) {
        OptimResult next = nelder_mead_pass(f, best.x, bounds, cfg, cfg.local_max_iters - best.iterations);
        next.iterations += best.iterations;
        next.evaluations += best.evaluations;
        const bool improved = next.value < best.value - cfg.objective_tol * 1e-3 * std::max(1.0, std::abs(best.value));
        if (!improved) {
            best.iterations = next.iterations;
            best.evaluations = next.evaluations;
            if (next.value < best.value) {
                best.x = next.x;
                best.value = next.value;
            }
            break;
        }
        best = next;
    }
    return best;
}

OptimResult projected_quasi_newton(const Objective& f, const Vec5& x0, const Bounds& bounds, const FitConfig& cfg) {
    using Mat5 = std::array<Vec5, kDim>;
    OptimResult out;

    Vec5 h{};
    for (std::size_t j = 0; j < kDim; ++j) h[j] = 1e-7 * bounds.span(j);
    const auto eval = [&](const Vec5& x) {
        ++out.evaluations;
        return f(x);
    };
    const auto gradient = [&](const Vec5& x) {
        Vec5 g{};
        for (std::size_t j = 0; j < kDim; ++j) {
            Vec5 hi = x, lo = x;
            hi[j] = std::min(x[j] + h[j], bounds.upper[j]);
            lo[j] = std::max(x[j] - h[j], bounds.lower[j]);
            g[j] = (eval(hi) - eval(lo)) / (hi[j] - lo[j]);
        }
        return g;
    };
    // Inverse-Hessian seed scaled to the box so steps start at a sensible size.
    const auto identity = [&] {
        Mat5 m{};
        for (std::size_t j = 0; j < kDim; ++j) m[j][j] = bounds.span(j) * bounds.span(j) * 1e-2;
        return m;
    };

    Vec5 x = bounds.clamp(x0);
    double fx = eval(x);
    Vec5 g = gradient(x);
    Mat5 hinv = identity();
    bool fresh = true;

    for (; out.iterations < cfg.local_max_iters; ++out.iterations) {
        Vec5 d{};
        for (std::size_t i = 0; i < kDim; ++i) {
            for (std::size_t j = 0; j < kDim; ++j) d[i] -= hinv[i][j] * g[j];
        }
        double slope = 0.0;
        for (std::size_t j = 0; j < kDim; ++j) slope += g[j] * d[j];
        if (!(slope < 0.0)) {
            if (fresh) break;
            hinv = identity();
            fresh = true;
            continue;
        }

        double alpha = 1.0;
        Vec5 xn{};
        double fn = 0.0;
        bool accepted = false;
        while (alpha > 1e-12) {
            xn = x;
            for (std::size_t j = 0; j < kDim; ++j) xn[j] += alpha * d[j];
            xn = bounds.clamp(xn);
            fn = eval(xn);
            double decrease = 0.0;
            for (std::size_t j = 0; j < kDim; ++j) decrease += g[j] * (xn[j] - x[j]);
            if (fn <= fx + 1e-4 * decrease && fn <= fx) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (fresh) break;
            hinv = identity();
            fresh = true;
            continue;
        }

        Vec5 s{}, y{};
        const Vec5 gn = gradient(xn);
        double step_norm = 0.0;
        for (std::size_t j = 0; j < kDim; ++j) {
            s[j] = xn[j] - x[j];
            y[j] = gn[j] - g[j];
            step_norm = std::max(step_norm, std::abs(s[j]));
        }
        const double df = fx - fn;
        x = xn;
        fx = fn;
        g = gn;
        if (df <= cfg.objective_tol * std::max(1.0, std::abs(fx)) || step_norm <= cfg.simplex_tol) {
            out.converged = true;
            break;
        }

        double sy = 0.0;
        for (std::size_t j = 0; j < kDim; ++j) sy += s[j] * y[j];
        if (sy > 1e-16) {
            // BFGS update of the inverse Hessian.
            Vec5 hy{};
            for (std::size_t i = 0; i < kDim; ++i) {
                for (std::size_t j = 0; j < kDim; ++j) hy[i] += hinv[i][j] * y[j];
            }
            double yhy = 0.0;
            for (std::size_t j = 0; j < kDim; ++j) yhy += y[j] * hy[j];
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < kDim; ++i) {
                for (std::size_t j = 0; j < kDim; ++j) {
                    hinv[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
            fresh = false;
        }
    }
    out.x = x;
    out.value = fx;
    return out;
}

}  // namespace cpmfit
