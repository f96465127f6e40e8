#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "cpmfit/metrics.hpp"
#include "cpmfit/types.hpp"

namespace cpmfit {

using Vec5 = std::array<double, 5>;
using Objective = std::function<double(const Vec5&)>;

// Box constraints over the beta components, in BetaVector field order.
struct Bounds {
    Vec5 lower{};
    Vec5 upper{};

    // Throws DomainError unless lower < upper componentwise and the curvature
    // lower bound is at least kMinCurvature.
    void validate() const;

    bool contains(const Vec5& x) const;
    Vec5 clamp(const Vec5& x) const;
    Vec5 midpoint() const;
    double span(std::size_t i) const { return upper[i] - lower[i]; }
    // Sum of distances by which x leaves the box; 0 inside.
    double violation(const Vec5& x) const;
};

enum class InitStrategy { None, Pso, De };
enum class LocalSolver { NelderMead, QuasiNewton };

std::string_view to_string(InitStrategy s);
std::string_view to_string(LocalSolver s);
InitStrategy parse_init(std::string_view text);
LocalSolver parse_solver(std::string_view text);

struct FitConfig {
    InitStrategy init_strategy = InitStrategy::De;
    LocalSolver local_solver = LocalSolver::NelderMead;
    MetricKind metric = MetricKind::Ortho;
    EvalMode mode = EvalMode::Pressure;

    std::size_t de_population = 15;
    std::size_t de_max_iters = 1000;
    // Population converged once sd(f) <= objective_tol + de_rel_tol·|mean(f)|.
    double de_rel_tol = 0.01;
    double de_mutation = 0.8;
    double de_crossover = 0.9;

    std::size_t pso_particles = 100;
    std::size_t pso_iters = 50;
    double pso_inertia = 0.729;
    double pso_cognitive = 1.494;
    double pso_social = 1.494;

    std::size_t local_max_iters = 5000;
    double objective_tol = 1e-12;
    double simplex_tol = 1e-10;

    std::uint64_t seed = 0;

    // Replaces default_bounds() when set.
    std::optional<Bounds> bounds;

    // Throws DomainError for zero counts or non-positive tolerances.
    void validate() const;
};

struct OptimResult {
    Vec5 x{};
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Added to the objective of any beta that breaks the BetaVector invariants.
inline constexpr double kPenalty = 1e12;

// Fitting loss of `beta` against `points`. Invalid betas (ordering violated,
// curvature too small, non-finite) map to kPenalty + violation magnitude so
// population methods can move through them.
double objective(const BetaVector& beta, std::span<const OperatingPoint> points, MetricKind metric, EvalMode mode);

// DE/rand/1/bin. Trial components that leave the box are reflected back in.
// Stops on population convergence or after de_max_iters generations.
OptimResult differential_evolution(const Objective& f, const Bounds& bounds, const FitConfig& cfg,
                                   std::uint64_t seed);

// Inertia-weight particle swarm with velocities clamped to half the box span
// and positions clamped to the box.
OptimResult particle_swarm(const Objective& f, const Bounds& bounds, const FitConfig& cfg, std::uint64_t seed);

// Nelder-Mead from an initial simplex of x0 plus 5% of each bound span.
// The bounds only shape that simplex; feasibility is the objective's job.
OptimResult nelder_mead(const Objective& f, const Vec5& x0, const Bounds& bounds, const FitConfig& cfg);

// Projected quasi-Newton (BFGS-scaled projected gradient, central finite
// differences, Armijo backtracking). Optional alternative to Nelder-Mead.
OptimResult projected_quasi_newton(const Objective& f, const Vec5& x0, const Bounds& bounds, const FitConfig& cfg);

}  // namespace cpmfit
