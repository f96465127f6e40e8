#include "cpmfit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cpmfit/errors.hpp"
#include "cpmfit/numeric.hpp"
#include "cpmfit/superellipse.hpp"

namespace cpmfit {

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 2.0;
constexpr double kProjectionTol = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_paired(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size()) throw LengthMismatchError("truth and prediction lengths differ");
    if (truth.empty()) throw EmptyInputError("metric of an empty sample");
}

double distance_squared(const OperatingPoint& a, const OperatingPoint& b) {
    const double dm = a.m_dot - b.m_dot;
    const double dp = a.pi - b.pi;
    return dm * dm + dp * dp;
}

}  // namespace

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::Rmse: return "rmse";
        case MetricKind::Mape: return "mape";
        case MetricKind::ResidualSd: return "residual_sd";
        case MetricKind::Ortho: return "ortho";
    }
    return "?";
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::Pressure ? "pressure" : "massflow"; }

MetricKind parse_metric(std::string_view text) {
    if (text == "rmse") return MetricKind::Rmse;
    if (text == "mape") return MetricKind::Mape;
    if (text == "residual_sd" || text == "sd") return MetricKind::ResidualSd;
    if (text == "ortho") return MetricKind::Ortho;
    throw DomainError("unknown metric '" + std::string(text) + "'");
}

EvalMode parse_mode(std::string_view text) {
    if (text == "pressure") return EvalMode::Pressure;
    if (text == "massflow") return EvalMode::Massflow;
    throw DomainError("unknown evaluation mode '" + std::string(text) + "'");
}

bool ErrorSummary::defined() const { return std::isfinite(value); }

double rmse(std::span<const double> truth, std::span<const double> pred) {
    require_paired(truth, pred);
    double ss = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) ss += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

MapeResult mape(std::span<const double> truth, std::span<const double> pred) {
    require_paired(truth, pred);
    MapeResult out;
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (std::abs(truth[i]) > kMapeEpsilon) {
            sum += 100.0 * std::abs(truth[i] - pred[i]) / std::abs(truth[i]);
            ++out.n_used;
        } else {
            ++out.n_skipped;
        }
    }
    if (out.n_used == 0) throw UndefinedMapeError("every truth value is below the MAPE threshold");
    out.value = sum / static_cast<double>(out.n_used);
    return out;
}

double residual_sd(std::span<const double> residuals) {
    if (residuals.size() < 2) throw InsufficientDataError("residual SD needs at least two residuals");
    return sample_sd(residuals);
}

CurveProjector::CurveProjector(const BetaVector& beta) : beta_(beta), knee_(std::pow(2.0, -1.0 / beta.cur)) {
    grid_.reserve(kGridSize);
    for (std::size_t i = 0; i < kGridSize; ++i) {
        grid_.push_back(at(kQuarterTurn * static_cast<double>(i) / static_cast<double>(kGridSize - 1)));
    }
}

// The curve is parameterized piecewise by whichever normalized coordinate
// changes fastest: v on the choke half, u on the surge half, joined at the
// knee u = v. Curve speed then stays within [1, sqrt(2)] in normalized
// coordinates, so a bracket in t maps to a short arc for any exponent.
OperatingPoint CurveProjector::at(double t) const {
    const double s = std::clamp(t / (kQuarterTurn / 2.0), 0.0, 2.0);
    double u = 0.0;
    double v = 0.0;
    if (s <= 1.0) {
        v = s * knee_;
        u = detail::superellipse_complement(v, beta_.cur);
    } else {
        u = (2.0 - s) * knee_;
        v = detail::superellipse_complement(u, beta_.cur);
    }
    return {beta_.m_zs + beta_.mass_span() * u, beta_.pi_ch + beta_.pressure_span() * v};
}

NearestPoint CurveProjector::nearest(const OperatingPoint& p) const {
    constexpr std::size_t n = kGridSize;
    std::array<double, kGridSize> d2;
    for (std::size_t i = 0; i < n; ++i) d2[i] = distance_squared(grid_[i], p);

    // Up to three best local minima of the grid, ascending by distance.
    constexpr std::size_t kMaxBrackets = 3;
    std::array<std::size_t, kMaxBrackets> minima{};
    std::size_t n_minima = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || d2[i] <= d2[i - 1];
        const bool right_ok = i + 1 == n || d2[i] <= d2[i + 1];
        if (!left_ok || !right_ok) continue;
        std::size_t pos = n_minima < kMaxBrackets ? n_minima++ : kMaxBrackets;
        if (pos == kMaxBrackets) {
            if (d2[i] >= d2[minima[kMaxBrackets - 1]]) continue;
            pos = kMaxBrackets - 1;
        }
        while (pos > 0 && d2[minima[pos - 1]] > d2[i]) {
            minima[pos] = minima[pos - 1];
            --pos;
        }
        minima[pos] = i;
    }

    constexpr double step = kQuarterTurn / static_cast<double>(n - 1);
    NearestPoint best{grid_[minima[0]], d2[minima[0]]};
    const auto dist_at = [&](double t) { return distance_squared(at(t), p); };
    for (std::size_t k = 0; k < n_minima; ++k) {
        const std::size_t i = minima[k];
        const double lo = i == 0 ? 0.0 : step * static_cast<double>(i - 1);
        const double hi = i + 1 == n ? kQuarterTurn : step * static_cast<double>(i + 1);
        const double t = golden_section_minimize(dist_at, lo, hi, kProjectionTol);
        const OperatingPoint q = at(t);
        const double d = distance_squared(q, p);
        if (d < best.distance_squared) best = {q, d};
    }
    return best;
}

NearestPoint nearest_point_on_curve(const BetaVector& beta, const OperatingPoint& p) {
    return CurveProjector(beta).nearest(p);
}

double ortho_sum(const BetaVector& beta, std::span<const OperatingPoint> points) {
    if (points.empty()) throw EmptyInputError("ortho of an empty point set");
    const CurveProjector projector(beta);
    double sum = 0.0;
    for (const auto& p : points) sum += projector.nearest(p).distance_squared;
    return sum;
}

const ErrorSummary& Evaluation::get(MetricKind kind) const {
    switch (kind) {
        case MetricKind::Rmse: return rmse;
        case MetricKind::Mape: return mape;
        case MetricKind::ResidualSd: return residual_sd;
        case MetricKind::Ortho: return ortho;
    }
    return ortho;
}

Evaluation evaluate_prediction(const BetaVector& beta, std::span<const OperatingPoint> measured, EvalMode mode,
                               bool include_ortho) {
    if (measured.empty()) throw EmptyInputError("evaluation needs at least one measured point");

    Evaluation ev;
    ev.mode = mode;
    ev.n_points = measured.size();
    ev.out_of_domain.assign(measured.size(), false);

    const bool pressure = mode == EvalMode::Pressure;
    const double origin = pressure ? beta.m_zs : beta.pi_ch;
    const double span = pressure ? beta.mass_span() : beta.pressure_span();
    const double base = pressure ? beta.pi_ch : beta.m_zs;
    const double out_span = pressure ? beta.pressure_span() : beta.mass_span();

    std::vector<double> truth;
    std::vector<double> pred;
    std::size_t nonfinite = 0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const auto& p = measured[i];
        const double abscissa = pressure ? p.m_dot : p.pi;
        double x = (abscissa - origin) / span;
        if (x < 0.0 || x > 1.0) {
            ev.out_of_domain[i] = true;
            ++ev.n_out_of_domain;
            x = std::clamp(x, 0.0, 1.0);
        }
        const double predicted = base + out_span * detail::superellipse_complement(x, beta.cur);
        const double actual = pressure ? p.pi : p.m_dot;
        if (!std::isfinite(predicted) || !std::isfinite(actual) || !std::isfinite(x)) {
            ++nonfinite;
            continue;
        }
        truth.push_back(actual);
        pred.push_back(predicted);
    }

    const auto base_summary = [&](MetricKind kind) {
        ErrorSummary s;
        s.kind = kind;
        s.n_valid = truth.size();
        s.n_skipped = nonfinite;
        s.has_nonfinite = nonfinite > 0;
        s.value = kNaN;
        return s;
    };

    ev.rmse = base_summary(MetricKind::Rmse);
    ev.mape = base_summary(MetricKind::Mape);
    ev.residual_sd = base_summary(MetricKind::ResidualSd);

    std::vector<double> abs_err;
    std::vector<double> residuals;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        residuals.push_back(truth[i] - pred[i]);
        abs_err.push_back(std::abs(truth[i] - pred[i]));
    }
    if (!truth.empty()) {
        ev.rmse.value = rmse(truth, pred);
        ev.rmse.mean = mean(abs_err);
        ev.rmse.sd = sample_sd(abs_err);
        ev.max_abs_error = *std::max_element(abs_err.begin(), abs_err.end());

        std::vector<double> ape;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (std::abs(truth[i]) > kMapeEpsilon) ape.push_back(100.0 * abs_err[i] / std::abs(truth[i]));
        }
        ev.mape.n_valid = ape.size();
        ev.mape.n_skipped = nonfinite + (truth.size() - ape.size());
        if (!ape.empty()) {
            ev.mape.value = mean(ape);
            ev.mape.mean = ev.mape.value;
            ev.mape.sd = sample_sd(ape);
        }

        ev.residual_sd.mean = mean(residuals);
        if (residuals.size() >= 2) {
            ev.residual_sd.value = residual_sd(residuals);
            ev.residual_sd.sd = ev.residual_sd.value;
        }
    } else {
        ev.max_abs_error = kNaN;
    }

    ev.ortho.kind = MetricKind::Ortho;
    ev.ortho.value = kNaN;
    if (!include_ortho) {
        ev.ortho.n_skipped = 0;
    } else if (beta.is_valid(0.0)) {
        const CurveProjector projector(beta);
        std::vector<double> d2;
        std::size_t skipped = 0;
        for (const auto& p : measured) {
            const double d = projector.nearest(p).distance_squared;
            if (std::isfinite(d)) {
                d2.push_back(d);
            } else {
                ++skipped;
            }
        }
        ev.ortho.n_valid = d2.size();
        ev.ortho.n_skipped = skipped;
        ev.ortho.has_nonfinite = skipped > 0;
        if (!d2.empty()) {
            double sum = 0.0;
            for (double d : d2) sum += d;
            ev.ortho.value = sum;
            ev.ortho.mean = mean(d2);
            ev.ortho.sd = sample_sd(d2);
        }
    } else {
        ev.ortho.n_skipped = measured.size();
        ev.ortho.has_nonfinite = true;
    }
    return ev;
}

}  // namespace cpmfit
