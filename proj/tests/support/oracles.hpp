#pragma once

// Test-only reference implementations and synthetic data generators. Nothing
// here calls into the code paths it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "cpmfit/types.hpp"

namespace cpmfit::testing {

// Curve point straight from the closed form, surge half parameterized by u.
inline OperatingPoint curve_point_from_u(const BetaVector& b, double u) {
    const double v = std::pow(std::max(0.0, 1.0 - std::pow(u, b.cur)), 1.0 / b.cur);
    return {b.m_zs + (b.m_ch - b.m_zs) * u, b.pi_ch + (b.pi_zs - b.pi_ch) * v};
}

inline OperatingPoint curve_point_from_v(const BetaVector& b, double v) {
    const double u = std::pow(std::max(0.0, 1.0 - std::pow(v, b.cur)), 1.0 / b.cur);
    return {b.m_zs + (b.m_ch - b.m_zs) * u, b.pi_ch + (b.pi_zs - b.pi_ch) * v};
}

inline OperatingPoint curve_point_from_angle(const BetaVector& b, double t) {
    const double e = 2.0 / b.cur;
    return {b.m_zs + (b.m_ch - b.m_zs) * std::pow(std::max(0.0, std::cos(t)), e),
            b.pi_ch + (b.pi_zs - b.pi_ch) * std::pow(std::max(0.0, std::sin(t)), e)};
}

// Dense scan: a third of the samples uniform in the angle, a third uniform
// in u, a third uniform in v. Together they resolve both the flat and the
// steep ends of the curve for any exponent.
inline double brute_force_distance2(const BetaVector& b, const OperatingPoint& p, std::size_t samples = 100000) {
    const std::size_t per = samples / 3;
    double best = std::numeric_limits<double>::infinity();
    const auto consider = [&](const OperatingPoint& q) {
        const double dm = q.m_dot - p.m_dot;
        const double dp = q.pi - p.pi;
        best = std::min(best, dm * dm + dp * dp);
    };
    for (std::size_t i = 0; i <= per; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(per);
        consider(curve_point_from_angle(b, f * std::numbers::pi / 2.0));
        consider(curve_point_from_u(b, f));
        consider(curve_point_from_v(b, f));
    }
    return best;
}

// Minimum of sum(F²)/(4ac - b²) from the full 6x6 problem C a = mu S a
// (S symmetric positive definite for noisy data). Largest mu <-> smallest
// positive lambda = 1/mu.
inline double dense_conic_objective_minimum(const std::vector<OperatingPoint>& pts) {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(pts.size()), 6);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double x = pts[i].m_dot, y = pts[i].pi;
        d.row(static_cast<Eigen::Index>(i)) << x * x, x * y, y * y, x, y, 1.0;
    }
    const Eigen::MatrixXd s = d.transpose() * d;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 6);
    c(0, 2) = c(2, 0) = 2.0;
    c(1, 1) = -1.0;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, s);
    const Eigen::VectorXd mu = eig.eigenvalues();
    const Eigen::VectorXd a = eig.eigenvectors().col(5);  // ascending order
    const double constraint = 4.0 * a(0) * a(2) - a(1) * a(1);
    (void)mu;
    return a.dot(s * a) / constraint;
}

struct BetaBox {
    double m_zs_lo = 0.0, m_zs_hi = 0.3;
    double pi_zs_lo = 0.7, pi_zs_hi = 1.0;
    double m_ch_lo = 0.7, m_ch_hi = 1.0;
    double pi_ch_lo = 0.0, pi_ch_hi = 0.3;
    double cur_lo = 2.0, cur_hi = 5.0;
};

inline BetaVector random_beta(std::mt19937_64& rng, const BetaBox& box = {}) {
    const auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    return {u(box.m_zs_lo, box.m_zs_hi), u(box.pi_zs_lo, box.pi_zs_hi), u(box.m_ch_lo, box.m_ch_hi),
            u(box.pi_ch_lo, box.pi_ch_hi), u(box.cur_lo, box.cur_hi)};
}

// n points uniform in the angle parameter, endpoints included.
inline std::vector<OperatingPoint> sample_line(const BetaVector& b, std::size_t n) {
    std::vector<OperatingPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::numbers::pi / 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        OperatingPoint p = curve_point_from_angle(b, t);
        if (i == 0) p = {b.m_ch, b.pi_ch};
        if (i + 1 == n) p = {b.m_zs, b.pi_zs};
        out.push_back(p);
    }
    return out;
}

// n points strictly inside the arc, t_k = (k + 1/2)/n · pi/2. Avoids the
// vertical tangent at the choke end where pi(m) is not Lipschitz.
inline std::vector<OperatingPoint> sample_interior(const BetaVector& b, std::size_t n) {
    std::vector<OperatingPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::numbers::pi / 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        out.push_back(curve_point_from_angle(b, t));
    }
    return out;
}

using BetaLaw = std::function<BetaVector(double speed)>;

// Degree-4 polynomial laws in x = (speed - 200)/300. Ordered and strictly
// positive for speeds in [100, 600], so no repair touches the prediction.
inline BetaVector quartic_law(double speed) {
    const double x = (speed - 200.0) / 300.0;
    return {0.12 + 0.3 * x + 0.05 * x * x,
            0.3 + 0.5 * x + 0.2 * x * x - 0.05 * x * x * x * x,
            0.4 + 0.5 * x + 0.1 * x * x * x,
            0.05 + 0.15 * x + 0.03 * x * x,
            2.4 + 0.8 * x - 0.3 * x * x + 0.2 * x * x * x + 0.1 * x * x * x * x};
}

inline CompressorMap law_map(const BetaLaw& law, std::span<const double> speeds, std::size_t points_per_line) {
    std::vector<Speedline> lines;
    for (double s : speeds) lines.emplace_back(s, sample_interior(law(s), points_per_line));
    return CompressorMap("synthetic", "law", std::move(lines));
}

inline std::vector<OperatingPoint> add_noise(std::vector<OperatingPoint> pts, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& p : pts) {
        p.m_dot += noise(rng);
        p.pi += noise(rng);
    }
    return pts;
}

inline double relative_error(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

}  // namespace cpmfit::testing
