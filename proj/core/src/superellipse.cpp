#include "cpmfit/superellipse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cpmfit/errors.hpp"

namespace cpmfit {

namespace detail {

double superellipse_complement(double x, double p) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    // 1 - x^p computed as -expm1(p·ln x) keeps digits when x^p is close to 1.
    const double one_minus = -std::expm1(p * std::log(x));
    return std::pow(one_minus, 1.0 / p);
}

}  // namespace detail

namespace {

void require_valid(const BetaVector& beta) {
    if (!(beta.mass_span() > 0.0) || !(beta.pressure_span() > 0.0) || !(beta.cur > 0.0) ||
        !std::isfinite(beta.cur) || !std::isfinite(beta.m_zs) || !std::isfinite(beta.pi_ch)) {
        throw DomainError("invalid beta vector");
    }
}

double normalized_in_domain(double value, double origin, double span, const char* what) {
    const double t = (value - origin) / span;
    if (!(t >= -kDomainTolerance && t <= 1.0 + kDomainTolerance)) {
        throw DomainError(std::string(what) + " " + std::to_string(value) + " outside the surge-choke interval");
    }
    return std::clamp(t, 0.0, 1.0);
}

}  // namespace

double pressure_at(const BetaVector& beta, double m_dot) {
    require_valid(beta);
    const double u = normalized_in_domain(m_dot, beta.m_zs, beta.mass_span(), "mass flow");
    if (u == 0.0) return beta.pi_zs;
    if (u == 1.0) return beta.pi_ch;
    const double pi = beta.pi_ch + beta.pressure_span() * detail::superellipse_complement(u, beta.cur);
    return std::clamp(pi, beta.pi_ch, beta.pi_zs);
}

double massflow_at(const BetaVector& beta, double pi) {
    require_valid(beta);
    const double v = normalized_in_domain(pi, beta.pi_ch, beta.pressure_span(), "pressure ratio");
    if (v == 0.0) return beta.m_ch;
    if (v == 1.0) return beta.m_zs;
    const double m = beta.m_zs + beta.mass_span() * detail::superellipse_complement(v, beta.cur);
    return std::clamp(m, beta.m_zs, beta.m_ch);
}

double implicit_residual(const BetaVector& beta, const OperatingPoint& p) {
    const double u = (p.m_dot - beta.m_zs) / beta.mass_span();
    const double v = (p.pi - beta.pi_ch) / beta.pressure_span();
    return std::pow(std::abs(u), beta.cur) + std::pow(std::abs(v), beta.cur) - 1.0;
}

std::vector<OperatingPoint> sample_curve(const BetaVector& beta, std::size_t n) {
    if (n < 2) throw InsufficientDataError("sample_curve needs at least two points");
    require_valid(beta);
    const double exponent = 2.0 / beta.cur;
    std::vector<OperatingPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double c = 0.0;
        double s = 0.0;
        if (i == 0) {
            c = 1.0;
        } else if (i + 1 == n) {
            s = 1.0;
        } else {
            const double t = (std::numbers::pi / 2.0) * static_cast<double>(i) / static_cast<double>(n - 1);
            c = std::cos(t);
            s = std::sin(t);
        }
        out.push_back({beta.m_zs + beta.mass_span() * std::pow(c, exponent),
                       beta.pi_ch + beta.pressure_span() * std::pow(s, exponent)});
    }
    return out;
}

}  // namespace cpmfit
