#pragma once

#include <cstddef>
#include <vector>

#include "cpmfit/types.hpp"

namespace cpmfit {

// Tolerance (in normalized coordinates) by which an abscissa may overshoot the
// surge/choke interval before pressure_at / massflow_at refuse it.
inline constexpr double kDomainTolerance = 1e-12;

// Pressure ratio on the speedline at mass flow `m_dot`.
//
// With u = (m_dot - m_zs) / (m_ch - m_zs) the curve is
//     pi = pi_ch + (pi_zs - pi_ch) * (1 - u^cur)^(1/cur),
// i.e. it passes through the surge point at u = 0 and the choke point at
// u = 1 and is non-increasing in between. Throws DomainError for an invalid
// beta or an abscissa outside [m_zs, m_ch].
double pressure_at(const BetaVector& beta, double m_dot);

// Inverse of pressure_at: mass flow at pressure ratio `pi`.
double massflow_at(const BetaVector& beta, double pi);

// |u|^cur + |v|^cur - 1 in normalized coordinates. Zero on the curve,
// negative inside, positive outside. Defined for every finite point.
double implicit_residual(const BetaVector& beta, const OperatingPoint& p);

// `n` points of the curve using the trigonometric parameterization
// m = m_zs + dm·cos(t)^(2/cur), pi = pi_ch + dpi·sin(t)^(2/cur) with t
// uniform on [0, pi/2], ordered choke first.
std::vector<OperatingPoint> sample_curve(const BetaVector& beta, std::size_t n);

namespace detail {

// (1 - x^p)^(1/p) for x in [0, 1], accurate near x -> 1.
double superellipse_complement(double x, double p);

}  // namespace detail

}  // namespace cpmfit
