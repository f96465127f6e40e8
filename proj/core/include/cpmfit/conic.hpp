#pragma once

#include <span>

#include "cpmfit/types.hpp"

namespace cpmfit {

// Direct least-squares ellipse fit (algebraic distance, ellipse-specific
// constraint 4ac - b² = 1).
//
// Data are centered and scaled to unit RMS radius, the 6x6 generalized
// eigenproblem is reduced to a 3x3 one by eliminating the linear block of the
// scatter matrix, and the coefficients are mapped back to the original
// coordinates. The result has unit Euclidean norm and a > 0.
//
// Throws InsufficientDataError for fewer than six points,
// DegenerateInputError when the design matrix has rank below five (collinear
// or repeated points) and NoEllipseError when no eigenvector satisfies the
// ellipse constraint.
ConicCoefficients fit_direct_conic(std::span<const OperatingPoint> points);

// Sum of squared algebraic residuals.
double algebraic_residual(const ConicCoefficients& conic, std::span<const OperatingPoint> points);

// Algebraic residual divided by 4ac - b², i.e. the objective minimized by
// fit_direct_conic. Independent of the coefficient scale.
double normalized_algebraic_residual(const ConicCoefficients& conic, std::span<const OperatingPoint> points);

struct EllipseGeometry {
    double center_x = 0.0;
    double center_y = 0.0;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0;  // of the major axis, radians
};

// Center, semi-axes and orientation of an ellipse-type conic.
// Throws NoEllipseError for non-elliptic or imaginary conics.
EllipseGeometry ellipse_geometry(const ConicCoefficients& conic);

// Squared Euclidean distance from `p` to the nearest point of the ellipse.
double ellipse_distance_squared(const EllipseGeometry& ellipse, const OperatingPoint& p);

}  // namespace cpmfit
