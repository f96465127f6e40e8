#include "cpmfit/conic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

#include "cpmfit/errors.hpp"
#include "cpmfit/numeric.hpp"

namespace cpmfit {

ConicCoefficients fit_direct_conic(std::span<const OperatingPoint> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n < 6) throw InsufficientDataError("direct conic fit needs at least six points");

    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : points) {
        mx += p.m_dot;
        my += p.pi;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double radius2 = 0.0;
    for (const auto& p : points) radius2 += (p.m_dot - mx) * (p.m_dot - mx) + (p.pi - my) * (p.pi - my);
    const double scale = std::sqrt(radius2 / static_cast<double>(n));
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DegenerateInputError("conic fit: all points coincide");

    Eigen::MatrixXd quad(n, 3);
    Eigen::MatrixXd lin(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = (points[static_cast<std::size_t>(i)].m_dot - mx) / scale;
        const double y = (points[static_cast<std::size_t>(i)].pi - my) / scale;
        quad.row(i) << x * x, x * y, y * y;
        lin.row(i) << x, y, 1.0;
    }

    Eigen::MatrixXd design(n, 6);
    design << quad, lin;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > sv(0) * 1e-10) ++rank;
    }
    if (rank < 5) throw DegenerateInputError("conic fit: scatter matrix is rank deficient");

    const Eigen::Matrix3d s1 = quad.transpose() * quad;
    const Eigen::Matrix3d s2 = quad.transpose() * lin;
    const Eigen::Matrix3d s3 = lin.transpose() * lin;
    const Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
    if (!s3_lu.isInvertible()) throw DegenerateInputError("conic fit: points are collinear");

    const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
    const Eigen::Matrix3d reduced = s1 + s2 * t;
    // Premultiply by the inverse of the 3x3 ellipse constraint block.
    Eigen::Matrix3d m;
    m.row(0) = reduced.row(2) / 2.0;
    m.row(1) = -reduced.row(1);
    m.row(2) = reduced.row(0) / 2.0;

    const Eigen::EigenSolver<Eigen::Matrix3d> eig(m);
    const Eigen::Matrix<double, 6, 6> scatter = design.transpose() * design;
    Eigen::Matrix<double, 6, 1> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        if (std::abs(eig.eigenvalues()(k).imag()) > 1e-9 * (1.0 + std::abs(eig.eigenvalues()(k).real()))) continue;
        const Eigen::Vector3d a1 = eig.eigenvectors().col(k).real();
        const double constraint = 4.0 * a1(0) * a1(2) - a1(1) * a1(1);
        if (!(constraint > 0.0)) continue;
        Eigen::Matrix<double, 6, 1> full;
        full << a1, t * a1;
        const double cost = full.dot(scatter * full) / constraint;
        if (cost < best_cost) {
            best_cost = cost;
            best = full;
        }
    }
    if (!std::isfinite(best_cost)) throw NoEllipseError("conic fit: no eigenvector satisfies the ellipse constraint");

    // Undo the centering/scaling: substitute X = (x - mx)/s, Y = (y - my)/s
    // and multiply through by s².
    const double A = best(0), B = best(1), C = best(2), D = best(3), E = best(4), F = best(5);
    Eigen::Matrix<double, 6, 1> coef;
    coef(0) = A;
    coef(1) = B;
    coef(2) = C;
    coef(3) = -2.0 * A * mx - B * my + D * scale;
    coef(4) = -B * mx - 2.0 * C * my + E * scale;
    coef(5) = A * mx * mx + B * mx * my + C * my * my - D * scale * mx - E * scale * my + F * scale * scale;
    coef.normalize();
    if (coef(0) < 0.0) coef = -coef;
    return {coef(0), coef(1), coef(2), coef(3), coef(4), coef(5)};
}

double algebraic_residual(const ConicCoefficients& conic, std::span<const OperatingPoint> points) {
    double sum = 0.0;
    for (const auto& p : points) {
        const double r = conic.evaluate(p.m_dot, p.pi);
        sum += r * r;
    }
    return sum;
}

double normalized_algebraic_residual(const ConicCoefficients& conic, std::span<const OperatingPoint> points) {
    return algebraic_residual(conic, points) / conic.discriminant();
}

EllipseGeometry ellipse_geometry(const ConicCoefficients& conic) {
    const double disc = conic.discriminant();
    if (!(disc > 0.0)) throw NoEllipseError("conic is not an ellipse");
    // Center: gradient of the quadratic form vanishes.
    const double cx = (conic.b * conic.e - 2.0 * conic.c * conic.d) / disc;
    const double cy = (conic.b * conic.d - 2.0 * conic.a * conic.e) / disc;
    const double f0 = conic.evaluate(cx, cy);

    Eigen::Matrix2d q;
    q << conic.a, conic.b / 2.0, conic.b / 2.0, conic.c;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(q);
    const double l0 = eig.eigenvalues()(0);
    const double l1 = eig.eigenvalues()(1);
    const double r0 = -f0 / l0;
    const double r1 = -f0 / l1;
    if (!(r0 > 0.0) || !(r1 > 0.0)) throw NoEllipseError("conic describes an imaginary ellipse");
    // Smaller eigenvalue -> longer axis.
    const Eigen::Vector2d major_dir = eig.eigenvectors().col(0);
    return {cx, cy, std::sqrt(r0), std::sqrt(r1), std::atan2(major_dir(1), major_dir(0))};
}

double ellipse_distance_squared(const EllipseGeometry& ellipse, const OperatingPoint& p) {
    const double ca = std::cos(ellipse.angle);
    const double sa = std::sin(ellipse.angle);
    // Point in the ellipse frame.
    const double dx = p.m_dot - ellipse.center_x;
    const double dy = p.pi - ellipse.center_y;
    const double px = ca * dx + sa * dy;
    const double py = -sa * dx + ca * dy;
    const auto dist2 = [&](double theta) {
        const double ex = ellipse.semi_major * std::cos(theta) - px;
        const double ey = ellipse.semi_minor * std::sin(theta) - py;
        return ex * ex + ey * ey;
    };
    constexpr int kGrid = 360;
    const double step = 2.0 * std::numbers::pi / kGrid;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGrid; ++i) {
        const double prev = dist2((i - 1) * step);
        const double here = dist2(i * step);
        const double next = dist2((i + 1) * step);
        if (here <= prev && here <= next) {
            const double t = golden_section_minimize(dist2, (i - 1) * step, (i + 1) * step, 1e-12);
            best = std::min({best, here, dist2(t)});
        }
    }
    return best;
}

}  // namespace cpmfit
