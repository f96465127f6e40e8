#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace cpmfit {

// One measured (mass flow, pressure ratio) pair. After preprocessing both
// coordinates are min-max normalized per map.
struct OperatingPoint {
    double m_dot = 0.0;
    double pi = 0.0;

    friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

// Lower bound on the curvature exponent accepted anywhere in the library.
inline constexpr double kMinCurvature = 1.05;

// Superellipse encoding of a speedline: surge point, choke point and the
// curvature exponent. The curve runs from (m_zs, pi_zs) down to (m_ch, pi_ch).
struct BetaVector {
    double m_zs = 0.0;
    double pi_zs = 0.0;
    double m_ch = 0.0;
    double pi_ch = 0.0;
    double cur = 2.0;

    static constexpr std::size_t size = 5;

    std::array<double, 5> to_array() const { return {m_zs, pi_zs, m_ch, pi_ch, cur}; }
    static BetaVector from_array(std::span<const double, 5> v) { return {v[0], v[1], v[2], v[3], v[4]}; }

    double mass_span() const { return m_ch - m_zs; }
    double pressure_span() const { return pi_zs - pi_ch; }

    // All ordering invariants hold and every field is finite.
    bool is_valid(double min_cur = kMinCurvature) const;

    friend bool operator==(const BetaVector&, const BetaVector&) = default;
};

inline constexpr std::array<const char*, 5> kBetaFieldNames = {"m_zs", "pi_zs", "m_ch", "pi_ch", "cur"};

// A speed key with its measurement points, kept sorted by mass flow.
// Construction sorts the points and rejects non-finite values or repeated
// mass flows.
class Speedline {
public:
    Speedline() = default;
    Speedline(double speed, std::vector<OperatingPoint> points);

    double speed() const noexcept { return speed_; }
    const std::vector<OperatingPoint>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    double speed_ = 0.0;
    std::vector<OperatingPoint> points_;
};

// One compressor performance map. Speedlines are kept in strictly increasing
// speed order.
class CompressorMap {
public:
    CompressorMap() = default;
    CompressorMap(std::string id, std::string type_label, std::vector<Speedline> speedlines);

    const std::string& id() const noexcept { return id_; }
    const std::string& type_label() const noexcept { return type_label_; }
    const std::vector<Speedline>& speedlines() const noexcept { return speedlines_; }
    std::size_t size() const noexcept { return speedlines_.size(); }

    std::vector<double> speeds() const;

    // Index of the speedline whose speed matches within a relative tolerance,
    // or -1 when there is none.
    int find_speed(double speed, double rel_tol = 1e-6) const;

    // Copy of this map without the speedline at `index`.
    CompressorMap without(std::size_t index) const;

private:
    std::string id_;
    std::string type_label_;
    std::vector<Speedline> speedlines_;
};

// General conic a·x² + b·x·y + c·y² + d·x + e·y + f = 0, unit-norm with a > 0.
struct ConicCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 0.0;

    std::array<double, 6> to_array() const { return {a, b, c, d, e, f}; }

    double evaluate(double x, double y) const { return a * x * x + b * x * y + c * y * y + d * x + e * y + f; }
    double discriminant() const { return 4.0 * a * c - b * b; }
};

}  // namespace cpmfit
