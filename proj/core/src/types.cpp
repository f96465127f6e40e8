#include "cpmfit/types.hpp"

#include <algorithm>
#include <cmath>

#include "cpmfit/errors.hpp"

namespace cpmfit {

bool BetaVector::is_valid(double min_cur) const {
    for (double v : to_array()) {
        if (!std::isfinite(v)) return false;
    }
    return m_ch > m_zs && pi_zs > pi_ch && cur >= min_cur;
}

DuplicateAbscissaError::DuplicateAbscissaError(double speed, double m_dot)
    : Error("duplicate mass flow " + std::to_string(m_dot) + " in speedline " + std::to_string(speed)),
      speed_(speed),
      m_dot_(m_dot) {}

Speedline::Speedline(double speed, std::vector<OperatingPoint> points) : speed_(speed), points_(std::move(points)) {
    if (!std::isfinite(speed_)) throw DomainError("speedline speed must be finite");
    for (const auto& p : points_) {
        if (!std::isfinite(p.m_dot) || !std::isfinite(p.pi)) {
            throw DomainError("non-finite operating point in speedline " + std::to_string(speed_));
        }
    }
    std::sort(points_.begin(), points_.end(),
              [](const OperatingPoint& l, const OperatingPoint& r) { return l.m_dot < r.m_dot; });
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].m_dot == points_[i - 1].m_dot) throw DuplicateAbscissaError(speed_, points_[i].m_dot);
    }
}

CompressorMap::CompressorMap(std::string id, std::string type_label, std::vector<Speedline> speedlines)
    : id_(std::move(id)), type_label_(std::move(type_label)), speedlines_(std::move(speedlines)) {
    if (speedlines_.empty()) throw EmptyInputError("compressor map needs at least one speedline");
    for (std::size_t i = 1; i < speedlines_.size(); ++i) {
        if (!(speedlines_[i].speed() > speedlines_[i - 1].speed())) {
            throw DomainError("speedline speeds must be strictly increasing");
        }
    }
}

std::vector<double> CompressorMap::speeds() const {
    std::vector<double> out;
    out.reserve(speedlines_.size());
    for (const auto& line : speedlines_) out.push_back(line.speed());
    return out;
}

int CompressorMap::find_speed(double speed, double rel_tol) const {
    for (std::size_t i = 0; i < speedlines_.size(); ++i) {
        const double s = speedlines_[i].speed();
        const double scale = std::max({std::abs(s), std::abs(speed), 1.0});
        if (std::abs(s - speed) <= rel_tol * scale) return static_cast<int>(i);
    }
    return -1;
}

CompressorMap CompressorMap::without(std::size_t index) const {
    std::vector<Speedline> rest;
    rest.reserve(speedlines_.size());
    for (std::size_t i = 0; i < speedlines_.size(); ++i) {
        if (i != index) rest.push_back(speedlines_[i]);
    }
    return CompressorMap(id_, type_label_, std::move(rest));
}

}  // namespace cpmfit
