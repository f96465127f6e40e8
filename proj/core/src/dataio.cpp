#include "cpmfit/dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "cpmfit/errors.hpp"

namespace cpmfit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, std::size_t line, const char* name) {
    field = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(line, std::string("malformed ") + name + " value '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite ") + name + " value");
    return v;
}

}  // namespace

std::vector<RawRecord> parse_map_csv(std::string_view text) {
    std::vector<RawRecord> out;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw MissingHeaderError(line_no, "expected header '" + std::string(kCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }

        std::array<std::string_view, 3> fields;
        std::size_t count = 0;
        std::string_view rest = line;
        while (true) {
            const std::size_t comma = rest.find(',');
            if (count == fields.size()) throw ParseError(line_no, "expected 3 fields");
            fields[count++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (count != 3) throw ParseError(line_no, "expected 3 fields");

        RawRecord r{parse_field(fields[0], line_no, "speed"), parse_field(fields[1], line_no, "m_dot"),
                    parse_field(fields[2], line_no, "pi")};
        if (!(r.pi > 0.0)) throw ParseError(line_no, "pressure ratio must be positive");
        out.push_back(r);
    }
    if (!header_seen) throw MissingHeaderError(line_no, "missing header '" + std::string(kCsvHeader) + "'");
    return out;
}

CompressorMap group_speedlines(std::span<const RawRecord> records, double rel_tol, std::string id,
                               std::string type_label) {
    if (records.empty()) throw EmptyInputError("no records to group");
    std::vector<RawRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(), [](const RawRecord& a, const RawRecord& b) {
        if (a.speed != b.speed) return a.speed < b.speed;
        if (a.m_dot != b.m_dot) return a.m_dot < b.m_dot;
        return a.pi < b.pi;
    });

    std::vector<Speedline> lines;
    std::size_t begin = 0;
    while (begin < sorted.size()) {
        const double first = sorted[begin].speed;
        std::size_t end = begin + 1;
        while (end < sorted.size() &&
               sorted[end].speed - first <= rel_tol * std::max(std::abs(first), std::abs(sorted[end].speed))) {
            ++end;
        }
        double speed_sum = 0.0;
        std::vector<OperatingPoint> pts;
        for (std::size_t i = begin; i < end; ++i) {
            speed_sum += sorted[i].speed;
            pts.push_back({sorted[i].m_dot, sorted[i].pi});
        }
        lines.emplace_back(speed_sum / static_cast<double>(end - begin), std::move(pts));
        begin = end;
    }
    return CompressorMap(std::move(id), std::move(type_label), std::move(lines));
}

OperatingPoint ScaleRecord::normalize(const OperatingPoint& p) const {
    return {(p.m_dot - m_min) / (m_max - m_min), (p.pi - pi_min) / (pi_max - pi_min)};
}

OperatingPoint ScaleRecord::denormalize(const OperatingPoint& p) const {
    return {m_min + p.m_dot * (m_max - m_min), pi_min + p.pi * (pi_max - pi_min)};
}

std::pair<CompressorMap, ScaleRecord> normalize_map(const CompressorMap& map) {
    ScaleRecord s;
    bool first = true;
    for (const auto& line : map.speedlines()) {
        for (const auto& p : line.points()) {
            if (first) {
                s = {p.m_dot, p.m_dot, p.pi, p.pi};
                first = false;
            }
            s.m_min = std::min(s.m_min, p.m_dot);
            s.m_max = std::max(s.m_max, p.m_dot);
            s.pi_min = std::min(s.pi_min, p.pi);
            s.pi_max = std::max(s.pi_max, p.pi);
        }
    }
    if (first) throw EmptyInputError("map has no points");
    if (!(s.m_max > s.m_min) || !(s.pi_max > s.pi_min)) throw DegenerateSpanError("map has a zero coordinate range");

    std::vector<Speedline> lines;
    for (const auto& line : map.speedlines()) {
        std::vector<OperatingPoint> pts;
        for (const auto& p : line.points()) {
            OperatingPoint q = s.normalize(p);
            // Extremes land exactly on 0 and 1.
            if (p.m_dot == s.m_min) q.m_dot = 0.0;
            if (p.m_dot == s.m_max) q.m_dot = 1.0;
            if (p.pi == s.pi_min) q.pi = 0.0;
            if (p.pi == s.pi_max) q.pi = 1.0;
            pts.push_back(q);
        }
        lines.emplace_back(line.speed(), std::move(pts));
    }
    return {CompressorMap(map.id(), map.type_label(), std::move(lines)), s};
}

CompressorMap denormalize_map(const CompressorMap& map, const ScaleRecord& scale) {
    std::vector<Speedline> lines;
    for (const auto& line : map.speedlines()) {
        std::vector<OperatingPoint> pts;
        for (const auto& p : line.points()) pts.push_back(scale.denormalize(p));
        lines.emplace_back(line.speed(), std::move(pts));
    }
    return CompressorMap(map.id(), map.type_label(), std::move(lines));
}

std::vector<RawRecord> flatten(const CompressorMap& map) {
    std::vector<RawRecord> out;
    for (const auto& line : map.speedlines()) {
        for (const auto& p : line.points()) out.push_back({line.speed(), p.m_dot, p.pi});
    }
    return out;
}

std::string write_map_csv(const CompressorMap& map) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : flatten(map)) {
        out += format_number(r.speed) + ',' + format_number(r.m_dot) + ',' + format_number(r.pi) + '\n';
    }
    return out;
}

std::string format_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string();
}

}  // namespace cpmfit
