#include "cpmfit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>

#include "cpmfit/dataio.hpp"
#include "cpmfit/errors.hpp"
#include "cpmfit/superellipse.hpp"

namespace cpmfit {

namespace {

using nlohmann::ordered_json;

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json beta_json(const BetaVector& b) {
    ordered_json j;
    const auto v = b.to_array();
    for (std::size_t k = 0; k < 5; ++k) j[kBetaFieldNames[k]] = number_or_null(v[k]);
    return j;
}

std::string csv_join(std::initializer_list<std::string> cells) {
    std::string out;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

ordered_json evaluation_json(const Evaluation& ev) {
    ordered_json j;
    j["mode"] = std::string(to_string(ev.mode));
    for (MetricKind k : {MetricKind::Rmse, MetricKind::Mape, MetricKind::ResidualSd, MetricKind::Ortho}) {
        const ErrorSummary& s = ev.get(k);
        j[std::string(to_string(k))] = {{"value", number_or_null(s.value)},
                                        {"mean", number_or_null(s.mean)},
                                        {"sd", number_or_null(s.sd)},
                                        {"n_valid", s.n_valid},
                                        {"n_skipped", s.n_skipped},
                                        {"has_nonfinite", s.has_nonfinite}};
    }
    j["max_abs_error"] = number_or_null(ev.max_abs_error);
    j["n_out_of_domain"] = ev.n_out_of_domain;
    return j;
}

}  // namespace

ReportFormat parse_format(std::string_view text) {
    if (text == "csv") return ReportFormat::Csv;
    if (text == "json") return ReportFormat::Json;
    throw DomainError("unknown report format '" + std::string(text) + "'");
}

std::string report_flags(const PredictionReport& r) {
    std::string out;
    const auto add = [&](const std::string& token) {
        if (!out.empty()) out += ' ';
        out += token;
    };
    if (r.repairs.cur_clamped) add("cur_clamped");
    if (r.repairs.nonneg_clamped > 0) add("nonneg_clamped=" + std::to_string(r.repairs.nonneg_clamped));
    if (r.degree_reduced) add("degree_reduced=" + std::to_string(r.effective_degree));
    if (r.failed_fits > 0) add("failed_fits=" + std::to_string(r.failed_fits));
    if (const Evaluation* ev = r.evaluation()) {
        if (ev->n_out_of_domain > 0) add("out_of_domain=" + std::to_string(ev->n_out_of_domain));
        if (ev->mape.n_skipped > 0) add("mape_skipped=" + std::to_string(ev->mape.n_skipped));
        if (ev->rmse.has_nonfinite || ev->ortho.has_nonfinite) add("nonfinite");
    }
    return out;
}

std::string export_report(std::span<const PredictionReport> reports, ReportFormat format) {
    if (format == ReportFormat::Json) {
        ordered_json arr = ordered_json::array();
        for (const auto& r : reports) {
            const Evaluation* ev = r.evaluation();
            const auto metric = [&](MetricKind k, bool sd) {
                if (!ev) return ordered_json(nullptr);
                const ErrorSummary& s = ev->get(k);
                return number_or_null(sd ? s.sd : s.value);
            };
            ordered_json j;
            j["index"] = r.index;
            j["speed"] = r.target_speed;
            j["kind"] = std::string(to_string(r.kind));
            j["rmse"] = metric(MetricKind::Rmse, false);
            j["rmse_sd"] = metric(MetricKind::Rmse, true);
            j["mape"] = metric(MetricKind::Mape, false);
            j["mape_sd"] = metric(MetricKind::Mape, true);
            j["ortho"] = metric(MetricKind::Ortho, false);
            j["ortho_sd"] = metric(MetricKind::Ortho, true);
            j["status"] = std::string(to_string(r.status));
            j["flags"] = report_flags(r);
            j["failure"] = r.failure;
            j["eval_mode"] = std::string(to_string(r.eval_mode));
            j["effective_degree"] = r.effective_degree;
            j["predicted_beta"] = r.predicted_beta ? beta_json(*r.predicted_beta) : ordered_json(nullptr);
            j["raw_beta"] = r.raw_beta ? beta_json(*r.raw_beta) : ordered_json(nullptr);
            j["pressure"] = r.pressure ? evaluation_json(*r.pressure) : ordered_json(nullptr);
            j["massflow"] = r.massflow ? evaluation_json(*r.massflow) : ordered_json(nullptr);
            arr.push_back(std::move(j));
        }
        return arr.dump(2) + "\n";
    }

    std::string out(kReportColumns);
    out += '\n';
    for (const auto& r : reports) {
        const Evaluation* ev = r.evaluation();
        const auto cell = [&](MetricKind k, bool sd) {
            if (!ev) return std::string();
            const ErrorSummary& s = ev->get(k);
            return format_number(sd ? s.sd : s.value);
        };
        out += csv_join({std::to_string(r.index), format_number(r.target_speed), std::string(to_string(r.kind)),
                         cell(MetricKind::Rmse, false), cell(MetricKind::Rmse, true), cell(MetricKind::Mape, false),
                         cell(MetricKind::Mape, true), cell(MetricKind::Ortho, false), cell(MetricKind::Ortho, true),
                         std::string(to_string(r.status)), report_flags(r)});
        out += '\n';
    }
    return out;
}

std::string export_summary(std::span<const KindSummary> summary, ReportFormat format) {
    constexpr std::array<MetricKind, 4> kinds = {MetricKind::Rmse, MetricKind::Mape, MetricKind::ResidualSd,
                                                 MetricKind::Ortho};
    if (format == ReportFormat::Json) {
        ordered_json arr = ordered_json::array();
        for (const auto& s : summary) {
            ordered_json j;
            j["kind"] = std::string(to_string(s.kind));
            j["total"] = s.total;
            j["ok"] = s.ok;
            j["failed"] = s.failed;
            for (MetricKind k : kinds) {
                const MetricAggregate& a = s.get(k);
                j[std::string(to_string(k))] = {{"n", a.n},
                                                {"mean", number_or_null(a.mean)},
                                                {"sd", number_or_null(a.sd)},
                                                {"median", number_or_null(a.median)}};
            }
            arr.push_back(std::move(j));
        }
        return arr.dump(2) + "\n";
    }
    std::string out = "kind,total,ok,failed";
    for (MetricKind k : kinds) {
        const std::string name(to_string(k));
        out += "," + name + "_n," + name + "_mean," + name + "_sd," + name + "_median";
    }
    out += '\n';
    for (const auto& s : summary) {
        out += std::string(to_string(s.kind)) + ',' + std::to_string(s.total) + ',' + std::to_string(s.ok) + ',' +
               std::to_string(s.failed);
        for (MetricKind k : kinds) {
            const MetricAggregate& a = s.get(k);
            out += ',' + std::to_string(a.n) + ',' + format_number(a.mean) + ',' + format_number(a.sd) + ',' +
                   format_number(a.median);
        }
        out += '\n';
    }
    return out;
}

std::string export_fit_table(std::span<const LineFit> fits, ReportFormat format) {
    if (format == ReportFormat::Json) {
        ordered_json arr = ordered_json::array();
        for (const auto& lf : fits) {
            ordered_json j;
            j["speed"] = lf.speed;
            j["status"] = lf.ok() ? "OK" : "FAILED";
            if (lf.ok()) {
                const FitResult& r = *lf.result;
                j["beta"] = beta_json(r.beta);
                j["objective"] = number_or_null(r.objective);
                j["metric"] = std::string(to_string(r.metric));
                j["used_fallback"] = r.used_fallback;
                j["under_determined"] = r.under_determined;
                j["seed"] = r.seed;
                j["evaluations"] = r.evaluations;
                ordered_json stages = ordered_json::array();
                for (const auto& st : r.stage_trace) {
                    stages.push_back({{"stage", st.stage}, {"objective", number_or_null(st.objective)}});
                }
                j["stage_trace"] = std::move(stages);
            } else {
                j["error"] = lf.error;
            }
            arr.push_back(std::move(j));
        }
        return arr.dump(2) + "\n";
    }
    std::string out =
        "speed,status,m_zs,pi_zs,m_ch,pi_ch,cur,objective,metric,used_fallback,under_determined,seed,stages,error\n";
    for (const auto& lf : fits) {
        if (lf.ok()) {
            const FitResult& r = *lf.result;
            std::string stages;
            for (const auto& st : r.stage_trace) {
                if (!stages.empty()) stages += ' ';
                stages += st.stage + '=' + format_number(st.objective);
            }
            out += csv_join({format_number(lf.speed), "OK", format_number(r.beta.m_zs), format_number(r.beta.pi_zs),
                             format_number(r.beta.m_ch), format_number(r.beta.pi_ch), format_number(r.beta.cur),
                             format_number(r.objective), std::string(to_string(r.metric)),
                             r.used_fallback ? "1" : "0", r.under_determined ? "1" : "0", std::to_string(r.seed),
                             stages, ""});
        } else {
            std::string err = lf.error;
            std::replace(err.begin(), err.end(), ',', ';');
            out += csv_join({format_number(lf.speed), "FAILED", "", "", "", "", "", "", "", "", "", "", "", err});
        }
        out += '\n';
    }
    return out;
}

std::string export_beta_table(std::span<const LineFit> fits) {
    std::string out = "speed,m_zs,pi_zs,m_ch,pi_ch,cur\n";
    for (const auto& lf : fits) {
        if (!lf.ok()) continue;
        const BetaVector& b = lf.result->beta;
        out += csv_join({format_number(lf.speed), format_number(b.m_zs), format_number(b.pi_zs), format_number(b.m_ch),
                         format_number(b.pi_ch), format_number(b.cur)});
        out += '\n';
    }
    return out;
}

std::string export_beta_evolution(const BetaTable& table, const PolyModel& model, std::size_t samples) {
    std::string out = "series,speed,m_zs,pi_zs,m_ch,pi_ch,cur\n";
    const auto row = [&](const char* series, double speed, const BetaVector& b) {
        out += csv_join({series, format_number(speed), format_number(b.m_zs), format_number(b.pi_zs),
                         format_number(b.m_ch), format_number(b.pi_ch), format_number(b.cur)});
        out += '\n';
    };
    for (const auto& e : table.entries()) row("fitted", e.speed, e.beta);
    if (table.size() == 0 || samples < 2) return out;
    const double lo = table.entries().front().speed;
    const double hi = table.entries().back().speed;
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        row("polynomial", s, model.evaluate(s));
    }
    return out;
}

std::string export_curve_svg(std::span<const Speedline> measured,
                             std::span<const std::pair<double, BetaVector>> predicted, std::string_view title) {
    constexpr double kWidth = 800.0;
    constexpr double kHeight = 600.0;
    constexpr double kPad = 60.0;
    constexpr std::size_t kCurveSamples = 200;
    static constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::vector<std::vector<OperatingPoint>> curves;
    for (const auto& [speed, beta] : predicted) {
        try {
            curves.push_back(sample_curve(beta, kCurveSamples));
        } catch (const Error&) {
            curves.emplace_back();
        }
    }

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    const auto extend = [&](const OperatingPoint& p) {
        x_lo = std::min(x_lo, p.m_dot);
        x_hi = std::max(x_hi, p.m_dot);
        y_lo = std::min(y_lo, p.pi);
        y_hi = std::max(y_hi, p.pi);
    };
    for (const auto& line : measured) {
        for (const auto& p : line.points()) extend(p);
    }
    for (const auto& c : curves) {
        for (const auto& p : c) extend(p);
    }
    if (!(x_hi >= x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    if (x_hi == x_lo) x_lo -= 0.5, x_hi += 0.5;
    if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
    const double mx = 0.05 * (x_hi - x_lo);
    const double my = 0.05 * (y_hi - y_lo);
    x_lo -= mx, x_hi += mx, y_lo -= my, y_hi += my;

    const auto px = [&](double x) { return kPad + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kPad); };
    const auto py = [&](double y) { return kHeight - kPad - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kPad); };
    const auto coords = [&](const std::vector<OperatingPoint>& pts) {
        std::string s;
        for (const auto& p : pts) {
            if (!s.empty()) s += ' ';
            s += fixed(px(p.m_dot)) + ',' + fixed(py(p.pi));
        }
        return s;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    if (!title.empty()) {
        svg += "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">";
        for (char ch : title) {
            if (ch == '<') svg += "&lt;";
            else if (ch == '>') svg += "&gt;";
            else if (ch == '&') svg += "&amp;";
            else svg += ch;
        }
        svg += "</text>\n";
    }
    // Axes with five ticks each.
    svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fixed(kPad) + "\" y1=\"" + fixed(kHeight - kPad) + "\" x2=\"" + fixed(kWidth - kPad) +
           "\" y2=\"" + fixed(kHeight - kPad) + "\"/>\n";
    svg += "<line x1=\"" + fixed(kPad) + "\" y1=\"" + fixed(kPad) + "\" x2=\"" + fixed(kPad) + "\" y2=\"" +
           fixed(kHeight - kPad) + "\"/>\n";
    svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
        const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
        svg += "<text x=\"" + fixed(px(xv)) + "\" y=\"" + fixed(kHeight - kPad + 16) + "\" text-anchor=\"middle\">" +
               fixed(xv, 3) + "</text>\n";
        svg += "<text x=\"" + fixed(kPad - 6) + "\" y=\"" + fixed(py(yv) + 4) + "\" text-anchor=\"end\">" +
               fixed(yv, 3) + "</text>\n";
    }
    svg += "<text x=\"400\" y=\"" + fixed(kHeight - 15) + "\" text-anchor=\"middle\">mass flow</text>\n";
    svg += "<text x=\"15\" y=\"300\" text-anchor=\"middle\" transform=\"rotate(-90 15 300)\">pressure ratio</text>\n";
    svg += "</g>\n";

    for (std::size_t i = 0; i < measured.size(); ++i) {
        const char* color = kPalette[i % kPalette.size()];
        const auto& pts = measured[i].points();
        svg += "<g class=\"measured\" data-speed=\"" + format_number(measured[i].speed()) + "\">\n";
        svg += std::string("<polyline fill=\"none\" stroke=\"") + color + "\" stroke-width=\"1.5\" points=\"" +
               coords(pts) + "\"/>\n";
        for (const auto& p : pts) {
            svg += std::string("<circle cx=\"") + fixed(px(p.m_dot)) + "\" cy=\"" + fixed(py(p.pi)) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        svg += "</g>\n";
    }
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (curves[i].empty()) continue;
        const char* color = kPalette[(measured.size() + i) % kPalette.size()];
        std::string d;
        for (std::size_t k = 0; k < curves[i].size(); ++k) {
            d += (k == 0 ? "M" : " L") + fixed(px(curves[i][k].m_dot)) + ',' + fixed(py(curves[i][k].pi));
        }
        svg += "<path class=\"predicted\" data-speed=\"" + format_number(predicted[i].first) +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" d=\"" + d +
               "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace cpmfit
