#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "recov/common.hpp"
#include "recov/ddi.hpp"
#include "recov/pitch_control.hpp"

namespace recov::plot {

namespace detail {

// diverging blue-white-red map over [0,1]
inline std::string heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    int r, g, b;
    if (v < 0.5) {
        const double t = v * 2.0;
        r = static_cast<int>(49 + t * (255 - 49));
        g = static_cast<int>(84 + t * (255 - 84));
        b = static_cast<int>(175 + t * (255 - 175));
    } else {
        const double t = (v - 0.5) * 2.0;
        r = static_cast<int>(255 - t * (255 - 180));
        g = static_cast<int>(255 - t * (255 - 30));
        b = static_cast<int>(255 - t * (255 - 40));
    }
    return strfmt("rgb(%d,%d,%d)", r, g, b);
}

inline void open_pitch_svg(std::string& svg, double scale = 8.0) {
    svg += strfmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  kPitchLength * scale, kPitchWidth * scale, kPitchLength, kPitchWidth);
}

inline void pitch_lines(std::string& svg) {
    svg += strfmt("<rect x=\"0\" y=\"0\" width=\"%g\" height=\"%g\" fill=\"none\" "
                  "stroke=\"black\" stroke-width=\"0.4\"/>\n",
                  kPitchLength, kPitchWidth);
    svg += strfmt("<line x1=\"%g\" y1=\"0\" x2=\"%g\" y2=\"%g\" stroke=\"black\" "
                  "stroke-width=\"0.25\"/>\n",
                  kPitchLength / 2, kPitchLength / 2, kPitchWidth);
    svg += strfmt("<circle cx=\"%g\" cy=\"%g\" r=\"9.15\" fill=\"none\" stroke=\"black\" "
                  "stroke-width=\"0.25\"/>\n",
                  kPitchLength / 2, kPitchWidth / 2);
}

// internal y up -> svg y down
inline double fy(double y) { return kPitchWidth - y; }

}  // namespace detail

// Control surface as a colored grid; cells outside the visible area stay
// blank. The ball is a black dot.
inline void write_surface_svg(const pc::PitchControlSurface& s, const std::string& path) {
    std::string svg;
    detail::open_pitch_svg(svg);
    const double cw = s.grid.cell_w(), ch = s.grid.cell_h();
    for (int r = 0; r < s.grid.rows; ++r) {
        for (int c = 0; c < s.grid.cols; ++c) {
            const int idx = s.grid.index(r, c);
            if (!s.visible_mask[idx]) continue;
            const Vec2 center = s.grid.center(r, c);
            svg += strfmt("<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" "
                          "fill=\"%s\"/>\n",
                          center.x - cw / 2, detail::fy(center.y) - ch / 2, cw, ch,
                          detail::heat_color(s.att_control[idx]).c_str());
        }
    }
    detail::pitch_lines(svg);
    svg += strfmt("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"0.9\" fill=\"black\"/>\n", s.ball.x,
                  detail::fy(s.ball.y));
    svg += "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << svg;
}

// Fixed-precision numeric dump of a surface: header, then one row of the
// grid per line, row-major.
inline void write_surface_sidecar(const pc::PitchControlSurface& s, int match_id,
                                  const std::string& event_uuid, uint64_t params_hash,
                                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "recov-surface v1\n";
    out << "match_id " << match_id << "\n";
    out << "event_uuid " << event_uuid << "\n";
    out << "grid " << s.grid.rows << " " << s.grid.cols << "\n";
    out << "params_hash " << hex64(params_hash) << "\n";
    out << "ball " << strfmt("%.6f %.6f", s.ball.x, s.ball.y) << "\n";
    for (int r = 0; r < s.grid.rows; ++r) {
        for (int c = 0; c < s.grid.cols; ++c)
            out << (c ? " " : "") << strfmt("%.6f", s.att_control[s.grid.index(r, c)]);
        out << "\n";
    }
    out << "mask\n";
    for (int r = 0; r < s.grid.rows; ++r) {
        for (int c = 0; c < s.grid.cols; ++c)
            out << (c ? " " : "") << int(s.visible_mask[s.grid.index(r, c)]);
        out << "\n";
    }
}

// Both probability series and their difference over an action range.
inline void write_timeline_svg(const std::vector<ddi::DdiRecord>& records,
                               const std::string& path) {
    const double w = 900, h = 420, ml = 60, mr = 20, mt = 20, mb = 50;
    const double lo = -0.3, hi = 1.0;
    std::string svg = strfmt(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", w, h);
    auto X = [&](size_t i) {
        const size_t n = std::max<size_t>(records.size(), 2);
        return ml + (w - ml - mr) * static_cast<double>(i) / (n - 1);
    };
    auto Y = [&](double v) { return mt + (h - mt - mb) * (hi - v) / (hi - lo); };
    for (double gridline : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg += strfmt("<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#cccccc\" "
                      "stroke-width=\"1\"/>\n",
                      ml, Y(gridline), w - mr, Y(gridline));
        svg += strfmt("<text x=\"%g\" y=\"%.2f\" font-size=\"12\">%.2f</text>\n", 8.0,
                      Y(gridline) + 4, gridline);
    }
    auto series = [&](auto get, const char* color) {
        std::string pts;
        for (size_t i = 0; i < records.size(); ++i)
            pts += strfmt("%.2f,%.2f ", X(i), Y(get(records[i])));
        svg += strfmt("<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" "
                      "stroke-width=\"2\"/>\n",
                      pts.c_str(), color);
    };
    series([](const ddi::DdiRecord& r) { return r.p_a; }, "#1f77b4");
    series([](const ddi::DdiRecord& r) { return r.p_at; }, "#d62728");
    series([](const ddi::DdiRecord& r) { return r.ddi; }, "#2ca02c");
    svg += strfmt("<text x=\"%g\" y=\"%g\" font-size=\"13\" fill=\"#1f77b4\">action-only</text>"
                  "<text x=\"%g\" y=\"%g\" font-size=\"13\" fill=\"#d62728\">with tracking"
                  "</text><text x=\"%g\" y=\"%g\" font-size=\"13\" fill=\"#2ca02c\">difference"
                  "</text>\n",
                  ml, h - 14.0, ml + 110.0, h - 14.0, ml + 240.0, h - 14.0);
    svg += "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << svg;
}

inline void write_timeline_sidecar(const std::vector<ddi::DdiRecord>& records,
                                   const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "#recov-timeline v1\n#columns match_id anchor_seq p_a p_at ddi\n";
    for (const auto& r : records)
        out << r.match_id << '\t' << r.anchor_seq << '\t' << fmt_shortest(r.p_a) << '\t'
            << fmt_shortest(r.p_at) << '\t' << fmt_shortest(r.ddi) << '\n';
}

// Zone means on the pitch, defending team attacking rightward (annotated).
inline void write_zone_svg(const std::vector<ddi::ZoneStat>& stats, const ddi::ZoneGrid& grid,
                           const std::string& path) {
    double max_abs = 1e-9;
    for (const auto& z : stats) max_abs = std::max(max_abs, std::fabs(z.mean_ddi));
    std::string svg;
    detail::open_pitch_svg(svg);
    const double zw = kPitchLength / grid.cols, zh = kPitchWidth / grid.rows;
    for (const auto& z : stats) {
        const double v = 0.5 + 0.5 * z.mean_ddi / max_abs;
        const double x = z.col * zw, y_top = detail::fy((z.row + 1) * zh);
        svg += strfmt("<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\" "
                      "stroke=\"black\" stroke-width=\"0.15\"/>\n",
                      x, y_top, zw, zh, detail::heat_color(v).c_str());
        svg += strfmt("<text x=\"%.3f\" y=\"%.3f\" font-size=\"2.4\" "
                      "text-anchor=\"middle\">%.4f</text>\n",
                      x + zw / 2, y_top + zh / 2, z.mean_ddi);
    }
    detail::pitch_lines(svg);
    // attacking-right arrow
    svg += strfmt("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\" "
                  "stroke-width=\"0.6\"/><path d=\"M %g %g L %g %g L %g %g Z\" "
                  "fill=\"black\"/>\n",
                  40.0, kPitchWidth - 2.5, 62.0, kPitchWidth - 2.5, 65.0, kPitchWidth - 2.5,
                  62.0, kPitchWidth - 1.3, 62.0, kPitchWidth - 3.7);
    svg += "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << svg;
}

inline void write_zone_sidecar(const std::vector<ddi::ZoneStat>& stats,
                               const ddi::ZoneGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "#recov-zones v1\n";
    out << "#grid " << grid.cols << "x" << grid.rows << " attacking-right\n";
    out << "#columns col row mean_ddi n\n";
    for (const auto& z : stats)
        out << z.col << '\t' << z.row << '\t' << fmt_shortest(z.mean_ddi) << '\t' << z.n << '\n';
}

}  // namespace recov::plot
