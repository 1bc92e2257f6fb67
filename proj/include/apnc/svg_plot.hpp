#pragma once

#include "apnc/ber_csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>

namespace apnc {

namespace detail {

/// Pretty-print a phase as a rational multiple of pi when one fits.
inline std::string phi_label(double phi) {
    if (phi == 0.0) return "0";
    for (int den : {1, 2, 3, 4, 6, 8, 12, 16}) {
        for (int num = 1; num < 2 * den; ++num) {
            if (std::abs(phi - num * std::numbers::pi / den) < 1e-9) {
                char buf[32];
                if (num == 1 && den == 1) return "pi";
                if (den == 1) {
                    std::snprintf(buf, sizeof buf, "%dpi", num);
                } else if (num == 1) {
                    std::snprintf(buf, sizeof buf, "pi/%d", den);
                } else {
                    std::snprintf(buf, sizeof buf, "%dpi/%d", num, den);
                }
                return buf;
            }
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", phi);
    return buf;
}

}  // namespace detail

/// Static log-scale BER vs Eb/N0 chart, one polyline per (scheme, delta, phi)
/// curve. Zero-BER points cannot be placed on a log axis and are skipped.
inline std::string render_ber_svg(std::span<const BerRecord> records,
                                  const std::string& title = "BER vs Eb/N0") {
    const auto curves = group_curves(records);

    double x_min = 1e300, x_max = -1e300, ber_min = 1.0;
    for (const BerRecord& r : records) {
        if (!std::isfinite(r.ebn0_db)) continue;
        x_min = std::min(x_min, r.ebn0_db);
        x_max = std::max(x_max, r.ebn0_db);
        if (r.ber > 0.0) ber_min = std::min(ber_min, r.ber);
    }
    if (x_max <= x_min) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    const int y_top_decade = 0;  // BER 1
    const int y_bot_decade = std::min(-1, int(std::floor(std::log10(std::max(ber_min, 1e-12)))));

    const double w = 720, h = 540;
    const double ml = 70, mr = 180, mt = 40, mb = 50;
    const double pw = w - ml - mr, ph = h - mt - mb;
    const auto sx = [&](double db) { return ml + (db - x_min) / (x_max - x_min) * pw; };
    const auto sy = [&](double log_ber) {
        return mt + (y_top_decade - log_ber) / double(y_top_decade - y_bot_decade) * ph;
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // gridlines: one per BER decade, x ticks every whole dB (thinned if dense)
    for (int d = y_top_decade; d >= y_bot_decade; --d) {
        const double y = sy(d);
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d
           << "</text>\n";
    }
    const int x_step = std::max(1, int(std::ceil((x_max - x_min) / 14.0)));
    for (int db = int(std::ceil(x_min)); db <= int(std::floor(x_max)); db += x_step) {
        const double x = sx(db);
        os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\"" << mt + ph
           << "\" stroke=\"#eeeeee\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << db
           << "</text>\n";
    }
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">Eb/N0 (dB)"
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">BER</text>\n";

    for (size_t ci = 0; ci < curves.size(); ++ci) {
        const char* color = palette[ci % (sizeof palette / sizeof palette[0])];
        std::ostringstream pts;
        int plotted = 0;
        for (const BerRecord& r : curves[ci]) {
            if (!(r.ber > 0.0) || !std::isfinite(r.ebn0_db)) continue;
            pts << sx(r.ebn0_db) << ',' << sy(std::log10(r.ber)) << ' ';
            ++plotted;
        }
        if (plotted > 0)
            os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.6\"/>\n";
        const BerRecord& f = curves[ci].front();
        const double ly = mt + 16 + 18 * double(ci);
        os << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw + 34
           << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        char label[96];
        std::snprintf(label, sizeof label, "%s d=%.3g phi=%s", to_string(f.scheme), f.delta,
                      detail::phi_label(f.phi).c_str());
        os << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace apnc
