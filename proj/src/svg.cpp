#include "pathway/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "pathway/errors.hpp"
#include "pathway/util.hpp"

namespace pathway {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string fmt(double v) {
    // two decimals is plenty for pixel coordinates
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string color_lerp(double t) {
    // dark blue -> white -> dark red
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        double u = t / 0.5;
        r = static_cast<int>(30 + u * (245 - 30));
        g = static_cast<int>(60 + u * (245 - 60));
        b = static_cast<int>(150 + u * (245 - 150));
    } else {
        double u = (t - 0.5) / 0.5;
        r = static_cast<int>(245 - u * (245 - 170));
        g = static_cast<int>(245 - u * (245 - 30));
        b = static_cast<int>(245 - u * (245 - 40));
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::ofstream open_svg(const std::filesystem::path& path, int w, int h) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write SVG: " + path.string());
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    f << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    return f;
}

void title_text(std::ofstream& f, int w, const std::string& title) {
    f << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
}

}  // namespace

void svg_heatmap(const std::filesystem::path& path,
                 const std::vector<std::vector<double>>& rows, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel) {
    std::size_t nr = rows.size();
    std::size_t nc = nr ? rows[0].size() : 0;
    const int margin = 30, cellmax = 14;
    int cw = std::max(1, std::min(cellmax, 900 / std::max<int>(1, static_cast<int>(nc))));
    int ch = std::max(1, std::min(cellmax, 500 / std::max<int>(1, static_cast<int>(nr))));
    int w = margin * 2 + cw * static_cast<int>(nc);
    int h = margin * 2 + ch * static_cast<int>(nr);

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : rows)
        for (double v : row)
            if (std::isfinite(v) && v >= 0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (!(hi > lo)) { lo = 0; hi = 1; }

    auto f = open_svg(path, w, h);
    title_text(f, w, title);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) {
            double v = rows[r][c];
            std::string fill =
                (std::isfinite(v) && v >= 0) ? color_lerp((v - lo) / (hi - lo)) : "#cccccc";
            f << "<rect x=\"" << margin + static_cast<int>(c) * cw << "\" y=\""
              << margin + static_cast<int>(r) * ch << "\" width=\"" << cw
              << "\" height=\"" << ch << "\" fill=\"" << fill << "\"/>\n";
        }
    if (!xlabel.empty())
        f << "<text x=\"" << w / 2 << "\" y=\"" << h - 8
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << xlabel << "</text>\n";
    if (!ylabel.empty())
        f << "<text x=\"12\" y=\"" << h / 2
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
             "transform=\"rotate(-90 12 " << h / 2 << ")\">" << ylabel << "</text>\n";
    f << "</svg>\n";
}

void svg_timeline(const std::filesystem::path& path,
                  const std::vector<std::vector<double>>& forced,
                  const std::vector<std::vector<double>>& baseline,
                  const std::vector<SigFlag>& flags, const std::string& title) {
    std::size_t nt = flags.size();
    const int margin = 40, w = 960, h = 320;
    double plot_w = w - 2.0 * margin, plot_h = h - 2.0 * margin;

    double lo = 0.0, hi = -std::numeric_limits<double>::infinity();
    for (const auto* arm : {&forced, &baseline})
        for (const auto& s : *arm)
            for (double v : s) hi = std::max(hi, v);
    if (!(hi > lo)) hi = 1.0;

    auto xpos = [&](std::size_t t) {
        return margin + plot_w * static_cast<double>(t) /
                            std::max<double>(1.0, static_cast<double>(nt - 1));
    };
    auto ypos = [&](double v) { return h - margin - plot_h * (v - lo) / (hi - lo); };

    auto f = open_svg(path, w, h);
    title_text(f, w, title);
    // significance shading behind the curves
    for (std::size_t t = 0; t < nt; ++t) {
        if (flags[t] == SigFlag::none) continue;
        const char* fill = flags[t] == SigFlag::increase ? "#ffcccc" : "#cce0ff";
        double x0 = t > 0 ? (xpos(t - 1) + xpos(t)) / 2 : margin;
        double x1 = t + 1 < nt ? (xpos(t) + xpos(t + 1)) / 2 : w - margin;
        f << "<rect x=\"" << fmt(x0) << "\" y=\"" << margin << "\" width=\""
          << fmt(x1 - x0) << "\" height=\"" << fmt(plot_h) << "\" fill=\"" << fill
          << "\"/>\n";
    }
    auto polyline = [&](const std::vector<double>& s, const char* color) {
        f << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1\" points=\"";
        for (std::size_t t = 0; t < s.size(); ++t)
            f << fmt(xpos(t)) << "," << fmt(ypos(s[t])) << " ";
        f << "\"/>\n";
    };
    for (const auto& s : baseline) polyline(s, "#3060c0");
    for (const auto& s : forced) polyline(s, "#c03030");
    f << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << fmt(plot_w)
      << "\" height=\"" << fmt(plot_h)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    f << "</svg>\n";
}

void svg_map(const std::filesystem::path& path, const std::vector<std::uint8_t>& active,
             std::size_t nrow, std::size_t ncol, const std::string& title,
             const std::vector<std::uint8_t>* footprint) {
    const int margin = 30, cell = std::max(2, 720 / std::max<int>(1, static_cast<int>(ncol)));
    int w = margin * 2 + cell * static_cast<int>(ncol);
    int h = margin * 2 + cell * static_cast<int>(nrow);
    auto f = open_svg(path, w, h);
    title_text(f, w, title);
    for (std::size_t r = 0; r < nrow; ++r)
        for (std::size_t c = 0; c < ncol; ++c) {
            std::size_t idx = r * ncol + c;
            // draw south-up flipped so higher latitudes sit on top
            int y = margin + static_cast<int>(nrow - 1 - r) * cell;
            const char* fill = active[idx] ? "#d03030" : "#f2f2f2";
            f << "<rect x=\"" << margin + static_cast<int>(c) * cell << "\" y=\"" << y
              << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill
              << "\"";
            if (footprint && (*footprint)[idx])
                f << " stroke=\"#208020\" stroke-width=\"1\"";
            f << "/>\n";
        }
    f << "</svg>\n";
}

}  // namespace pathway
