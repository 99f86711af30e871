#include "psynth/plot.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace psynth {

namespace {

constexpr int kPanelW = 340;
constexpr int kPanelH = 260;
constexpr int kColumns = 4;
constexpr int kMarginL = 48;
constexpr int kMarginR = 12;
constexpr int kMarginT = 30;
constexpr int kMarginB = 58;
constexpr int kLegendH = 34;
constexpr const char* kGrey = "#a0a0a0";
constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                    "#66a61e", "#e6ab02", "#a6761d", "#666666"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out.push_back(c);
        }
    }
    return out;
}

struct Frame {
    double x0, y0, w, h, y_max;
    std::size_t groups;

    double x(std::size_t g) const {
        return groups > 1 ? x0 + w * static_cast<double>(g) / static_cast<double>(groups - 1)
                          : x0 + w / 2;
    }
    double y(double share) const { return y0 + h - h * share / y_max; }
};

void draw_lines(std::string& svg, const Frame& f, const GroupedDistribution& dist,
                std::size_t responses, bool grey) {
    for (std::size_t r = 0; r < responses; ++r) {
        std::string points;
        for (const auto& row : dist.groups) {
            points += fmt::format("{:.2f},{:.2f} ", f.x(row.category), f.y(row.shares[r]));
        }
        if (!points.empty()) {
            points.pop_back();
        }
        const char* color = grey ? kGrey : kPalette[r % std::size(kPalette)];
        svg += fmt::format(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{} points=\"{}\"/>\n", color,
            grey ? "1.2" : "1.8", grey ? " stroke-dasharray=\"4 2\"" : "", points);
    }
}

void draw_panel(std::string& svg, int index, const std::string& title, const AttributeSchema& schema,
                const Question& question, const GroupedDistribution& real,
                const GroupedDistribution* synth, double y_max) {
    const int col = index % kColumns;
    const int row = index / kColumns;
    const double ox = col * kPanelW;
    const double oy = row * kPanelH;
    const auto& attr = schema.attribute(real.group_index);
    const Frame f{ox + kMarginL, oy + kMarginT, kPanelW - kMarginL - kMarginR,
                  kPanelH - kMarginT - kMarginB, y_max, attr.size()};

    svg += fmt::format("<g id=\"panel-{}\">\n", index);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">"
                       "({}) {}</text>\n",
                       ox + kPanelW / 2.0, oy + 18.0, static_cast<char>('a' + index),
                       xml_escape(title));
    svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                       "fill=\"none\" stroke=\"#333\" stroke-width=\"0.8\"/>\n",
                       f.x0, f.y0, f.w, f.h);
    for (int t = 0; t <= 4; ++t) {
        const double share = y_max * t / 4.0;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"9\" text-anchor=\"end\">"
                           "{:.0f}%</text>\n",
                           f.x0 - 4, f.y(share) + 3, share * 100.0);
    }
    for (std::size_t g = 0; g < attr.size(); ++g) {
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"8\" text-anchor=\"end\" "
                           "transform=\"rotate(-45 {:.2f} {:.2f})\">{}</text>\n",
                           f.x(g), f.y0 + f.h + 12, f.x(g), f.y0 + f.h + 12,
                           xml_escape(attr.categories[g]));
    }
    draw_lines(svg, f, real, question.size(), synth != nullptr);
    if (synth != nullptr) {
        draw_lines(svg, f, *synth, question.size(), false);
    }
    svg += "</g>\n";
}

} // namespace

std::string render_comparison_svg(const AttributeSchema& schema, const Question& question,
                                  const GroupedDistribution& real,
                                  const std::vector<PlotPanel>& panels) {
    double top = 0.0;
    auto scan = [&](const GroupedDistribution& d) {
        for (const auto& row : d.groups) {
            for (double s : row.shares) {
                top = std::max(top, s);
            }
        }
    };
    scan(real);
    for (const auto& p : panels) {
        scan(p.synth);
    }
    const double y_max = std::max(0.1, std::ceil(top * 10.0) / 10.0);

    const int count = static_cast<int>(panels.size()) + 1;
    const int cols = std::min(count, kColumns);
    const int rows = (count + kColumns - 1) / kColumns;
    const int width = cols * kPanelW;
    const int height = rows * kPanelH + kLegendH;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n",
        width, height);
    svg += fmt::format("<title>{} by {}</title>\n", xml_escape(question.text),
                       xml_escape(schema.attribute(real.group_index).name));
    svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);

    draw_panel(svg, 0, "Real Survey", schema, question, real, nullptr, y_max);
    for (std::size_t i = 0; i < panels.size(); ++i) {
        draw_panel(svg, static_cast<int>(i) + 1, panels[i].title, schema, question, real,
                   &panels[i].synth, y_max);
    }

    // Legend: one swatch per response option, plus the grey benchmark overlay.
    double lx = 10.0;
    const double ly = rows * kPanelH + 20.0;
    for (std::size_t r = 0; r < question.size(); ++r) {
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                           "stroke=\"{}\" stroke-width=\"2\"/>\n",
                           lx, ly, lx + 18, ly, kPalette[r % std::size(kPalette)]);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">{}</text>\n", lx + 22,
                           ly + 3, xml_escape(question.responses[r]));
        lx += 30.0 + 6.0 * static_cast<double>(question.responses[r].size());
    }
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                       "stroke=\"{}\" stroke-width=\"1.2\" stroke-dasharray=\"4 2\"/>\n",
                       lx, ly, lx + 18, ly, kGrey);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">Real survey</text>\n",
                       lx + 22, ly + 3);
    svg += "</svg>\n";
    return svg;
}

} // namespace psynth
