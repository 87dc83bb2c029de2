#include "conewave/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace conewave {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

const char* kSheetColor[2] = {"#1f77b4", "#d62728"};

}  // namespace

SvgCanvas::SvgCanvas(double xmin, double ymin, double xmax, double ymax, int width_px)
    : xmin_(xmin), ymin_(ymin), xmax_(xmax), ymax_(ymax), wpx_(width_px) {
    if (!(xmax > xmin) || !(ymax > ymin)) throw std::invalid_argument("empty canvas extents");
    hpx_ = static_cast<int>(std::lround(width_px * (ymax - ymin) / (xmax - xmin)));
}

double SvgCanvas::sx(double x) const { return (x - xmin_) / (xmax_ - xmin_) * wpx_; }
double SvgCanvas::sy(double y) const { return hpx_ - (y - ymin_) / (ymax_ - ymin_) * hpx_; }

void SvgCanvas::line(Vec2 a, Vec2 b, const std::string& color, double width, bool dashed) {
    body_ += "<line x1=\"" + fmt(sx(a.x)) + "\" y1=\"" + fmt(sy(a.y)) + "\" x2=\"" +
             fmt(sx(b.x)) + "\" y2=\"" + fmt(sy(b.y)) + "\" stroke=\"" + color +
             "\" stroke-width=\"" + fmt(width) + "\"" +
             (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
}

void SvgCanvas::polyline(const std::vector<Vec2>& pts, const std::string& color, double width,
                         bool dashed) {
    if (pts.size() < 2) return;
    body_ += "<polyline points=\"";
    for (const Vec2& p : pts) body_ += fmt(sx(p.x)) + "," + fmt(sy(p.y)) + " ";
    body_ += "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(width) + "\"" +
             (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
}

void SvgCanvas::circle(Vec2 c, double r, const std::string& stroke, const std::string& fill,
                       double width) {
    body_ += "<circle cx=\"" + fmt(sx(c.x)) + "\" cy=\"" + fmt(sy(c.y)) + "\" r=\"" +
             fmt(r / (xmax_ - xmin_) * wpx_) + "\" stroke=\"" + stroke + "\" fill=\"" + fill +
             "\" stroke-width=\"" + fmt(width) + "\"/>\n";
}

void SvgCanvas::polygon(const std::vector<Vec2>& pts, const std::string& stroke,
                        const std::string& fill, double width) {
    if (pts.size() < 3) return;
    body_ += "<polygon points=\"";
    for (const Vec2& p : pts) body_ += fmt(sx(p.x)) + "," + fmt(sy(p.y)) + " ";
    body_ += "\" stroke=\"" + stroke + "\" fill=\"" + fill + "\" stroke-width=\"" + fmt(width) +
             "\"/>\n";
}

void SvgCanvas::text(Vec2 at, const std::string& s, const std::string& color, double size_px) {
    body_ += "<text x=\"" + fmt(sx(at.x)) + "\" y=\"" + fmt(sy(at.y)) + "\" fill=\"" + color +
             "\" font-size=\"" + fmt(size_px) + "\" font-family=\"sans-serif\">" + s +
             "</text>\n";
}

std::string SvgCanvas::finish() const {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(wpx_) +
                      "\" height=\"" + std::to_string(hpx_) + "\" viewBox=\"0 0 " +
                      std::to_string(wpx_) + " " + std::to_string(hpx_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
}

void draw_scene(SvgCanvas& canvas, const PolygonScene& scene) {
    canvas.circle(Vec2{0, 0}, scene.R0, "#999999");
    canvas.circle(Vec2{0, 0}, scene.R1, "#bbbbbb");
    for (const auto& loop : scene.obstacles) canvas.polygon(loop, "#222222", "#e8e8e8", 1.5);
}

void draw_chains(SvgCanvas& canvas, const TraceResult& result) {
    for (const GeodesicChain& c : result.chains) {
        const bool dashed = c.terminal == Terminal::Horizon;
        for (const ChainSegment& s : c.segments) {
            const Vec2 a = s.start.pos;
            const Vec2 b = a + s.dir * s.length;
            canvas.line(a, b, kSheetColor[s.start.sheet & 1], dashed ? 1.0 : 1.3, dashed);
        }
    }
}

std::string plot_series(const std::vector<double>& x, const std::vector<std::vector<double>>& ys,
                        const std::vector<std::string>& labels, const std::string& title) {
    if (x.empty() || ys.empty()) throw std::invalid_argument("nothing to plot");
    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& y : ys) {
        if (y.size() != x.size()) throw std::invalid_argument("series length mismatch");
        for (double v : y) {
            if (first) {
                ymin = ymax = v;
                first = false;
            }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (ymax == ymin) {
        ymax += 1.0;
        ymin -= 1.0;
    }
    const double xpad = (x.back() - x.front()) * 0.05 + 1e-12;
    const double ypad = (ymax - ymin) * 0.08;
    SvgCanvas canvas(x.front() - xpad, ymin - ypad, x.back() + xpad, ymax + ypad, 900);
    canvas.line({x.front(), 0.0}, {x.back(), 0.0}, "#cccccc");
    const char* palette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t s = 0; s < ys.size(); ++s) {
        std::vector<Vec2> pts;
        pts.reserve(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({x[i], ys[s][i]});
        canvas.polyline(pts, palette[s % 6], 1.2);
        if (s < labels.size())
            canvas.text({x.front() + xpad, ymax - ypad * (double(s) + 1.0)}, labels[s],
                        palette[s % 6]);
    }
    canvas.text({x.front() + xpad, ymax}, title, "#222", 14.0);
    return canvas.finish();
}

}  // namespace conewave
