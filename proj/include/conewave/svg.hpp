#pragma once

#include <string>
#include <vector>

#include "conewave/flow.hpp"

namespace conewave {

// Minimal SVG canvas in world coordinates (y up).
class SvgCanvas {
  public:
    SvgCanvas(double xmin, double ymin, double xmax, double ymax, int width_px = 800);

    void line(Vec2 a, Vec2 b, const std::string& color, double width = 1.0, bool dashed = false);
    void polyline(const std::vector<Vec2>& pts, const std::string& color, double width = 1.0,
                  bool dashed = false);
    void circle(Vec2 c, double r, const std::string& stroke, const std::string& fill = "none",
                double width = 1.0);
    void polygon(const std::vector<Vec2>& pts, const std::string& stroke, const std::string& fill,
                 double width = 1.0);
    void text(Vec2 at, const std::string& s, const std::string& color = "#333",
              double size_px = 12.0);

    std::string finish() const;

  private:
    double xmin_, ymin_, xmax_, ymax_;
    int wpx_, hpx_;
    std::string body_;

    double sx(double x) const;
    double sy(double y) const;
    double sw(double w) const { return w; }
};

// Scene with obstacles, gluing circle R0 and escape circle R1.
void draw_scene(SvgCanvas& canvas, const PolygonScene& scene);

// Chains drawn per sheet color; horizon-terminal chains are dashed.
void draw_chains(SvgCanvas& canvas, const TraceResult& result);

// Simple x-y series plot with axes; returns a complete SVG document.
std::string plot_series(const std::vector<double>& x, const std::vector<std::vector<double>>& ys,
                        const std::vector<std::string>& labels, const std::string& title);

}  // namespace conewave
