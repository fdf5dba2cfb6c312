#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cvxbandit {

/// Minimal SVG document builder: enough primitives for the plots this
/// project emits, nothing more.
class SvgDoc {
public:
    SvgDoc(int width, int height);

    void open_group(const std::string& id);
    void close_group();

    void line(double x1, double y1, double x2, double y2,
              const std::string& stroke, double stroke_width);
    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& stroke, double stroke_width);
    void polygon(const std::vector<std::pair<double, double>>& pts,
                 const std::string& fill, const std::string& stroke, double stroke_width);
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke = "none", double stroke_width = 0.0,
                double opacity = 1.0);
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none", double stroke_width = 0.0);
    void text(double x, double y, const std::string& s, double size,
              const std::string& anchor = "start", const std::string& fill = "#333333");

    /// Closes open groups and the root element, returns the document.
    std::string finish();
    void save(const std::string& path);

    /// Linear blend between two #rrggbb colors, u in [0,1].
    static std::string blend_color(const std::string& from, const std::string& to, double u);

private:
    std::string body_;
    int open_groups_ = 0;
    bool finished_ = false;
};

} // namespace cvxbandit
