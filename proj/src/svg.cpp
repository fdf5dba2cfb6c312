#include "cvxbandit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cvxbandit {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

SvgDoc::SvgDoc(int width, int height) {
    body_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
            "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
            std::to_string(width) + " " + std::to_string(height) + "\">\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
             std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
}

void SvgDoc::open_group(const std::string& id) {
    body_ += "<g id=\"" + escape(id) + "\">\n";
    ++open_groups_;
}

void SvgDoc::close_group() {
    if (open_groups_ <= 0) throw std::logic_error("SvgDoc: no group to close");
    body_ += "</g>\n";
    --open_groups_;
}

void SvgDoc::line(double x1, double y1, double x2, double y2,
                  const std::string& stroke, double stroke_width) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
             "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(stroke_width) + "\"/>\n";
}

void SvgDoc::polyline(const std::vector<std::pair<double, double>>& pts,
                      const std::string& stroke, double stroke_width) {
    if (pts.empty()) return;
    body_ += "<polyline points=\"";
    for (const auto& p : pts) body_ += num(p.first) + "," + num(p.second) + " ";
    body_ += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) +
             "\"/>\n";
}

void SvgDoc::polygon(const std::vector<std::pair<double, double>>& pts,
                     const std::string& fill, const std::string& stroke, double stroke_width) {
    if (pts.empty()) return;
    body_ += "<polygon points=\"";
    for (const auto& p : pts) body_ += num(p.first) + "," + num(p.second) + " ";
    body_ += "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(stroke_width) + "\"/>\n";
}

void SvgDoc::circle(double cx, double cy, double r, const std::string& fill,
                    const std::string& stroke, double stroke_width, double opacity) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
             "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(stroke_width) + "\"";
    if (opacity < 1.0) body_ += " fill-opacity=\"" + num(opacity) + "\"";
    body_ += "/>\n";
}

void SvgDoc::rect(double x, double y, double w, double h, const std::string& fill,
                  const std::string& stroke, double stroke_width) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
             "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
}

void SvgDoc::text(double x, double y, const std::string& s, double size,
                  const std::string& anchor, const std::string& fill) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill +
             "\">" + escape(s) + "</text>\n";
}

std::string SvgDoc::finish() {
    if (!finished_) {
        while (open_groups_ > 0) close_group();
        body_ += "</svg>\n";
        finished_ = true;
    }
    return body_;
}

void SvgDoc::save(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("SvgDoc::save: cannot open " + path);
    out << finish();
}

std::string SvgDoc::blend_color(const std::string& from, const std::string& to, double u) {
    u = std::clamp(u, 0.0, 1.0);
    auto channel = [&](int i) {
        const int a = std::stoi(from.substr(1 + 2 * i, 2), nullptr, 16);
        const int b = std::stoi(to.substr(1 + 2 * i, 2), nullptr, 16);
        return static_cast<int>(std::lround(a + (b - a) * u));
    };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(0), channel(1), channel(2));
    return buf;
}

} // namespace cvxbandit
