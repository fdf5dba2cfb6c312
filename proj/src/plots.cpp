#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cvxbandit/harness.hpp"
#include "cvxbandit/svg.hpp"

namespace cvxbandit {

namespace {

namespace fs = std::filesystem;

constexpr const char* kColdColor = "#2060c0";
constexpr const char* kWarmColor = "#d03020";

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm < 1.5) return mag;
    if (norm < 3.5) return 2.0 * mag;
    if (norm < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

/// Maps a world rectangle into a pixel rectangle (y axis flipped) and draws
/// the frame with ticks.
struct PlotFrame {
    double px, py, pw, ph;  // pixel rectangle
    double xmin, xmax, ymin, ymax;

    PlotFrame(double px_, double py_, double pw_, double ph_, double xmin_, double xmax_,
              double ymin_, double ymax_)
        : px(px_), py(py_), pw(pw_), ph(ph_), xmin(xmin_), xmax(xmax_), ymin(ymin_), ymax(ymax_) {
        if (xmax <= xmin) { xmin -= 1.0; xmax += 1.0; }
        if (ymax <= ymin) { ymin -= 1.0; ymax += 1.0; }
    }

    double mx(double x) const { return px + (x - xmin) / (xmax - xmin) * pw; }
    double my(double y) const { return py + ph - (y - ymin) / (ymax - ymin) * ph; }

    void draw_axes(SvgDoc& doc, const std::string& xlabel, const std::string& ylabel) const {
        doc.open_group("axes");
        doc.rect(px, py, pw, ph, "none", "#444444", 1.0);
        const double xstep = nice_step(xmax - xmin);
        for (double v = std::ceil(xmin / xstep) * xstep; v <= xmax + 1e-9 * xstep; v += xstep) {
            doc.line(mx(v), py + ph, mx(v), py + ph + 4, "#444444", 1.0);
            doc.text(mx(v), py + ph + 16, tick_label(v), 11, "middle");
        }
        const double ystep = nice_step(ymax - ymin);
        for (double v = std::ceil(ymin / ystep) * ystep; v <= ymax + 1e-9 * ystep; v += ystep) {
            doc.line(px - 4, my(v), px, my(v), "#444444", 1.0);
            doc.text(px - 7, my(v) + 4, tick_label(v), 11, "end");
        }
        doc.text(px + pw / 2, py + ph + 32, xlabel, 12, "middle");
        doc.text(px - 34, py - 8, ylabel, 12, "start");
        doc.close_group();
    }
};

std::vector<std::pair<double, double>> polytope_outline(const Mat& A, const Vec& b) {
    std::vector<std::pair<double, double>> verts;
    const int k = static_cast<int>(A.rows());
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double det = A(i, 0) * A(j, 1) - A(i, 1) * A(j, 0);
            if (std::abs(det) < 1e-12) continue;
            const double x = (b(i) * A(j, 1) - b(j) * A(i, 1)) / det;
            const double y = (A(i, 0) * b(j) - A(j, 0) * b(i)) / det;
            bool inside = true;
            for (int r = 0; r < k && inside; ++r)
                inside = A(r, 0) * x + A(r, 1) * y <= b(r) + 1e-9;
            if (!inside) continue;
            bool dup = false;
            for (const auto& v : verts)
                if (std::abs(v.first - x) < 1e-9 && std::abs(v.second - y) < 1e-9) dup = true;
            if (!dup) verts.emplace_back(x, y);
        }
    }
    if (verts.size() < 3) return {};
    double cx = 0, cy = 0;
    for (const auto& v : verts) { cx += v.first; cy += v.second; }
    cx /= verts.size();
    cy /= verts.size();
    std::sort(verts.begin(), verts.end(), [&](const auto& a, const auto& c) {
        return std::atan2(a.second - cy, a.first - cx) < std::atan2(c.second - cy, c.first - cx);
    });
    return verts;
}

void clip_line_to_box(double a0, double a1, double c, double xmin, double xmax, double ymin,
                      double ymax, std::vector<std::pair<double, double>>& out) {
    // intersections of a0*x + a1*y = c with the four box edges
    auto push = [&](double x, double y) {
        if (x >= xmin - 1e-9 && x <= xmax + 1e-9 && y >= ymin - 1e-9 && y <= ymax + 1e-9)
            out.emplace_back(x, y);
    };
    if (std::abs(a1) > 1e-12) {
        push(xmin, (c - a0 * xmin) / a1);
        push(xmax, (c - a0 * xmax) / a1);
    }
    if (std::abs(a0) > 1e-12) {
        push((c - a1 * ymin) / a0, ymin);
        push((c - a1 * ymax) / a0, ymax);
    }
}

std::string run_trajectory_plot(const ExperimentConfig& config,
                                const std::vector<TrajectoryRow>& rows,
                                const std::string& out_path) {
    const DecisionSet set = config.build_decision_set();
    double xmin = config.safe_action(0), xmax = xmin;
    double ymin = config.safe_action(1), ymax = ymin;
    for (std::size_t i = 0; i < config.decision_set.size(); ++i) {
        const auto& [lo, hi] = set.piece_bounds(static_cast<int>(i));
        xmin = std::min(xmin, lo(0));
        xmax = std::max(xmax, hi(0));
        ymin = std::min(ymin, lo(1));
        ymax = std::max(ymax, hi(1));
    }
    const double pad = 0.1 * std::max(xmax - xmin, ymax - ymin) + 1e-6;
    xmin -= pad; xmax += pad; ymin -= pad; ymax += pad;

    SvgDoc doc(640, 640);
    PlotFrame frame(60, 30, 540, 540, xmin, xmax, ymin, ymax);
    frame.draw_axes(doc, "z1", "z2");

    doc.open_group("piece-outlines");
    for (const PieceSpec& p : config.decision_set) {
        switch (p.kind) {
        case PieceSpec::Kind::Ball: {
            const double rx = p.radius / (frame.xmax - frame.xmin) * frame.pw;
            doc.circle(frame.mx(p.center(0)), frame.my(p.center(1)), rx, "none", "#808080", 1.2);
            break;
        }
        case PieceSpec::Kind::Box:
            doc.rect(frame.mx(p.lower(0)), frame.my(p.upper(1)),
                     (p.upper(0) - p.lower(0)) / (frame.xmax - frame.xmin) * frame.pw,
                     (p.upper(1) - p.lower(1)) / (frame.ymax - frame.ymin) * frame.ph, "none",
                     "#808080", 1.2);
            break;
        case PieceSpec::Kind::Polytope: {
            auto verts = polytope_outline(p.A, p.b);
            for (auto& v : verts) v = {frame.mx(v.first), frame.my(v.second)};
            doc.polygon(verts, "none", "#808080", 1.2);
            break;
        }
        case PieceSpec::Kind::Point:
            doc.circle(frame.mx(p.location(0)), frame.my(p.location(1)), 3.0, "#808080");
            break;
        }
    }
    doc.close_group();

    doc.open_group("constraint-boundary");
    for (int r = 0; r < config.gamma_star.rows(); ++r) {
        std::vector<std::pair<double, double>> hits;
        clip_line_to_box(config.gamma_star(r, 0), config.gamma_star(r, 1), config.tau(r), xmin,
                         xmax, ymin, ymax, hits);
        if (hits.size() >= 2) {
            // farthest pair in case corners produced duplicates
            std::size_t bi = 0, bj = 1;
            double best = -1.0;
            for (std::size_t i = 0; i < hits.size(); ++i)
                for (std::size_t j = i + 1; j < hits.size(); ++j) {
                    const double dx = hits[i].first - hits[j].first;
                    const double dy = hits[i].second - hits[j].second;
                    if (dx * dx + dy * dy > best) { best = dx * dx + dy * dy; bi = i; bj = j; }
                }
            doc.line(frame.mx(hits[bi].first), frame.my(hits[bi].second), frame.mx(hits[bj].first),
                     frame.my(hits[bj].second), "#c02020", 1.5);
        }
    }
    doc.close_group();

    const std::size_t n = rows.size();
    doc.open_group("support-points");
    for (std::size_t i = 0; i < n; ++i) {
        const double u = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        const std::string color = SvgDoc::blend_color(kColdColor, kWarmColor, u);
        for (const WeightedPoint& wp : rows[i].support)
            doc.circle(frame.mx(wp.point(0)), frame.my(wp.point(1)),
                       1.5 + 6.0 * std::sqrt(std::max(wp.weight, 0.0)), color, "none", 0.0, 0.25);
    }
    doc.close_group();

    doc.open_group("mean-path");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double u = n > 2 ? static_cast<double>(i) / (n - 2) : 0.0;
        doc.line(frame.mx(rows[i].policy_mean(0)), frame.my(rows[i].policy_mean(1)),
                 frame.mx(rows[i + 1].policy_mean(0)), frame.my(rows[i + 1].policy_mean(1)),
                 SvgDoc::blend_color(kColdColor, kWarmColor, u), 2.0);
    }
    doc.close_group();

    doc.open_group("safe-action");
    doc.circle(frame.mx(config.safe_action(0)), frame.my(config.safe_action(1)), 4.0, "#000000");
    doc.close_group();

    doc.save(out_path);
    return out_path;
}

std::string run_regret_plot(const RegretLedger& ledger, const std::vector<TrajectoryRow>& rows,
                            const std::string& out_path) {
    double ymax = 0.0, ymin = 0.0;
    for (const LedgerRow& row : ledger.rows()) {
        ymax = std::max(ymax, row.cumulative_regret);
        ymin = std::min(ymin, row.cumulative_regret);
    }
    for (const TrajectoryRow& row : rows) {
        ymax = std::max(ymax, row.sampled_regret_cum);
        ymin = std::min(ymin, row.sampled_regret_cum);
    }
    const double tmax = ledger.rows().empty() ? 1.0 : ledger.rows().back().t;

    SvgDoc doc(720, 480);
    PlotFrame frame(70, 30, 610, 400, 0.0, tmax, ymin, ymax);
    frame.draw_axes(doc, "round", "cumulative regret");

    doc.open_group("sampled-regret");
    std::vector<std::pair<double, double>> pts;
    for (const TrajectoryRow& row : rows)
        pts.emplace_back(frame.mx(row.t), frame.my(row.sampled_regret_cum));
    doc.polyline(pts, "#90b0d0", 1.0);
    doc.close_group();

    doc.open_group("expected-regret");
    pts.clear();
    for (const LedgerRow& row : ledger.rows())
        pts.emplace_back(frame.mx(row.t), frame.my(row.cumulative_regret));
    doc.polyline(pts, kColdColor, 2.0);
    doc.close_group();

    doc.save(out_path);
    return out_path;
}

struct AggregateCurves {
    std::vector<double> mean, p10, p90;
};

AggregateCurves read_aggregate_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty");
    AggregateCurves c;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t, mean, p10, p90;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &mean, &p10, &p90) != 4)
            throw std::runtime_error(path + ": bad row");
        c.mean.push_back(mean);
        c.p10.push_back(p10);
        c.p90.push_back(p90);
    }
    return c;
}

std::string aggregate_regret_plot(const AggregateCurves& c, const std::string& out_path) {
    double ymax = 0.0, ymin = 0.0;
    for (double v : c.p90) ymax = std::max(ymax, v);
    for (double v : c.p10) ymin = std::min(ymin, v);
    const double tmax = c.mean.empty() ? 1.0 : static_cast<double>(c.mean.size());

    SvgDoc doc(720, 480);
    PlotFrame frame(70, 30, 610, 400, 0.0, tmax, ymin, ymax);
    frame.draw_axes(doc, "round", "cumulative regret");

    doc.open_group("percentile-band");
    std::vector<std::pair<double, double>> band;
    for (std::size_t t = 0; t < c.p90.size(); ++t)
        band.emplace_back(frame.mx(static_cast<double>(t + 1)), frame.my(c.p90[t]));
    for (std::size_t t = c.p10.size(); t-- > 0;)
        band.emplace_back(frame.mx(static_cast<double>(t + 1)), frame.my(c.p10[t]));
    doc.polygon(band, "#c8d8ee", "none", 0.0);
    doc.close_group();

    doc.open_group("mean-regret");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t t = 0; t < c.mean.size(); ++t)
        pts.emplace_back(frame.mx(static_cast<double>(t + 1)), frame.my(c.mean[t]));
    doc.polyline(pts, kColdColor, 2.0);
    doc.close_group();

    doc.save(out_path);
    return out_path;
}

std::string histogram_plot(const std::string& csv_path, const std::string& out_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open " + csv_path);
    std::string line;
    std::getline(in, line);
    std::vector<double> lows, highs;
    std::vector<int> counts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double lo, hi;
        int cnt;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d", &lo, &hi, &cnt) != 3)
            throw std::runtime_error(csv_path + ": bad row");
        lows.push_back(lo);
        highs.push_back(hi);
        counts.push_back(cnt);
    }
    int cmax = 1;
    for (int cnt : counts) cmax = std::max(cmax, cnt);
    const double xmax = highs.empty() ? 1.0 : highs.back();

    SvgDoc doc(720, 480);
    PlotFrame frame(70, 30, 610, 400, 0.0, xmax, 0.0, static_cast<double>(cmax));
    frame.draw_axes(doc, "terminal regret", "runs");

    doc.open_group("bins");
    for (std::size_t b = 0; b < counts.size(); ++b) {
        if (counts[b] == 0) continue;
        const double x0 = frame.mx(lows[b]);
        const double x1 = frame.mx(highs[b]);
        const double y = frame.my(static_cast<double>(counts[b]));
        doc.rect(x0, y, std::max(x1 - x0 - 0.5, 0.5), frame.py + frame.ph - y, "#6090c8",
                 "#204060", 0.5);
    }
    doc.close_group();

    doc.save(out_path);
    return out_path;
}

} // namespace

std::vector<std::string> emit_plots(const std::string& artifact_dir) {
    const fs::path dir(artifact_dir);
    const ExperimentConfig config = ExperimentConfig::load((dir / "resolved_config.json").string());
    std::vector<std::string> written;

    if (fs::exists(dir / "aggregate_regret.csv")) {
        const AggregateCurves curves = read_aggregate_csv((dir / "aggregate_regret.csv").string());
        written.push_back(aggregate_regret_plot(curves, (dir / "regret.svg").string()));
        if (fs::exists(dir / "terminal_histogram.csv"))
            written.push_back(histogram_plot((dir / "terminal_histogram.csv").string(),
                                             (dir / "histogram.svg").string()));
        return written;
    }

    std::ifstream lin((dir / "ledger.csv").string());
    if (!lin) throw std::runtime_error("emit_plots: no ledger.csv or aggregate_regret.csv in " +
                                       artifact_dir);
    const RegretLedger ledger = RegretLedger::read_csv(lin);

    std::vector<TrajectoryRow> rows;
    std::ifstream tin((dir / "trajectory.csv").string());
    if (tin)
        rows = read_trajectory_csv(tin, static_cast<int>(config.theta_star.size()),
                                   static_cast<int>(config.gamma_star.rows()));

    written.push_back(run_regret_plot(ledger, rows, (dir / "regret.svg").string()));
    if (config.theta_star.size() == 2 && !rows.empty())
        written.push_back(run_trajectory_plot(config, rows, (dir / "trajectory.svg").string()));
    return written;
}

} // namespace cvxbandit
