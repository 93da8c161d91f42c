#include "trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace precess {

namespace {

std::string fnum(double v, const char* fmt = "%.4f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

const char* cluster_color(int cluster) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#8c564b", "#e377c2"};
    if (cluster < 0) return "#7f7f7f";
    return palette[cluster % 6];
}

struct SvgDoc {
    std::string body;
    double w, h;
    SvgDoc(double w_, double h_) : w(w_), h(h_) {
        body += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fnum(w, "%.0f") +
                "\" height=\"" + fnum(h, "%.0f") + "\" viewBox=\"0 0 " + fnum(w, "%.0f") + " " +
                fnum(h, "%.0f") + "\">\n";
        body += "<rect width=\"" + fnum(w, "%.0f") + "\" height=\"" + fnum(h, "%.0f") +
                "\" fill=\"#ffffff\"/>\n";
    }
    void circle(double cx, double cy, double r, const char* stroke, const char* fill) {
        body += "<circle cx=\"" + fnum(cx) + "\" cy=\"" + fnum(cy) + "\" r=\"" + fnum(r) +
                "\" stroke=\"" + stroke + "\" fill=\"" + fill + "\" stroke-width=\"1\"/>\n";
    }
    void dot(double cx, double cy, double r, const char* fill) {
        body += "<circle cx=\"" + fnum(cx) + "\" cy=\"" + fnum(cy) + "\" r=\"" + fnum(r) +
                "\" fill=\"" + std::string(fill) + "\"/>\n";
    }
    void polyline_begin(const char* stroke) {
        body += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
                "\" stroke-width=\"0.8\" points=\"";
    }
    void polyline_point(double x, double y) { body += fnum(x) + "," + fnum(y) + " "; }
    void polyline_end() { body += "\"/>\n"; }
    std::string finish() { return body + "</svg>\n"; }
};

void axis_point(double g3, double psi, double& x, double& y, double& z) {
    double st = std::sqrt(std::max(0.0, 1.0 - g3 * g3));
    x = st * std::sin(psi);
    y = -st * std::cos(psi);
    z = g3;
}

} // namespace

std::string trace_sphere_csv(const Trajectory& traj) {
    if (traj.size() > 0 && !traj.has_psi())
        throw error(errc::invalid_argument, "trajectory has no accumulated psi");
    std::string out = "t,x,y,z\n";
    char buf[160];
    for (size_t i = 0; i < traj.size(); ++i) {
        double x, y, z;
        axis_point(traj.states[i][5], traj.psi[i], x, y, z);
        std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e\n", traj.times[i], x, y, z);
        out += buf;
    }
    return out;
}

std::string trace_sphere_svg(const Trajectory& traj) {
    if (traj.size() > 0 && !traj.has_psi())
        throw error(errc::invalid_argument, "trajectory has no accumulated psi");
    SvgDoc svg(800, 400);
    const double cx1 = 200, cx2 = 600, cy = 200, R = 180;
    svg.circle(cx1, cy, R, "#000000", "none");
    svg.circle(cx2, cy, R, "#000000", "none");
    if (traj.size() > 0) {
        svg.polyline_begin("#1f77b4");
        for (size_t i = 0; i < traj.size(); ++i) {
            double x, y, z;
            axis_point(traj.states[i][5], traj.psi[i], x, y, z);
            svg.polyline_point(cx1 + R * x, cy - R * y);
        }
        svg.polyline_end();
        svg.polyline_begin("#1f77b4");
        for (size_t i = 0; i < traj.size(); ++i) {
            double x, y, z;
            axis_point(traj.states[i][5], traj.psi[i], x, y, z);
            svg.polyline_point(cx2 + R * x, cy - R * z);
        }
        svg.polyline_end();
    }
    return svg.finish();
}

std::string project_rg3_csv(const Trajectory& traj) {
    std::string out = "t,r,g3\n";
    char buf[128];
    for (size_t i = 0; i < traj.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e\n", traj.times[i], traj.states[i][2],
                      traj.states[i][5]);
        out += buf;
    }
    return out;
}

namespace {

struct Bounds {
    double rx0 = -1, rx1 = 1, ry0 = -1, ry1 = 1;
    void fit(double x, double y, bool first) {
        if (first) {
            rx0 = rx1 = x;
            ry0 = ry1 = y;
        } else {
            rx0 = std::min(rx0, x);
            rx1 = std::max(rx1, x);
            ry0 = std::min(ry0, y);
            ry1 = std::max(ry1, y);
        }
    }
    void pad() {
        double dx = rx1 - rx0, dy = ry1 - ry0;
        if (dx <= 0) dx = 1;
        if (dy <= 0) dy = 1;
        rx0 -= 0.05 * dx;
        rx1 += 0.05 * dx;
        ry0 -= 0.05 * dy;
        ry1 += 0.05 * dy;
    }
    double px(double x) const { return 20 + 760 * (x - rx0) / (rx1 - rx0); }
    double py(double y) const { return 380 - 360 * (y - ry0) / (ry1 - ry0); }
};

} // namespace

std::string project_rg3_svg(const Trajectory& traj) {
    SvgDoc svg(800, 400);
    Bounds b;
    for (size_t i = 0; i < traj.size(); ++i)
        b.fit(traj.states[i][2], traj.states[i][5], i == 0);
    b.pad();
    if (traj.size() > 0) {
        svg.polyline_begin("#1f77b4");
        for (size_t i = 0; i < traj.size(); ++i)
            svg.polyline_point(b.px(traj.states[i][2]), b.py(traj.states[i][5]));
        svg.polyline_end();
    }
    return svg.finish();
}

std::string project_rg3_svg(const TorusCount& tc) {
    SvgDoc svg(800, 400);
    Bounds b;
    for (size_t i = 0; i < tc.points.size(); ++i)
        b.fit(tc.points[i].r, tc.points[i].g3, i == 0);
    b.pad();
    for (const SectionPoint& sp : tc.points)
        svg.dot(b.px(sp.r), b.py(sp.g3), 1.5, cluster_color(sp.cluster));
    return svg.finish();
}

} // namespace precess
