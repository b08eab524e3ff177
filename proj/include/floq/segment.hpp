#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace floq {

// Discretized history segment: `comps` components sampled at `grid + 1`
// uniform nodes over [-1, 0], node k holding the value at -1 + k/grid.
struct Segment {
    int comps = 0;
    int grid = 0;
    std::vector<double> v;  // comps * (grid + 1), component-major

    Segment() = default;
    Segment(int components, int grid_size, double fill = 0.0)
        : comps(components), grid(grid_size),
          v(static_cast<std::size_t>(components) * (grid_size + 1), fill) {
        if (components < 1 || grid_size < 8)
            throw std::invalid_argument("Segment: need >= 1 component and grid >= 8");
    }

    int nodes() const { return grid + 1; }
    double node_time(int k) const { return static_cast<double>(k) / grid - 1.0; }

    double& at(int i, int k) { return v[static_cast<std::size_t>(i) * (grid + 1) + k]; }
    double at(int i, int k) const { return v[static_cast<std::size_t>(i) * (grid + 1) + k]; }

    // Euclidean norm of the component vector at node k.
    double node_norm(int k) const {
        double s = 0.0;
        for (int i = 0; i < comps; ++i) s += at(i, k) * at(i, k);
        return std::sqrt(s);
    }

    double node_l1(int k) const {
        double s = 0.0;
        for (int i = 0; i < comps; ++i) s += std::abs(at(i, k));
        return s;
    }

    // Segment norms: the max over nodes of the pointwise Euclidean / l1 norms.
    double sup_norm() const {
        double m = 0.0;
        for (int k = 0; k <= grid; ++k) m = std::max(m, node_norm(k));
        return m;
    }

    double l1_norm() const {
        double m = 0.0;
        for (int k = 0; k <= grid; ++k) m = std::max(m, node_l1(k));
        return m;
    }

    bool in_cone(double tol = 0.0) const {
        for (double x : v)
            if (x < -tol) return false;
        return true;
    }

    bool finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline const std::vector<double>& state_values(const Segment& s) { return s.v; }
inline std::vector<double>& state_values(Segment& s) { return s.v; }

inline void write_csv(const Segment& s, std::ostream& out) {
    out << "tau";
    for (int i = 0; i < s.comps; ++i) out << ",u" << (i + 1);
    out << "\n";
    char buf[32];
    for (int k = 0; k <= s.grid; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.node_time(k));
        out << buf;
        for (int i = 0; i < s.comps; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", s.at(i, k));
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace floq
