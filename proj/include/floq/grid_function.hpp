#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace floq {

enum class BoundaryKind { dirichlet, neumann, robin };

// Grid vector on (0, 1) with spacing h = 1/(interior + 1). Dirichlet keeps
// the interior nodes only; Neumann/Robin also carry the two boundary nodes.
struct GridFunction {
    BoundaryKind kind = BoundaryKind::dirichlet;
    int interior = 0;
    std::vector<double> v;

    GridFunction() = default;
    GridFunction(BoundaryKind bk, int n_interior, double fill = 0.0)
        : kind(bk), interior(n_interior),
          v(static_cast<std::size_t>(bk == BoundaryKind::dirichlet ? n_interior : n_interior + 2), fill) {
        if (n_interior < 3) throw std::invalid_argument("GridFunction: need >= 3 interior nodes");
    }

    double h() const { return 1.0 / (interior + 1); }
    int size() const { return static_cast<int>(v.size()); }

    double node_x(int i) const {
        return kind == BoundaryKind::dirichlet ? (i + 1) * h() : i * h();
    }

    bool in_cone(double tol = 0.0) const {
        for (double x : v)
            if (x < -tol) return false;
        return true;
    }
};

inline double inner_h(const GridFunction& a, const GridFunction& b) {
    if (a.v.size() != b.v.size()) throw std::invalid_argument("inner_h: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return a.h() * s;
}

inline double norm_h(const GridFunction& a) { return std::sqrt(inner_h(a, a)); }

inline const std::vector<double>& state_values(const GridFunction& g) { return g.v; }
inline std::vector<double>& state_values(GridFunction& g) { return g.v; }

inline void write_csv(const GridFunction& g, std::ostream& out) {
    out << "x,value\n";
    char buf[32];
    for (int i = 0; i < g.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.node_x(i));
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", g.v[i]);
        out << buf << "\n";
    }
}

// Tridiagonal operator/solver. `lo[i]` couples row i to i-1, `up[i]` to i+1.
struct TriDiag {
    int n = 0;
    std::vector<double> lo, di, up;

    TriDiag() = default;
    explicit TriDiag(int size) : n(size), lo(size, 0.0), di(size, 0.0), up(size, 0.0) {}

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        y.resize(n);
        for (int i = 0; i < n; ++i) {
            double s = di[i] * x[i];
            if (i > 0) s += lo[i] * x[i - 1];
            if (i + 1 < n) s += up[i] * x[i + 1];
            y[i] = s;
        }
    }

    void apply_transpose(const std::vector<double>& x, std::vector<double>& y) const {
        y.resize(n);
        for (int i = 0; i < n; ++i) {
            double s = di[i] * x[i];
            if (i > 0) s += up[i - 1] * x[i - 1];
            if (i + 1 < n) s += lo[i + 1] * x[i + 1];
            y[i] = s;
        }
    }

    // Thomas elimination; the assembled systems are diagonally dominant.
    void solve_in_place(std::vector<double>& rhs) const {
        thomas(lo, di, up, rhs);
    }

    void solve_transpose_in_place(std::vector<double>& rhs) const {
        // transpose swaps the bands, shifted by one row
        std::vector<double> tlo(n, 0.0), tup(n, 0.0);
        for (int i = 0; i + 1 < n; ++i) {
            tlo[i + 1] = up[i];
            tup[i] = lo[i + 1];
        }
        thomas(tlo, di, tup, rhs);
    }

    double row_sum(int i) const {
        double s = di[i];
        if (i > 0) s += lo[i];
        if (i + 1 < n) s += up[i];
        return s;
    }

private:
    static void thomas(const std::vector<double>& lo, const std::vector<double>& di,
                       const std::vector<double>& up, std::vector<double>& rhs) {
        const int n = static_cast<int>(di.size());
        std::vector<double> c(n), d(n);
        double piv = di[0];
        if (piv == 0.0) throw std::runtime_error("TriDiag: zero pivot");
        c[0] = up[0] / piv;
        d[0] = rhs[0] / piv;
        for (int i = 1; i < n; ++i) {
            piv = di[i] - lo[i] * c[i - 1];
            if (piv == 0.0) throw std::runtime_error("TriDiag: zero pivot");
            c[i] = up[i] / piv;
            d[i] = (rhs[i] - lo[i] * d[i - 1]) / piv;
        }
        rhs[n - 1] = d[n - 1];
        for (int i = n - 2; i >= 0; --i) rhs[i] = d[i] - c[i] * rhs[i + 1];
    }
};

}  // namespace floq
