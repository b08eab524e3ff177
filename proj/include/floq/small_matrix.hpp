#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace floq {

// Dense row-major matrix for the small coupling systems (a handful of
// components); not meant for large-scale linear algebra.
struct SmallMatrix {
    int n = 0;
    std::vector<double> a;

    SmallMatrix() = default;
    explicit SmallMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static SmallMatrix identity(int size) {
        SmallMatrix m(size);
        for (int i = 0; i < size; ++i) m(i, i) = 1.0;
        return m;
    }

    static SmallMatrix ones(int size) {
        SmallMatrix m(size);
        for (double& v : m.a) v = 1.0;
        return m;
    }

    void zero() {
        for (double& v : a) v = 0.0;
    }
};

inline void matvec(const SmallMatrix& m, const double* x, double* y) {
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
}

// Determinant by partially pivoted LU; fine at these sizes.
inline double determinant(SmallMatrix m) {
    double det = 1.0;
    for (int c = 0; c < m.n; ++c) {
        int piv = c;
        for (int r = c + 1; r < m.n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (m(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < m.n; ++j) std::swap(m(piv, j), m(c, j));
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < m.n; ++r) {
            const double f = m(r, c) / m(c, c);
            for (int j = c; j < m.n; ++j) m(r, j) -= f * m(c, j);
        }
    }
    return det;
}

}  // namespace floq
