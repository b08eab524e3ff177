#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "floq/driving.hpp"
#include "floq/errors.hpp"
#include "floq/grid_function.hpp"
#include "floq/small_matrix.hpp"

namespace floq {

// Dominant (real) eigenvalue of a matrix with nonnegative off-diagonal
// entries, located by shifted power iteration with Collatz-Wielandt bounds.
inline double perron_root(const SmallMatrix& m, std::vector<double>* vec = nullptr,
                          int max_iter = 20000) {
    const int n = m.n;
    double shift = 1.0;
    for (int i = 0; i < n; ++i) shift = std::max(shift, 1.0 - m(i, i));
    SmallMatrix p = m;
    for (int i = 0; i < n; ++i) p(i, i) += shift;

    std::vector<double> v(n, 1.0), w(n);
    double lower = 0.0, upper = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        matvec(p, v.data(), w.data());
        lower = std::numeric_limits<double>::infinity();
        upper = 0.0;
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) {
            if (v[i] > 0.0) {
                lower = std::min(lower, w[i] / v[i]);
                upper = std::max(upper, w[i] / v[i]);
            }
            nrm = std::max(nrm, std::abs(w[i]));
        }
        if (nrm == 0.0) return -shift;  // nilpotent corner case
        for (int i = 0; i < n; ++i) v[i] = w[i] / nrm;
        if (upper - lower <= 1e-13 * std::max(1.0, std::abs(upper))) break;
    }
    if (vec) *vec = v;
    return 0.5 * (lower + upper) - shift;
}

struct CharacteristicRoot {
    std::complex<double> lambda;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> perron;
};

// Dominant characteristic root of the autonomous delay system: the unique
// real solution of  perron(A + exp(-lambda) B) = lambda, found by bisection
// (the left side is nonincreasing in lambda for cooperative couplings).
inline CharacteristicRoot characteristic_root(const SmallMatrix& a, const SmallMatrix& b) {
    if (a.n != b.n || a.n < 1) throw std::invalid_argument("characteristic_root: shape mismatch");
    const int n = a.n;
    auto g = [&](double lam) {
        SmallMatrix m = a;
        const double f = std::exp(-lam);
        for (int i = 0; i < n * n; ++i) m.a[i] += f * b.a[i];
        return perron_root(m) - lam;
    };
    double lo = -50.0, hi = 50.0;
    if (!(g(lo) > 0.0) || !(g(hi) < 0.0))
        throw OracleError("characteristic_root: no sign change on [-50, 50]");
    int iters = 0;
    for (; iters < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++iters) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    CharacteristicRoot root;
    const double lam = 0.5 * (lo + hi);
    root.lambda = {lam, 0.0};
    root.iterations = iters;

    SmallMatrix m = a;
    const double f = std::exp(-lam);
    for (int i = 0; i < n * n; ++i) m.a[i] += f * b.a[i];
    perron_root(m, &root.perron);
    double nrm = 0.0;
    for (double x : root.perron) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : root.perron) x /= nrm;

    SmallMatrix res(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) res(i, j) = (i == j ? lam : 0.0) - a(i, j) - f * b(i, j);
    root.residual = std::abs(determinant(res));
    return root;
}

struct PrincipalEig {
    double lambda = 0.0;
    std::vector<double> phi;  // strictly positive, unit Euclidean norm
    int iterations = 0;
};

// Principal (largest, simple) eigenpair of an assembled tridiagonal operator
// by shifted inverse iteration with Rayleigh refinement.
inline PrincipalEig elliptic_principal_eig(const TriDiag& op, int max_iter = 10000) {
    const int n = op.n;
    double upper = -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = op.di[i] + std::abs(i > 0 ? op.lo[i] : 0.0) + std::abs(i + 1 < n ? op.up[i] : 0.0);
        upper = std::max(upper, row);
        scale = std::max(scale, std::abs(op.di[i]) + std::abs(op.lo[i]) + std::abs(op.up[i]));
    }
    double mu = upper + 1.0;

    auto solve_shifted = [&](double m, std::vector<double>& rhs) {
        TriDiag s(n);
        for (int i = 0; i < n; ++i) {
            s.lo[i] = -op.lo[i];
            s.di[i] = m - op.di[i];
            s.up[i] = -op.up[i];
        }
        s.solve_in_place(rhs);
    };

    std::vector<double> v(n, 1.0), lv(n);
    double lambda = 0.0;
    PrincipalEig out;
    for (int it = 1; it <= max_iter; ++it) {
        solve_shifted(mu, v);
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw OracleError("elliptic_principal_eig: breakdown");
        for (double& x : v) x /= nrm;

        op.apply(v, lv);
        double num = 0.0;
        for (int i = 0; i < n; ++i) num += v[i] * lv[i];
        lambda = num;
        double res = 0.0;
        for (int i = 0; i < n; ++i) res = std::max(res, std::abs(lv[i] - lambda * v[i]));
        if (res <= 1e-13 * std::max(1.0, scale)) {
            out.iterations = it;
            break;
        }
        if (it == max_iter) throw OracleError("elliptic_principal_eig: no convergence");
    }
    double mass = 0.0;
    for (double x : v) mass += x;
    if (mass < 0.0)
        for (double& x : v) x = -x;
    out.lambda = lambda;
    out.phi = std::move(v);
    return out;
}

// Dominant log-rate of the period map, formed column by column and resolved
// by power iteration. Refuses when the discrete state is too large to store
// the period map densely.
template <class P>
double monodromy_exponent(const P& prop, const DrivingPoint& omega, double period,
                          int max_iter = 20000) {
    const int dim = prop.dimension();
    if (dim > 2000) throw OracleError("monodromy_exponent: state dimension exceeds the dense cap");
    std::vector<double> m(static_cast<std::size_t>(dim) * dim);
    for (int j = 0; j < dim; ++j) {
        const auto col = prop.flow(omega, period, prop.basis_state(j));
        const auto& cv = state_values(col);
        for (int i = 0; i < dim; ++i) m[static_cast<std::size_t>(i) * dim + j] = cv[i];
    }
    std::vector<double> v(dim, 1.0), w(dim);
    double rho = 0.0;
    double norm_m = 0.0;
    for (int i = 0; i < dim; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim; ++j) row += std::abs(m[static_cast<std::size_t>(i) * dim + j]);
        norm_m = std::max(norm_m, row);
    }
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            const double* row = &m[static_cast<std::size_t>(i) * dim];
            for (int j = 0; j < dim; ++j) s += row[j] * v[j];
            w[i] = s;
        }
        double num = 0.0, den = 0.0;
        for (int i = 0; i < dim; ++i) {
            num += v[i] * w[i];
            den += v[i] * v[i];
        }
        rho = num / den;
        double res = 0.0, nrm = 0.0;
        for (int i = 0; i < dim; ++i) {
            res = std::max(res, std::abs(w[i] - rho * v[i]));
            nrm = std::max(nrm, std::abs(w[i]));
        }
        if (nrm == 0.0) throw OracleError("monodromy_exponent: map annihilated the iterate");
        for (int i = 0; i < dim; ++i) v[i] = w[i] / nrm;
        if (res <= 1e-12 * std::max(norm_m, 1e-300)) break;
        if (it == max_iter - 1) throw OracleError("monodromy_exponent: power iteration stalled");
    }
    if (!(rho > 0.0)) throw OracleError("monodromy_exponent: dominant growth factor is not positive");
    return std::log(rho) / period;
}

}  // namespace floq
