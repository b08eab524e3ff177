#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "floq/driving.hpp"
#include "floq/errors.hpp"
#include "floq/quadrature.hpp"
#include "floq/segment.hpp"
#include "floq/small_matrix.hpp"

namespace floq {

// Fills `out` with the coupling matrix at the given driving point.
using MatrixPath = std::function<void(const DrivingPoint&, SmallMatrix&)>;

struct CooperativityCheck {
    bool pass = true;
    bool delayed_term = false;  // violation found in the delayed coupling
    int i = -1, j = -1;
    double t = 0.0;
    double value = 0.0;
};

struct IrreducibilityCheck {
    bool pass = false;
    double transfer_floor = 0.0;             // best guaranteed chain minimum
    std::vector<std::vector<int>> chains;    // one covering chain per start index
};

enum class AssumptionVariant { irreducible_chain, entrywise_positive };

struct AssumptionConstants {
    AssumptionVariant variant = AssumptionVariant::entrywise_positive;
    std::vector<double> diag_drift_min;  // per-component minimal diagonal drift integrals
    double decay_floor = 0.0;            // min_i exp(diag_drift_min[i])
    double transfer_floor = 0.0;         // guaranteed lower bound on the active couplings
    double transfer_cap = 0.0;           // upper bound on all couplings over the horizon
    double growth_cap = 0.0;             // exp of the integrated row-max drift over the horizon
    double lower_bound = 0.0;            // cone sandwich lower constant
    double upper_bound = 0.0;            // cone sandwich upper constant
    double distortion = 0.0;             // upper_bound / lower_bound
    double horizon = 0.0;                // sandwich time
};

struct FocusingReport {
    int samples = 0;
    double worst_lower_margin = 0.0;
    double worst_upper_margin = 0.0;
    bool pass = false;
    std::vector<double> reference;  // the componentwise bound vector (all ones)
};

// Cocycle on the discretized segment space generated by
//     u'(t) = A(theta_t w) u(t) + B(theta_t w) u(t - 1).
// The integrator step is tied to the segment grid (dt = 1/grid), so the
// delayed argument at full steps is a plain node lookup; only the half-step
// history values are interpolated (cubic, keeping the scheme at 4th order).
class DelayCocycle {
public:
    DelayCocycle(DrivingSystem driving, int components, int grid_size, MatrixPath a, MatrixPath b)
        : drv_(std::move(driving)), n_(components), m_(grid_size),
          a_(std::move(a)), b_(std::move(b)) {
        if (components < 1) throw std::invalid_argument("DelayCocycle: components < 1");
        if (grid_size < 8) throw std::invalid_argument("DelayCocycle: grid < 8");
    }

    const DrivingSystem& driving() const { return drv_; }
    int components() const { return n_; }
    int grid() const { return m_; }

    void eval_instant(const DrivingPoint& p, SmallMatrix& a, SmallMatrix& b) const {
        a_(p, a);
        b_(p, b);
    }

    Segment propagate(const DrivingPoint& w, double t, const Segment& u0) const {
        const int steps = aligned_steps(t);
        if (steps == 0) return u0;
        std::vector<double> traj = propagate_traj(w, steps, u0);
        Segment out(n_, m_);
        for (int k = 0; k <= m_; ++k)
            for (int i = 0; i < n_; ++i) out.at(i, k) = traj[static_cast<std::size_t>(steps + k) * n_ + i];
        return out;
    }

    // Residual of the variation-of-constants identity on (0, 1]: the computed
    // trajectory is compared against the homogeneous flow of the undelayed
    // part plus the quadrature of the delayed forcing.
    double integral_form_residual(const DrivingPoint& w, double t, const Segment& u0) const {
        const int steps = aligned_steps(t);
        if (steps < 1 || steps > m_)
            throw std::invalid_argument("integral_form_residual: need 0 < t <= 1");
        const std::vector<double> traj = propagate_traj(w, steps, u0);

        // integrand(j) = Phi(t, tau_j) * B(tau_j) * u(tau_j - 1)
        std::vector<std::vector<double>> integrand(steps + 1, std::vector<double>(n_));
        SmallMatrix bmat(n_);
        std::vector<double> tmp(n_);
        for (int j = 0; j <= steps; ++j) {
            const DrivingPoint pj = drv_.advance(w, node_t(j));
            b_(pj, bmat);
            matvec(bmat, &traj[static_cast<std::size_t>(j) * n_], tmp.data());
            SmallMatrix phi = homogeneous_flow(w, j, steps);
            matvec(phi, tmp.data(), integrand[j].data());
        }
        std::vector<double> rhs(n_, 0.0);
        const std::vector<double> qw = newton_cotes_weights(steps, 1.0 / m_);
        for (int j = 0; j <= steps; ++j)
            for (int i = 0; i < n_; ++i) rhs[i] += qw[j] * integrand[j][i];

        SmallMatrix phi0 = homogeneous_flow(w, 0, steps);
        std::vector<double> hom(n_);
        matvec(phi0, &traj[static_cast<std::size_t>(m_) * n_], hom.data());

        double res = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double lhs = traj[static_cast<std::size_t>(m_ + steps) * n_ + i];
            res = std::max(res, std::abs(lhs - hom[i] - rhs[i]));
        }
        return res;
    }

    CooperativityCheck check_cooperativity(const DrivingPoint& w, double horizon) const {
        if (!(horizon > 0)) throw std::invalid_argument("check_cooperativity: horizon <= 0");
        const int samples = std::max(257, static_cast<int>(std::lround(64 * horizon)) + 1);
        SmallMatrix a(n_), b(n_);
        CooperativityCheck rep;
        for (int s = 0; s < samples; ++s) {
            const double t = horizon * s / (samples - 1);
            const DrivingPoint p = drv_.advance(w, t);
            a_(p, a);
            b_(p, b);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    if (i != j && a(i, j) < 0.0) {
                        rep = {false, false, i, j, t, a(i, j)};
                        return rep;
                    }
                    if (b(i, j) < 0.0) {
                        rep = {false, true, i, j, t, b(i, j)};
                        return rep;
                    }
                }
        }
        return rep;
    }

    // For each start index, searches for a covering chain of persistently
    // positive delayed couplings over [0, components + 2]; the returned floor
    // is the maximin chain value, reduced by a sampling safety margin.
    IrreducibilityCheck check_irreducibility(const DrivingPoint& w) const {
        if (n_ > 10) throw std::invalid_argument("check_irreducibility: exhaustive chain search capped at 10 components");
        IrreducibilityCheck rep;
        if (n_ < 2) return rep;  // chains need at least two components
        const double horizon = n_ + 2.0;
        const auto weights = sampled_entry_minima(b_, w, horizon);

        rep.pass = true;
        rep.transfer_floor = std::numeric_limits<double>::infinity();
        rep.chains.resize(n_);
        for (int start = 0; start < n_; ++start) {
            std::vector<int> chain{start}, best_chain;
            std::vector<char> used(n_, 0);
            used[start] = 1;
            double best = -std::numeric_limits<double>::infinity();
            chain_search(weights, chain, used, std::numeric_limits<double>::infinity(), best, best_chain);
            if (best <= 0.0 || best_chain.empty()) {
                rep.pass = false;
                rep.transfer_floor = 0.0;
                rep.chains.clear();
                return rep;
            }
            rep.transfer_floor = std::min(rep.transfer_floor, best);
            rep.chains[start] = best_chain;
        }
        return rep;
    }

    AssumptionConstants assumption_constants(const DrivingPoint& w, AssumptionVariant variant) const {
        AssumptionConstants c;
        c.variant = variant;
        const bool chains = variant == AssumptionVariant::irreducible_chain;
        const double horizon = chains ? n_ + 2.0 : 2.0;
        c.horizon = horizon;

        // Minimal diagonal drift integrals over unit subwindows, conservative
        // against both quadrature and grid-placement error.
        const int res = 64;
        c.diag_drift_min.assign(n_, 0.0);
        SmallMatrix a(n_);
        for (int i = 0; i < n_; ++i) {
            auto aii = [&](double t) {
                a_(drv_.advance(w, t), a);
                return a(i, i);
            };
            const std::vector<double> cum = cumulative_integral(aii, n_ + 2.0, res);
            double sup = 0.0;
            for (int q = 0; q < static_cast<int>(cum.size()) - 1; ++q)
                sup = std::max(sup, std::abs(aii((q + 0.5) / res)));
            double lo = 0.0;
            for (int k = 0; k <= n_ + 1; ++k)
                for (int qs = 0; qs <= res; ++qs)
                    for (int qt = qs; qt <= res; ++qt)
                        lo = std::min(lo, cum[k * res + qt] - cum[k * res + qs]);
            c.diag_drift_min[i] = lo - sup / res;
        }
        c.decay_floor = std::numeric_limits<double>::infinity();
        for (double d : c.diag_drift_min) c.decay_floor = std::min(c.decay_floor, std::exp(d));

        // Integrated row-max drift over the horizon (upper bound direction).
        auto rowmax_sum = [&](double t) {
            a_(drv_.advance(w, t), a);
            double s = 0.0;
            for (int i = 0; i < n_; ++i) {
                double rm = a(i, 0);
                for (int j = 1; j < n_; ++j) rm = std::max(rm, a(i, j));
                s += rm;
            }
            return s;
        };
        const auto [ia, ea] = integrate_simpson_with_error(rowmax_sum, 0.0, horizon, 256 * static_cast<int>(horizon));
        c.growth_cap = std::exp(ia + ea);

        // Coupling bounds over the horizon.
        const auto minima = sampled_entry_minima(b_, w, horizon);
        const auto maxima = sampled_entry_maxima(b_, w, horizon);
        c.transfer_cap = 0.0;
        for (const auto& row : maxima)
            for (double v : row) c.transfer_cap = std::max(c.transfer_cap, v);

        if (chains) {
            if (n_ < 2) throw std::invalid_argument("assumption_constants: chain variant needs >= 2 components");
            const IrreducibilityCheck irr = check_irreducibility(w);
            if (!irr.pass) throw std::invalid_argument("assumption_constants: covering-chain check failed");
            c.transfer_floor = irr.transfer_floor;
            double lo = std::numeric_limits<double>::infinity();
            double fact = 1.0;
            for (int k = 1; k <= n_; ++k) {
                fact *= k;
                const double dk = std::pow(c.transfer_floor, k) / fact;
                lo = std::min(lo, std::min(std::pow(c.decay_floor, n_ + 2), std::pow(c.decay_floor, n_ + 3)) * dk);
            }
            c.lower_bound = lo;
            const double base = std::pow(c.growth_cap, n_ + 2) * std::pow(1.0 + n_ * c.transfer_cap, n_ + 1);
            c.upper_bound = std::max(base, base * n_ * c.transfer_cap);
        } else {
            double floor = std::numeric_limits<double>::infinity();
            for (const auto& row : minima)
                for (double v : row) floor = std::min(floor, v);
            if (!(floor > 0.0))
                throw std::invalid_argument("assumption_constants: delayed coupling is not entrywise positive on [0, 2]");
            c.transfer_floor = floor;
            c.lower_bound = c.decay_floor * c.decay_floor * c.transfer_floor;
            const double g2 = c.growth_cap * c.growth_cap;
            c.upper_bound = std::max(g2 * (1.0 + n_ * c.transfer_cap), g2 * n_ * c.transfer_cap * (1.0 + n_ * c.transfer_cap));
        }
        if (!std::isfinite(c.lower_bound) || !std::isfinite(c.upper_bound) || !(c.lower_bound > 0.0))
            throw NumericalError("assumption_constants: non-finite or degenerate sandwich constants");
        c.distortion = c.upper_bound / c.lower_bound;
        return c;
    }

    // Propagates cone samples to the sandwich horizon and measures the worst
    // signed margins against the componentwise bounds. The upper bound is
    // checked on every output node. So is the lower bound for the chain
    // variant; under the entrywise-positive variant the instantaneous mass
    // needs a full delay unit to reach the other components, so its lower
    // bound is only attained at the terminal node and is checked there.
    FocusingReport verify_focusing(const DrivingPoint& w, const AssumptionConstants& c,
                                   int n_samples, std::uint64_t seed, double tol = 1e-9) const {
        FocusingReport rep;
        rep.reference.assign(n_, 1.0);
        rep.worst_lower_margin = std::numeric_limits<double>::infinity();
        rep.worst_upper_margin = std::numeric_limits<double>::infinity();

        std::mt19937_64 rng(seed);
        std::vector<Segment> cases;
        cases.emplace_back(n_, m_, 0.0);
        cases.emplace_back(n_, m_, 1.0);
        for (int s = 0; s < n_samples; ++s) {
            Segment u(n_, m_);
            for (double& x : u.v) x = uniform01(rng);
            cases.push_back(std::move(u));
        }
        for (int zero_comp = 0; zero_comp < n_; ++zero_comp) {
            Segment u(n_, m_);
            for (double& x : u.v) x = uniform01(rng);
            for (int k = 0; k <= m_; ++k) u.at(zero_comp, k) = 0.0;
            // additionally strip the recent history so the bound exercises the
            // integral part of the factor
            for (int i = 0; i < n_; ++i)
                for (int k = 3 * m_ / 4; k <= m_; ++k) u.at(i, k) = 0.0;
            cases.push_back(std::move(u));
        }

        const int lower_first_node = c.variant == AssumptionVariant::irreducible_chain ? 0 : m_;
        for (const Segment& u0 : cases) {
            std::vector<double> l1(m_ + 1);
            for (int k = 0; k <= m_; ++k) l1[k] = u0.node_l1(k);
            const double factor = u0.node_l1(m_) + trapezoid(l1, 1.0);
            const Segment out = propagate(w, c.horizon, u0);
            for (int k = 0; k <= m_; ++k)
                for (int i = 0; i < n_; ++i) {
                    if (k >= lower_first_node)
                        rep.worst_lower_margin =
                            std::min(rep.worst_lower_margin, out.at(i, k) - c.lower_bound * factor);
                    rep.worst_upper_margin = std::min(rep.worst_upper_margin, c.upper_bound * factor - out.at(i, k));
                }
        }
        rep.samples = static_cast<int>(cases.size());
        rep.pass = rep.worst_lower_margin >= -tol && rep.worst_upper_margin >= -tol;
        return rep;
    }

    // Explicit short-time growth constant: the l1 norm of the flow on [0, 1]
    // never exceeds this multiple of the initial segment norm.
    double norm_growth_factor(const DrivingPoint& w) const {
        SmallMatrix a(n_), b(n_);
        auto rowmax_a = [&](double t) {
            a_(drv_.advance(w, t), a);
            double s = 0.0;
            for (int i = 0; i < n_; ++i) {
                double rm = a(i, 0);
                for (int j = 1; j < n_; ++j) rm = std::max(rm, a(i, j));
                s += rm;
            }
            return s;
        };
        auto rowmax_b = [&](double t) {
            b_(drv_.advance(w, t), b);
            double s = 0.0;
            for (int i = 0; i < n_; ++i) {
                double rm = b(i, 0);
                for (int j = 1; j < n_; ++j) rm = std::max(rm, b(i, j));
                s += rm;
            }
            return s;
        };
        const auto [iaa, eaa] = integrate_simpson_with_error(rowmax_a, 0.0, 1.0, 256);
        const auto [ibb, ebb] = integrate_simpson_with_error(rowmax_b, 0.0, 1.0, 256);
        return 2.0 * std::exp(iaa + eaa) * (1.0 + ibb + ebb);
    }

    // Smallest |det B| over a sampled window; the entire-orbit existence
    // result needs B nonsingular, and this is the extent of its certification.
    double min_abs_det_b(const DrivingPoint& w, double horizon) const {
        SmallMatrix b(n_);
        double lo = std::numeric_limits<double>::infinity();
        const int samples = std::max(129, static_cast<int>(std::lround(32 * horizon)) + 1);
        for (int s = 0; s < samples; ++s) {
            b_(drv_.advance(w, horizon * s / (samples - 1)), b);
            lo = std::min(lo, std::abs(determinant(b)));
        }
        return lo;
    }

private:
    double node_t(int j) const { return static_cast<double>(j) / m_; }

    int aligned_steps(double t) const {
        if (t < 0.0) throw std::domain_error("DelayCocycle: the semiflow is forward-only (t >= 0)");
        const double raw = t * m_;
        const long long steps = std::llround(raw);
        if (std::abs(raw - static_cast<double>(steps)) > 1e-9 * std::max(1.0, raw))
            throw std::invalid_argument("DelayCocycle: t must be a multiple of 1/grid");
        return static_cast<int>(steps);
    }

    // Trajectory nodes at times j/m - 1 for j = 0 .. m + steps, node-major.
    std::vector<double> propagate_traj(const DrivingPoint& w, int steps, const Segment& u0) const {
        if (u0.comps != n_ || u0.grid != m_)
            throw std::invalid_argument("DelayCocycle: segment shape mismatch");
        if (!u0.finite()) throw std::invalid_argument("DelayCocycle: segment holds non-finite values");
        std::vector<double> traj(static_cast<std::size_t>(m_ + steps + 1) * n_);
        for (int k = 0; k <= m_; ++k)
            for (int i = 0; i < n_; ++i) traj[static_cast<std::size_t>(k) * n_ + i] = u0.at(i, k);

        const double dt = 1.0 / m_;
        SmallMatrix a0(n_), am(n_), a1(n_), b0(n_), bm(n_), b1(n_);
        std::vector<double> y(n_), hist_m(n_), g(n_), k1(n_), k2(n_), k3(n_), k4(n_), stage(n_);

        a_(drv_.advance(w, 0.0), a0);
        b_(drv_.advance(w, 0.0), b0);
        for (int k = 0; k < steps; ++k) {
            const double tm = static_cast<double>(2 * k + 1) / (2 * m_);
            const double t1 = static_cast<double>(k + 1) / m_;
            const DrivingPoint pm = drv_.advance(w, tm);
            const DrivingPoint p1 = drv_.advance(w, t1);
            a_(pm, am);
            b_(pm, bm);
            a_(p1, a1);
            b_(p1, b1);

            const double* h0 = &traj[static_cast<std::size_t>(k) * n_];
            const double* h1 = &traj[static_cast<std::size_t>(k + 1) * n_];
            history_midpoint(traj, k, hist_m.data());
            const double* yk = &traj[static_cast<std::size_t>(m_ + k) * n_];

            matvec(a0, yk, k1.data());
            matvec(b0, h0, g.data());
            for (int i = 0; i < n_; ++i) k1[i] += g[i];

            matvec(bm, hist_m.data(), g.data());
            for (int i = 0; i < n_; ++i) stage[i] = yk[i] + 0.5 * dt * k1[i];
            matvec(am, stage.data(), k2.data());
            for (int i = 0; i < n_; ++i) k2[i] += g[i];

            for (int i = 0; i < n_; ++i) stage[i] = yk[i] + 0.5 * dt * k2[i];
            matvec(am, stage.data(), k3.data());
            for (int i = 0; i < n_; ++i) k3[i] += g[i];

            matvec(b1, h1, g.data());
            for (int i = 0; i < n_; ++i) stage[i] = yk[i] + dt * k3[i];
            matvec(a1, stage.data(), k4.data());
            for (int i = 0; i < n_; ++i) k4[i] += g[i];

            double* yn = &traj[static_cast<std::size_t>(m_ + k + 1) * n_];
            for (int i = 0; i < n_; ++i)
                yn[i] = yk[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

            std::swap(a0, a1);
            std::swap(b0, b1);
        }
        return traj;
    }

    // Cubic interpolation of the stored history between nodes k and k+1. The
    // trajectory is only piecewise smooth (the stepping introduces derivative
    // jumps at whole delay units), so the stencil is clamped to the unit piece
    // containing the midpoint and shifts one-sided at its edges.
    void history_midpoint(const std::vector<double>& traj, int k, double* out) const {
        static constexpr double w_left[4] = {0.3125, 0.9375, -0.3125, 0.0625};
        static constexpr double w_mid[4] = {-0.0625, 0.5625, 0.5625, -0.0625};
        static constexpr double w_right[4] = {0.0625, -0.3125, 0.9375, 0.3125};
        const int piece_lo = m_ * (k / m_);
        const int j0 = std::clamp(k - 1, piece_lo, piece_lo + m_ - 3);
        const int xi = k - j0;  // 0, 1 or 2 grid units left of the midpoint
        const double* weights = xi == 0 ? w_left : (xi == 1 ? w_mid : w_right);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int q = 0; q < 4; ++q) s += weights[q] * traj[static_cast<std::size_t>(j0 + q) * n_ + i];
            out[i] = s;
        }
    }

    // Matrix flow of the undelayed part u' = A u from node j0 to node j1.
    SmallMatrix homogeneous_flow(const DrivingPoint& w, int j0, int j1) const {
        SmallMatrix phi = SmallMatrix::identity(n_);
        const double dt = 1.0 / m_;
        SmallMatrix a0(n_), am(n_), a1(n_);
        SmallMatrix s1(n_), s2(n_), s3(n_), s4(n_), tmp(n_);
        for (int j = j0; j < j1; ++j) {
            a_(drv_.advance(w, node_t(j)), a0);
            a_(drv_.advance(w, static_cast<double>(2 * j + 1) / (2 * m_)), am);
            a_(drv_.advance(w, node_t(j + 1)), a1);
            matmul(a0, phi, s1);
            axpy_matrix(phi, s1, 0.5 * dt, tmp);
            matmul(am, tmp, s2);
            axpy_matrix(phi, s2, 0.5 * dt, tmp);
            matmul(am, tmp, s3);
            axpy_matrix(phi, s3, dt, tmp);
            matmul(a1, tmp, s4);
            for (std::size_t q = 0; q < phi.a.size(); ++q)
                phi.a[q] += (dt / 6.0) * (s1.a[q] + 2.0 * s2.a[q] + 2.0 * s3.a[q] + s4.a[q]);
        }
        return phi;
    }

    static void matmul(const SmallMatrix& a, const SmallMatrix& b, SmallMatrix& out) {
        const int n = a.n;
        if (out.n != n) out = SmallMatrix(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
                out(i, j) = s;
            }
    }

    static void axpy_matrix(const SmallMatrix& base, const SmallMatrix& add, double factor, SmallMatrix& out) {
        if (out.n != base.n) out = SmallMatrix(base.n);
        for (std::size_t q = 0; q < base.a.size(); ++q) out.a[q] = base.a[q] + factor * add.a[q];
    }

    // Uniform-grid weights: composite Simpson, with a 3/8 tail when the
    // interval count is odd.
    static std::vector<double> newton_cotes_weights(int intervals, double dt) {
        std::vector<double> w(intervals + 1, 0.0);
        if (intervals == 1) {
            w[0] = w[1] = dt / 2.0;
            return w;
        }
        int simpson_end = intervals;
        const bool tail = (intervals % 2) != 0;
        if (tail) simpson_end = intervals - 3;
        for (int j = 0; j + 2 <= simpson_end; j += 2) {
            w[j] += dt / 3.0;
            w[j + 1] += 4.0 * dt / 3.0;
            w[j + 2] += dt / 3.0;
        }
        if (tail) {
            const int j = simpson_end;
            w[j] += 3.0 * dt / 8.0;
            w[j + 1] += 9.0 * dt / 8.0;
            w[j + 2] += 9.0 * dt / 8.0;
            w[j + 3] += 3.0 * dt / 8.0;
        }
        return w;
    }

    // Per-entry minima/maxima of a matrix path over [0, horizon], with a
    // finite-difference Lipschitz margin pushing each in the safe direction.
    std::vector<std::vector<double>> sampled_entry_minima(const MatrixPath& path, const DrivingPoint& w,
                                                          double horizon) const {
        return sampled_entry_bounds(path, w, horizon, true);
    }
    std::vector<std::vector<double>> sampled_entry_maxima(const MatrixPath& path, const DrivingPoint& w,
                                                          double horizon) const {
        return sampled_entry_bounds(path, w, horizon, false);
    }

    std::vector<std::vector<double>> sampled_entry_bounds(const MatrixPath& path, const DrivingPoint& w,
                                                          double horizon, bool lower) const {
        const int samples = std::max(513, static_cast<int>(std::lround(512 * horizon)) + 1);
        const double dg = horizon / (samples - 1);
        std::vector<std::vector<double>> bound(n_, std::vector<double>(n_, lower ? 1e300 : -1e300));
        std::vector<std::vector<double>> lip(n_, std::vector<double>(n_, 0.0));
        SmallMatrix cur(n_), prev(n_);
        for (int s = 0; s < samples; ++s) {
            path(drv_.advance(w, dg * s), cur);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    bound[i][j] = lower ? std::min(bound[i][j], cur(i, j)) : std::max(bound[i][j], cur(i, j));
                    if (s > 0) lip[i][j] = std::max(lip[i][j], std::abs(cur(i, j) - prev(i, j)) / dg);
                }
            std::swap(cur, prev);
        }
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                const double margin = lip[i][j] * dg;
                bound[i][j] += lower ? -margin : margin;
            }
        return bound;
    }

    void chain_search(const std::vector<std::vector<double>>& weights, std::vector<int>& chain,
                      std::vector<char>& used, double current_min, double& best,
                      std::vector<int>& best_chain) const {
        if (static_cast<int>(chain.size()) == n_) {
            if (current_min > best) {
                best = current_min;
                best_chain = chain;
            }
            return;
        }
        const int from = chain.back();
        for (int to = 0; to < n_; ++to) {
            if (used[to]) continue;
            const double edge = weights[to][from];  // transfer from `from` into `to`
            const double next_min = std::min(current_min, edge);
            if (next_min <= best) continue;
            used[to] = 1;
            chain.push_back(to);
            chain_search(weights, chain, used, next_min, best, best_chain);
            chain.pop_back();
            used[to] = 0;
        }
    }

    DrivingSystem drv_;
    int n_;
    int m_;
    MatrixPath a_;
    MatrixPath b_;
};

}  // namespace floq
