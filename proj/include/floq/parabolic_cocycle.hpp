#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "floq/driving.hpp"
#include "floq/errors.hpp"
#include "floq/grid_function.hpp"
#include "floq/quadrature.hpp"

namespace floq {

using SpaceTimeFn = std::function<double(const DrivingPoint&, double)>;
using TimeFn = std::function<double(const DrivingPoint&)>;

struct ParabolicCoefficients {
    SpaceTimeFn diffusion;   // coefficient of the gradient inside the flux
    SpaceTimeFn flux_drift;  // drift carried inside the flux
    SpaceTimeFn advection;   // first-order term outside the flux
    SpaceTimeFn zero_order;  // reaction term
    TimeFn zero_order_lo;    // spatial envelope below the reaction term
    TimeFn zero_order_hi;    // spatial envelope above it
    TimeFn robin_left;       // boundary absorption at x = 0 (>= 0)
    TimeFn robin_right;      // boundary absorption at x = 1 (>= 0)
    double ellipticity_floor = 0.0;
};

struct ComparisonReport {
    double order_margin = 0.0;     // min over nodes of (larger-reaction solution - smaller one)
    double sandwich_lower = 0.0;   // min over nodes of (u - exp(lo-envelope integral) * u0free)
    double sandwich_upper = 0.0;   // min over nodes of (exp(hi-envelope integral) * u0free - u)
};

struct MonitoredResult {
    GridFunction u;
    int halvings = 0;
    int steps_per_unit = 0;
    double min_value = 0.0;
};

// Crank-Nicolson cocycle for the one-dimensional conservative problem
//     du/dt = d/dx( a(t,x) du/dx + f(t,x) u ) + b(t,x) du/dx + c(t,x) u
// on (0, 1). The spatially constant part of the reaction term is split off and
// applied as an exact scalar integrating factor; only the remainder enters the
// implicit solve. The adjoint propagator is the literal transpose of the
// composed step matrices, so the discrete duality pairing holds to round-off.
class ParabolicCocycle {
public:
    ParabolicCocycle(DrivingSystem driving, ParabolicCoefficients coeffs, BoundaryKind kind,
                     int n_interior, int steps_per_unit)
        : drv_(std::move(driving)), cf_(std::move(coeffs)), kind_(kind),
          n_(n_interior), spu_(steps_per_unit) {
        if (n_interior < 3) throw std::invalid_argument("ParabolicCocycle: need >= 3 interior nodes");
        if (steps_per_unit < 1) throw std::invalid_argument("ParabolicCocycle: steps_per_unit < 1");
        if (!cf_.diffusion) throw std::invalid_argument("ParabolicCocycle: diffusion coefficient required");
        if (kind_ == BoundaryKind::robin) {
            const DrivingPoint p0 = drv_.sample_point(0);
            if (robin(cf_.robin_left, p0) < 0.0 || robin(cf_.robin_right, p0) < 0.0)
                throw std::invalid_argument("ParabolicCocycle: boundary absorption must be >= 0");
        }
    }

    const DrivingSystem& driving() const { return drv_; }
    BoundaryKind boundary() const { return kind_; }
    int interior() const { return n_; }
    int steps_per_unit() const { return spu_; }
    int state_size() const { return kind_ == BoundaryKind::dirichlet ? n_ : n_ + 2; }
    double h() const { return 1.0 / (n_ + 1); }
    const ParabolicCoefficients& coefficients() const { return cf_; }

    GridFunction make_state(double fill = 0.0) const { return GridFunction(kind_, n_, fill); }

    // Full spatial operator (reaction term included) at one instant.
    TriDiag assemble(const DrivingPoint& p) const {
        TriDiag op = assemble_core(p);
        if (cf_.zero_order) {
            GridFunction probe = make_state();
            for (int i = 0; i < op.n; ++i) op.di[i] += cf_.zero_order(p, probe.node_x(i));
        }
        return op;
    }

    GridFunction propagate(const DrivingPoint& w, double t, const GridFunction& u0) const {
        return run(w, t, u0, Mode::full, spu_, false);
    }

    GridFunction propagate_zero_order_free(const DrivingPoint& w, double t, const GridFunction& u0) const {
        return run(w, t, u0, Mode::zero_free, spu_, false);
    }

    // Transpose of the composed forward step matrices along the path ending at
    // the given anchor; realizes the dual propagator exactly.
    GridFunction propagate_adjoint(const DrivingPoint& w, double t, const GridFunction& u0) const {
        return run(w, t, u0, Mode::full, spu_, true);
    }

    GridFunction propagate_adjoint_zero_order_free(const DrivingPoint& w, double t, const GridFunction& u0) const {
        return run(w, t, u0, Mode::zero_free, spu_, true);
    }

    // Independent route to the dual propagator: discretize the adjoint problem
    // itself (flux and drift roles swapped, time reversed) and run it forward.
    // Agrees with the transpose route to discretization accuracy only.
    GridFunction propagate_adjoint_via_pde(const DrivingPoint& w, double t, const GridFunction& u0) const {
        DrivingConfig rc = drv_.config();
        for (double& a : rc.frequencies) a = -a;
        DrivingSystem reversed(rc);
        ParabolicCoefficients swapped;
        swapped.diffusion = cf_.diffusion;
        swapped.flux_drift = negate(cf_.advection);
        swapped.advection = negate(cf_.flux_drift);
        swapped.zero_order = cf_.zero_order;
        swapped.zero_order_lo = cf_.zero_order_lo;
        swapped.zero_order_hi = cf_.zero_order_hi;
        swapped.robin_left = cf_.robin_left;
        swapped.robin_right = cf_.robin_right;
        swapped.ellipticity_floor = cf_.ellipticity_floor;
        ParabolicCocycle adj(reversed, std::move(swapped), kind_, n_, spu_);
        return adj.propagate(reversed.make_point(w.x), t, u0);
    }

    // Positivity watchdog: rerun with a halved step until no node undershoots
    // the cone beyond round-off scale.
    MonitoredResult propagate_monitored(const DrivingPoint& w, double t, const GridFunction& u0,
                                        int max_halvings = 4) const {
        double scale = 0.0;
        for (double x : u0.v) scale = std::max(scale, std::abs(x));
        int spu = spu_;
        MonitoredResult res;
        for (int attempt = 0;; ++attempt) {
            res.u = run(w, t, u0, Mode::full, spu, false);
            res.min_value = *std::min_element(res.u.v.begin(), res.u.v.end());
            res.halvings = attempt;
            res.steps_per_unit = spu;
            if (res.min_value >= -1e-12 * std::max(scale, 1e-300) || attempt == max_halvings) return res;
            spu *= 2;
        }
    }

    // Largest time step for which one Crank-Nicolson step is provably
    // cone-preserving (explicit half nonnegative, implicit half an M-matrix);
    // zero when the mesh cannot support it at all.
    double positivity_step_bound(const DrivingPoint& w, double horizon) const {
        double bound = std::numeric_limits<double>::infinity();
        const int samples = 17;
        for (int s = 0; s < samples; ++s) {
            TriDiag op = assemble_split(drv_.advance(w, horizon * s / (samples - 1))).first;
            for (int i = 0; i < op.n; ++i) {
                if ((i > 0 && op.lo[i] < 0.0) || (i + 1 < op.n && op.up[i] < 0.0)) return 0.0;
                if (op.di[i] < 0.0) bound = std::min(bound, 2.0 / (-op.di[i]));
            }
        }
        return bound;
    }

    // Ordering check against a partner that differs only in the reaction term,
    // plus the envelope sandwich around the zero-order-free flow.
    ComparisonReport check_comparison(const ParabolicCocycle& larger, const DrivingPoint& w, double t,
                                      const GridFunction& u0) const {
        if (larger.kind_ != kind_ || larger.n_ != n_ || larger.spu_ != spu_)
            throw std::invalid_argument("check_comparison: discretizations differ");
        if (!u0.in_cone(0.0)) throw std::invalid_argument("check_comparison: state must lie in the cone");
        verify_same_but_reaction(larger, w, t);

        const GridFunction s1 = propagate(w, t, u0);
        const GridFunction s2 = larger.propagate(w, t, u0);
        ComparisonReport rep;
        rep.order_margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < s1.size(); ++i)
            rep.order_margin = std::min(rep.order_margin, s2.v[i] - s1.v[i]);

        const GridFunction free = propagate_zero_order_free(w, t, u0);
        const double philo = envelope_integral(cf_.zero_order_lo, w, t);
        const double phihi = envelope_integral(cf_.zero_order_hi, w, t);
        rep.sandwich_lower = std::numeric_limits<double>::infinity();
        rep.sandwich_upper = std::numeric_limits<double>::infinity();
        const double elo = std::exp(philo), ehi = std::exp(phihi);
        for (int i = 0; i < s1.size(); ++i) {
            rep.sandwich_lower = std::min(rep.sandwich_lower, s1.v[i] - elo * free.v[i]);
            rep.sandwich_upper = std::min(rep.sandwich_upper, ehi * free.v[i] - s1.v[i]);
        }
        return rep;
    }

    // Sup/inf ratio of the zero-order-free solution against the reference
    // profile after one time unit, over interior nodes.
    double harnack_quotient(const DrivingPoint& w, const GridFunction& u0, double t = 1.0) const {
        if (!u0.in_cone(0.0)) throw std::invalid_argument("harnack_quotient: state must lie in the cone");
        double mass = 0.0;
        for (double x : u0.v) mass += x;
        if (mass == 0.0) throw std::invalid_argument("harnack_quotient: state must be nonzero");
        const GridFunction num = propagate_zero_order_free(w, t, u0);
        const GridFunction den = propagate_zero_order_free(w, t, reference_profile());
        const int lo = kind_ == BoundaryKind::dirichlet ? 0 : 1;
        const int hi = kind_ == BoundaryKind::dirichlet ? num.size() : num.size() - 1;
        double qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
        for (int i = lo; i < hi; ++i) {
            if (den.v[i] < 1e-300) throw NumericalError("harnack_quotient: degenerate reference solution");
            const double q = num.v[i] / den.v[i];
            qmin = std::min(qmin, q);
            qmax = std::max(qmax, q);
        }
        if (qmin < 1e-300) throw NumericalError("harnack_quotient: degenerate solution");
        return qmax / qmin;
    }

    // Positive unit profile: the lowest diffusion mode under Dirichlet
    // conditions, a constant otherwise.
    GridFunction reference_profile() const {
        GridFunction e = make_state();
        if (kind_ == BoundaryKind::dirichlet) {
            for (int i = 0; i < e.size(); ++i) e.v[i] = std::sin(3.14159265358979323846 * e.node_x(i));
        } else {
            for (double& x : e.v) x = 1.0;
        }
        const double nrm = norm_h(e);
        for (double& x : e.v) x /= nrm;
        return e;
    }

private:
    enum class Mode { full, zero_free };

    static SpaceTimeFn negate(const SpaceTimeFn& f) {
        if (!f) return SpaceTimeFn{};
        return [f](const DrivingPoint& p, double x) { return -f(p, x); };
    }

    static double robin(const TimeFn& f, const DrivingPoint& p) { return f ? f(p) : 0.0; }
    double st(const SpaceTimeFn& f, const DrivingPoint& p, double x) const { return f ? f(p, x) : 0.0; }

    int aligned_steps(double t, int spu) const {
        if (t < 0.0) throw std::domain_error("ParabolicCocycle: the semiflow is forward-only (t >= 0)");
        const double raw = t * spu;
        const long long steps = std::llround(raw);
        if (std::abs(raw - static_cast<double>(steps)) > 1e-9 * std::max(1.0, raw))
            throw std::invalid_argument("ParabolicCocycle: t must be a multiple of the time step");
        return static_cast<int>(steps);
    }

    // Conservative face-flux assembly of everything except the reaction term.
    TriDiag assemble_core(const DrivingPoint& p) const {
        const double hh = h();
        const int sz = state_size();
        TriDiag op(sz);
        GridFunction probe = make_state();

        auto face = [&](double x, double& a, double& f) {
            a = st(cf_.diffusion, p, x);
            if (a < cf_.ellipticity_floor)
                throw EllipticityError("diffusion coefficient fell below the ellipticity floor at x=" + std::to_string(x));
            f = st(cf_.flux_drift, p, x);
        };

        const int ilo = kind_ == BoundaryKind::dirichlet ? 0 : 1;
        const int ihi = kind_ == BoundaryKind::dirichlet ? sz - 1 : sz - 2;
        for (int i = ilo; i <= ihi; ++i) {
            const double x = probe.node_x(i);
            double ar, fr, al, fl;
            face(x + 0.5 * hh, ar, fr);
            face(x - 0.5 * hh, al, fl);
            const double b = st(cf_.advection, p, x);
            double up = ar / (hh * hh) + fr / (2.0 * hh);
            double lo = al / (hh * hh) - fl / (2.0 * hh);
            double di = -(ar + al) / (hh * hh) + (fr - fl) / (2.0 * hh);
            up += b / (2.0 * hh);
            lo -= b / (2.0 * hh);
            if (kind_ == BoundaryKind::dirichlet) {
                // homogeneous boundary values: the first and last stencils simply drop them
                if (i > 0) op.lo[i] = lo;
                if (i + 1 < sz) op.up[i] = up;
            } else {
                op.lo[i] = lo;
                op.up[i] = up;
            }
            op.di[i] = di;
        }

        if (kind_ != BoundaryKind::dirichlet) {
            // Boundary rows balance the first interior face flux against the
            // absorption flux. The flat 1/h scaling (rather than the half-cell
            // 2/h) keeps the pure-diffusion operator symmetric in the plain
            // grid inner product while preserving zero row sums.
            const double d0l = kind_ == BoundaryKind::robin ? robin(cf_.robin_left, p) : 0.0;
            const double d0r = kind_ == BoundaryKind::robin ? robin(cf_.robin_right, p) : 0.0;
            if (d0l < 0.0 || d0r < 0.0)
                throw std::invalid_argument("ParabolicCocycle: boundary absorption must be >= 0");
            double af, ff;
            face(0.5 * hh, af, ff);
            const double b0 = st(cf_.advection, p, 0.0);
            op.up[0] = (af / hh + 0.5 * ff) / hh + b0 / hh;
            op.di[0] = (-af / hh + 0.5 * ff - d0l) / hh - b0 / hh;

            face(1.0 - 0.5 * hh, af, ff);
            const double b1 = st(cf_.advection, p, 1.0);
            op.lo[sz - 1] = (af / hh - 0.5 * ff) / hh - b1 / hh;
            op.di[sz - 1] = (-d0r - af / hh - 0.5 * ff) / hh + b1 / hh;
        }
        return op;
    }

    double mean_zero_order(const DrivingPoint& p) const {
        if (!cf_.zero_order) return 0.0;
        GridFunction probe = make_state();
        double s = 0.0;
        for (int i = 0; i < probe.size(); ++i) s += cf_.zero_order(p, probe.node_x(i));
        return s / probe.size();
    }

    // Core operator plus the mean-free part of the reaction term; returns the
    // removed spatial mean alongside.
    std::pair<TriDiag, double> assemble_split(const DrivingPoint& p) const {
        TriDiag op = assemble_core(p);
        const double mean = mean_zero_order(p);
        if (cf_.zero_order) {
            GridFunction probe = make_state();
            for (int i = 0; i < op.n; ++i) op.di[i] += cf_.zero_order(p, probe.node_x(i)) - mean;
        }
        return {std::move(op), mean};
    }

    GridFunction run(const DrivingPoint& w, double t, const GridFunction& u0, Mode mode, int spu,
                     bool adjoint) const {
        if (u0.kind != kind_ || u0.interior != n_)
            throw std::invalid_argument("ParabolicCocycle: state shape mismatch");
        const int steps = aligned_steps(t, spu);
        GridFunction out = u0;
        if (steps == 0) return out;
        const double dt = 1.0 / spu;
        const DrivingPoint anchor = adjoint ? drv_.advance(w, -t) : w;

        const bool with_c0 = (mode == Mode::full) && static_cast<bool>(cf_.zero_order);
        auto at_step = [&](int k) { return drv_.advance(anchor, static_cast<double>(k) / spu); };
        auto at_mid = [&](int k) { return drv_.advance(anchor, static_cast<double>(2 * k + 1) / (2 * spu)); };

        auto load = [&](int k) -> std::pair<TriDiag, double> {
            if (with_c0) return assemble_split(at_step(k));
            return {assemble_core(at_step(k)), 0.0};
        };

        std::vector<double>& u = out.v;
        std::vector<double> rhs(u.size());

        if (!adjoint) {
            auto cur = load(0);
            for (int k = 0; k < steps; ++k) {
                auto next = load(k + 1);
                explicit_half(cur.first, dt, u, rhs);
                implicit_half(next.first, dt, rhs);
                u = rhs;
                if (with_c0) {
                    const double mid = mean_zero_order(at_mid(k));
                    const double phi = (dt / 6.0) * (cur.second + 4.0 * mid + next.second);
                    const double g = std::exp(phi);
                    for (double& x : u) x *= g;
                }
                cur = std::move(next);
            }
        } else {
            auto upper = load(steps);
            for (int k = steps - 1; k >= 0; --k) {
                auto lower = load(k);
                implicit_half_transpose(upper.first, dt, u);
                explicit_half_transpose(lower.first, dt, u, rhs);
                u = rhs;
                if (with_c0) {
                    const double mid = mean_zero_order(at_mid(k));
                    const double phi = (dt / 6.0) * (lower.second + 4.0 * mid + upper.second);
                    const double g = std::exp(phi);
                    for (double& x : u) x *= g;
                }
                upper = std::move(lower);
            }
        }
        return out;
    }

    static void explicit_half(const TriDiag& op, double dt, const std::vector<double>& u,
                              std::vector<double>& rhs) {
        op.apply(u, rhs);
        for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = u[i] + 0.5 * dt * rhs[i];
    }

    static void implicit_half(const TriDiag& op, double dt, std::vector<double>& rhs) {
        TriDiag s(op.n);
        for (int i = 0; i < op.n; ++i) {
            s.lo[i] = -0.5 * dt * op.lo[i];
            s.di[i] = 1.0 - 0.5 * dt * op.di[i];
            s.up[i] = -0.5 * dt * op.up[i];
        }
        s.solve_in_place(rhs);
    }

    static void implicit_half_transpose(const TriDiag& op, double dt, std::vector<double>& rhs) {
        TriDiag s(op.n);
        for (int i = 0; i < op.n; ++i) {
            s.lo[i] = -0.5 * dt * op.lo[i];
            s.di[i] = 1.0 - 0.5 * dt * op.di[i];
            s.up[i] = -0.5 * dt * op.up[i];
        }
        s.solve_transpose_in_place(rhs);
    }

    static void explicit_half_transpose(const TriDiag& op, double dt, const std::vector<double>& u,
                                        std::vector<double>& rhs) {
        op.apply_transpose(u, rhs);
        for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = u[i] + 0.5 * dt * rhs[i];
    }

    void verify_same_but_reaction(const ParabolicCocycle& other, const DrivingPoint& w, double t) const {
        GridFunction probe = make_state();
        const int time_samples = 9;
        for (int s = 0; s < time_samples; ++s) {
            const DrivingPoint p = drv_.advance(w, t * s / (time_samples - 1));
            for (int i = 0; i < probe.size(); ++i) {
                const double x = probe.node_x(i);
                if (st(cf_.diffusion, p, x) != st(other.cf_.diffusion, p, x) ||
                    st(cf_.flux_drift, p, x) != st(other.cf_.flux_drift, p, x) ||
                    st(cf_.advection, p, x) != st(other.cf_.advection, p, x))
                    throw std::invalid_argument("check_comparison: partners must differ only in the reaction term");
                if (st(cf_.zero_order, p, x) > st(other.cf_.zero_order, p, x))
                    throw std::invalid_argument("check_comparison: reaction terms are not ordered");
            }
            if (kind_ == BoundaryKind::robin &&
                (robin(cf_.robin_left, p) != robin(other.cf_.robin_left, p) ||
                 robin(cf_.robin_right, p) != robin(other.cf_.robin_right, p)))
                throw std::invalid_argument("check_comparison: partners must differ only in the reaction term");
        }
    }

    // Envelope integral accumulated with the same per-step rule as the
    // integrating factor, so the space-independent case matches it exactly.
    double envelope_integral(const TimeFn& env, const DrivingPoint& w, double t) const {
        if (!env) return 0.0;
        const int steps = aligned_steps(t, spu_);
        const double dt = 1.0 / spu_;
        double acc = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double a = env(drv_.advance(w, static_cast<double>(k) / spu_));
            const double m = env(drv_.advance(w, static_cast<double>(2 * k + 1) / (2 * spu_)));
            const double b = env(drv_.advance(w, static_cast<double>(k + 1) / spu_));
            acc += (dt / 6.0) * (a + 4.0 * m + b);
        }
        return acc;
    }

    DrivingSystem drv_;
    ParabolicCoefficients cf_;
    BoundaryKind kind_;
    int n_;
    int spu_;
};

}  // namespace floq
