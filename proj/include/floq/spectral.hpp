#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "floq/driving.hpp"
#include "floq/errors.hpp"
#include "floq/quadrature.hpp"

namespace floq {

struct PairingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Projective distance on the cone: ln of the product of the two extremal
// nodewise ratios. Infinite when the supports differ; entries below zero are
// treated as zero.
template <class State>
double hilbert_metric(const State& u, const State& v) {
    const auto& a = state_values(u);
    const auto& b = state_values(v);
    if (a.size() != b.size()) throw std::invalid_argument("hilbert_metric: shape mismatch");
    double max_uv = 0.0, max_vu = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = std::max(a[i], 0.0);
        const double y = std::max(b[i], 0.0);
        if (x == 0.0 && y == 0.0) continue;
        any = true;
        if (y == 0.0 || x == 0.0) return std::numeric_limits<double>::infinity();
        max_uv = std::max(max_uv, x / y);
        max_vu = std::max(max_vu, y / x);
    }
    if (!any) return 0.0;
    return std::log(max_uv * max_vu);
}

struct ExponentOptions {
    double horizon = 100.0;       // accumulation window
    double delta = 1.0;           // renormalization cadence
    double burn_in = 0.0;         // discarded lead-in, in time units
    double floor = -1e6;          // running averages below this flag -infinity
    bool record_trace = true;
};

struct ExponentTracePoint {
    double t = 0.0;          // time since the accumulation window opened
    double log_accum = 0.0;  // accumulated log growth
    double running_avg = 0.0;
};

struct ExponentEstimate {
    double lambda = 0.0;
    double horizon = 0.0;
    double delta = 1.0;
    double burn_in = 0.0;
    bool minus_infinity = false;
    std::vector<ExponentTracePoint> trace;
};

namespace detail {

inline int steps_of(double span, double delta, const char* what) {
    const double raw = span / delta;
    const long long k = std::llround(raw);
    if (std::abs(raw - static_cast<double>(k)) > 1e-9 * std::max(1.0, std::abs(raw)))
        throw std::invalid_argument(std::string(what) + " must be a multiple of the cadence");
    return static_cast<int>(k);
}

template <class State>
void normalize_inplace(State& u, double nrm) {
    for (double& x : state_values(u)) x /= nrm;
}

// Renormalized power iteration along the orbit; `stepper(k, u)` applies the
// cadence-delta evolution operator with orbit index k.
template <class State, class Stepper, class Norm>
ExponentEstimate exponent_loop(State u, const Stepper& stepper, const Norm& norm,
                               const ExponentOptions& opt) {
    ExponentEstimate est;
    est.horizon = opt.horizon;
    est.delta = opt.delta;
    est.burn_in = opt.burn_in;

    const int burn_steps = steps_of(opt.burn_in, opt.delta, "burn-in");
    const int acc_steps = steps_of(opt.horizon, opt.delta, "horizon");
    {
        const double n0 = norm(u);
        if (n0 == 0.0) throw std::invalid_argument("top_exponent: zero initial state");
        normalize_inplace(u, n0);
    }
    double accum = 0.0;
    for (int k = 0; k < burn_steps + acc_steps; ++k) {
        u = stepper(k, u);
        const double n = norm(u);
        if (n <= 0.0 || !std::isfinite(n)) {
            est.minus_infinity = true;
            est.lambda = opt.floor;
            return est;
        }
        normalize_inplace(u, n);
        if (k < burn_steps) continue;
        accum += std::log(n);
        const double elapsed = (k - burn_steps + 1) * opt.delta;
        const double avg = accum / elapsed;
        if (opt.record_trace) est.trace.push_back({elapsed, accum, avg});
        if (avg < opt.floor) {
            est.minus_infinity = true;
            est.lambda = avg;
            return est;
        }
    }
    est.lambda = accum / opt.horizon;
    return est;
}

}  // namespace detail

// Growth rate of the cocycle along the orbit of a cone vector.
template <class P>
ExponentEstimate top_exponent(const P& prop, const DrivingPoint& omega, typename P::State u0,
                              const ExponentOptions& opt = {}) {
    if (!prop.in_cone(u0, 0.0)) throw std::invalid_argument("top_exponent: state must lie in the cone");
    if (prop.norm(u0) == 0.0) throw std::invalid_argument("top_exponent: zero initial state");
    const auto& drv = prop.driving();
    auto stepper = [&](int k, const typename P::State& u) {
        return prop.flow(drv.advance(omega, k * opt.delta), opt.delta, u);
    };
    return detail::exponent_loop(std::move(u0), stepper, [&](const typename P::State& u) { return prop.norm(u); }, opt);
}

// Growth rate of the dual cocycle (which covers time reversal).
template <class P>
ExponentEstimate top_exponent_adjoint(const P& prop, const DrivingPoint& omega, typename P::State u0,
                                      const ExponentOptions& opt = {}) {
    static_assert(P::has_adjoint, "dual estimates need an adjoint propagator");
    if (!prop.in_cone(u0, 0.0)) throw std::invalid_argument("top_exponent: state must lie in the cone");
    const auto& drv = prop.driving();
    auto stepper = [&](int k, const typename P::State& u) {
        return prop.adjoint_flow(drv.advance(omega, -k * opt.delta), opt.delta, u);
    };
    return detail::exponent_loop(std::move(u0), stepper, [&](const typename P::State& u) { return prop.norm(u); }, opt);
}

template <class State>
struct PullbackResult {
    State w;
    int depth = 0;
    double residual = 0.0;
    std::vector<double> residual_trace;
};

// Normalized push of the cone reference from ever deeper starts; stops when
// successive approximants agree in the projective metric.
template <class P>
PullbackResult<typename P::State> pullback_floquet(const P& prop, const DrivingPoint& omega,
                                                   int max_depth = 60, double tol = 1e-10) {
    const auto& drv = prop.driving();
    auto push = [&](int depth) {
        typename P::State v = prop.cone_reference();
        const DrivingPoint start = drv.advance(omega, -static_cast<double>(depth));
        for (int j = 0; j < depth; ++j) {
            v = prop.flow(drv.advance(start, j), 1.0, v);
            const double n = prop.norm(v);
            if (n <= 0.0 || !std::isfinite(n)) throw NumericalError("pullback_floquet: degenerate push");
            detail::normalize_inplace(v, n);
        }
        return v;
    };
    PullbackResult<typename P::State> res;
    typename P::State prev = push(1);
    std::vector<double> trace;
    for (int depth = 2; depth <= max_depth; ++depth) {
        typename P::State cur = push(depth);
        const double d = hilbert_metric(cur, prev);
        trace.push_back(d);
        if (d <= tol) {
            res.w = std::move(cur);
            res.depth = depth;
            res.residual = d;
            res.residual_trace = std::move(trace);
            return res;
        }
        prev = std::move(cur);
    }
    throw ConvergenceError("pullback_floquet: no convergence within depth " + std::to_string(max_depth),
                           std::move(trace));
}

// Dual pullback: the dual reference is transported backwards from ever later
// anchor points, which is forwards for the dual cocycle.
template <class P>
PullbackResult<typename P::State> dual_floquet(const P& prop, const DrivingPoint& omega,
                                               int max_depth = 60, double tol = 1e-10) {
    static_assert(P::has_adjoint, "dual_floquet needs an adjoint propagator");
    const auto& drv = prop.driving();
    auto push = [&](int depth) {
        typename P::State v = prop.dual_reference();
        for (int j = 0; j < depth; ++j) {
            v = prop.adjoint_flow(drv.advance(omega, static_cast<double>(depth - j)), 1.0, v);
            const double n = prop.norm(v);
            if (n <= 0.0 || !std::isfinite(n)) throw NumericalError("dual_floquet: degenerate push");
            detail::normalize_inplace(v, n);
        }
        return v;
    };
    PullbackResult<typename P::State> res;
    typename P::State prev = push(1);
    std::vector<double> trace;
    for (int depth = 2; depth <= max_depth; ++depth) {
        typename P::State cur = push(depth);
        const double d = hilbert_metric(cur, prev);
        trace.push_back(d);
        if (d <= tol) {
            res.w = std::move(cur);
            res.depth = depth;
            res.residual = d;
            res.residual_trace = std::move(trace);
            return res;
        }
        prev = std::move(cur);
    }
    throw ConvergenceError("dual_floquet: no convergence within depth " + std::to_string(max_depth),
                           std::move(trace));
}

template <class State>
struct FloquetSample {
    State w;
    State w_star;
    double pairing = 0.0;
    int depth = 0;
    int dual_depth = 0;
    double residual = 0.0;
    double dual_residual = 0.0;
};

template <class P>
FloquetSample<typename P::State> floquet_pair(const P& prop, const DrivingPoint& omega,
                                              int max_depth = 60, double tol = 1e-10) {
    auto pw = pullback_floquet(prop, omega, max_depth, tol);
    auto pd = dual_floquet(prop, omega, max_depth, tol);
    FloquetSample<typename P::State> s{std::move(pw.w), std::move(pd.w), 0.0,
                                       pw.depth, pd.depth, pw.residual, pd.residual};
    s.pairing = prop.pair(s.w, s.w_star);
    return s;
}

struct AgreementResult {
    ExponentEstimate forward;
    ExponentEstimate dual;
    double gap = 0.0;
};

template <class P>
AgreementResult exponent_agreement(const P& prop, const DrivingPoint& omega, const ExponentOptions& opt = {}) {
    AgreementResult r;
    r.forward = top_exponent(prop, omega, prop.cone_reference(), opt);
    r.dual = top_exponent_adjoint(prop, omega, prop.dual_reference(), opt);
    r.gap = std::abs(r.forward.lambda - r.dual.lambda);
    return r;
}

// Rank-one projection with range {u : <u, w*> = 0} and kernel spanned by w.
template <class State, class Pairing>
class RankOneProjection {
public:
    RankOneProjection(State w, State w_star, const Pairing& pair)
        : w_(std::move(w)), w_star_(std::move(w_star)), pair_(pair) {
        pairing_ = pair_(w_, w_star_);
        if (!(pairing_ > 0.0)) throw PairingError("projection pairing is not positive");
    }

    double pairing() const { return pairing_; }
    const State& kernel_vector() const { return w_; }
    const State& annihilator() const { return w_star_; }

    void apply(State& u) const {
        const double c = pair_(u, w_star_) / pairing_;
        auto& uv = state_values(u);
        const auto& wv = state_values(w_);
        for (std::size_t i = 0; i < uv.size(); ++i) uv[i] -= c * wv[i];
    }

    // Norm of the projection in the pairing's Hilbert norm for unit w, w*.
    double norm(double norm_w, double norm_w_star) const { return norm_w * norm_w_star / pairing_; }

private:
    State w_, w_star_;
    Pairing pair_;
    double pairing_ = 0.0;
};

template <class P>
auto make_projection(const P& prop, typename P::State w, typename P::State w_star) {
    auto pairing = [&prop](const typename P::State& a, const typename P::State& b) { return prop.pair(a, b); };
    return RankOneProjection<typename P::State, decltype(pairing)>(std::move(w), std::move(w_star), pairing);
}

struct SeparationOptions {
    double horizon = 100.0;
    double burn_in = 0.0;
    int refresh_cadence = 10;  // dual pullback refresh, in unit steps
    int pullback_depth = 60;
    double pullback_tol = 1e-10;
    double floor = -1e6;
    // The projection is reapplied this many times per unit step. Between
    // projections the principal direction outgrows the complement by
    // exp(sigma * substep); subdividing keeps the subtraction far away from
    // catastrophic cancellation. Must divide the flow's step resolution.
    int projection_substeps = 8;
};

struct SeparationEstimate {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double sigma = 0.0;
    bool minus_infinity = false;
    // (t, (1/t) ln ||projection at theta_t omega||)
    std::vector<std::pair<double, double>> temperedness_trace;
    double temperedness_slope = 0.0;
};

// Runs the principal vector forward while iterating a complementary vector
// through the evolving projection; the dual vector is refreshed by a fresh
// pullback every refresh_cadence steps and held in between.
template <class P>
SeparationEstimate separation(const P& prop, const DrivingPoint& omega, const SeparationOptions& opt = {}) {
    static_assert(P::has_adjoint, "separation needs an adjoint propagator");
    const auto& drv = prop.driving();
    const int total = detail::steps_of(opt.burn_in + opt.horizon, 1.0, "separation window");
    const int burn = detail::steps_of(opt.burn_in, 1.0, "burn-in");

    typename P::State w = pullback_floquet(prop, omega, opt.pullback_depth, opt.pullback_tol).w;
    typename P::State w_star = dual_floquet(prop, omega, opt.pullback_depth, opt.pullback_tol).w;

    typename P::State v = prop.secondary_seed();
    {
        auto proj = make_projection(prop, w, w_star);
        proj.apply(v);
        const double n = prop.norm(v);
        if (n == 0.0) throw NumericalError("separation: complementary seed vanished");
        detail::normalize_inplace(v, n);
    }

    SeparationEstimate est;
    double accum1 = 0.0, accum2 = 0.0;
    const int sub = std::max(1, opt.projection_substeps);
    for (int k = 0; k < total; ++k) {
        bool dead = false;
        for (int j = 0; j < sub && !dead; ++j) {
            const DrivingPoint anchor =
                drv.advance(omega, static_cast<double>(k * sub + j) / sub);
            w = prop.flow(anchor, 1.0 / sub, w);
            const double r1 = prop.norm(w);
            detail::normalize_inplace(w, r1);

            const auto proj = make_projection(prop, w, w_star);
            v = prop.flow(anchor, 1.0 / sub, v);
            proj.apply(v);
            const double r2 = prop.norm(v);
            if (r2 <= 0.0 || !std::isfinite(r2)) {
                est.minus_infinity = true;
                dead = true;
                break;
            }
            detail::normalize_inplace(v, r2);
            if (k >= burn) {
                accum1 += std::log(r1);
                accum2 += std::log(r2);
            }
        }
        if (dead) break;

        if (opt.refresh_cadence > 0 && (k + 1) % opt.refresh_cadence == 0)
            w_star = dual_floquet(prop, drv.advance(omega, static_cast<double>(k + 1)),
                                  opt.pullback_depth, opt.pullback_tol).w;

        const double t = static_cast<double>(k + 1);
        est.temperedness_trace.emplace_back(t, std::log(1.0 / prop.pair(w, w_star)) / t);
    }
    est.lambda1 = accum1 / opt.horizon;
    est.lambda2 = est.minus_infinity ? opt.floor : accum2 / opt.horizon;
    est.sigma = est.lambda1 - est.lambda2;

    // slope of the temperedness surrogate over the second half of the run
    std::vector<double> xs, ys;
    for (const auto& [t, val] : est.temperedness_trace)
        if (t >= 0.5 * (opt.burn_in + opt.horizon)) {
            xs.push_back(t);
            ys.push_back(val);
        }
    if (xs.size() >= 2) est.temperedness_slope = fit_line(xs, ys).slope;
    return est;
}

// Two-sided orbit through the principal vector with explicit log-scale
// bookkeeping; the backward half reuses the pullback normalizers.
template <class P>
class EntireOrbit {
public:
    EntireOrbit(const P& prop, const DrivingPoint& omega, int t_back, int t_fwd,
                int pullback_depth = 60, double pullback_tol = 1e-10)
        : prop_(prop), omega_(omega), back_(t_back) {
        const auto& drv = prop.driving();
        const DrivingPoint base = drv.advance(omega, -static_cast<double>(t_back));
        states_.push_back(pullback_floquet(prop, base, pullback_depth, pullback_tol).w);
        for (int j = 0; j < t_back + t_fwd; ++j) {
            auto next = prop.flow(drv.advance(base, static_cast<double>(j)), 1.0, states_.back());
            const double n = prop.norm(next);
            if (n <= 0.0 || !std::isfinite(n)) throw NumericalError("entire orbit: degenerate step");
            detail::normalize_inplace(next, n);
            log_rho_.push_back(std::log(n));
            states_.push_back(std::move(next));
        }
        log_scale_.assign(states_.size(), 0.0);
        for (std::size_t j = 1; j < states_.size(); ++j) log_scale_[j] = log_scale_[j - 1] + log_rho_[j - 1];
        const double s0 = log_scale_[static_cast<std::size_t>(t_back)];
        for (double& s : log_scale_) s -= s0;
    }

    int t_back() const { return back_; }
    int t_fwd() const { return static_cast<int>(states_.size()) - 1 - back_; }
    const std::vector<double>& log_rho() const { return log_rho_; }

    // Unit-direction and log-magnitude of the orbit at time t (normalized so
    // the magnitude at t = 0 is one).
    std::pair<typename P::State, double> query(double t) const {
        if (t < -back_ - 1e-12 || t > t_fwd() + 1e-12)
            throw std::domain_error("entire orbit: query outside the constructed window");
        const double jf = std::floor(t + 1e-12);
        const int j = static_cast<int>(jf) + back_;
        const double frac = t - jf;
        if (std::abs(frac) <= 1e-12) return {states_[j], log_scale_[j]};
        const auto& drv = prop_.driving();
        auto u = prop_.flow(drv.advance(omega_, jf), frac, states_[j]);
        const double n = prop_.norm(u);
        if (n <= 0.0) throw NumericalError("entire orbit: degenerate fractional step");
        detail::normalize_inplace(u, n);
        return {std::move(u), log_scale_[j] + std::log(n)};
    }

private:
    const P& prop_;
    DrivingPoint omega_;
    int back_;
    std::vector<typename P::State> states_;
    std::vector<double> log_rho_;
    std::vector<double> log_scale_;
};

struct ContractionReport {
    double max_pre_distance = 0.0;
    double max_post_distance = 0.0;
    double diameter_bound = 0.0;  // 2 ln(distortion)
    bool contraction_ok = true;   // distances never expand under the horizon map
    bool diameter_ok = true;      // post-image distances respect the bound
    bool monotone_ok = true;      // distances keep shrinking under iteration
};

template <class P, class PairGen>
ContractionReport contraction_diagnostic(const P& prop, const DrivingPoint& omega, PairGen&& next_pair,
                                         int n_pairs, int iterations, double horizon, double distortion,
                                         double tol = 1e-9) {
    ContractionReport rep;
    rep.diameter_bound = 2.0 * std::log(distortion);
    const auto& drv = prop.driving();
    for (int p = 0; p < n_pairs; ++p) {
        auto [u, v] = next_pair();
        double d_prev = hilbert_metric(u, v);
        rep.max_pre_distance = std::max(rep.max_pre_distance, d_prev);
        for (int it = 0; it < iterations; ++it) {
            const DrivingPoint anchor = drv.advance(omega, it * horizon);
            u = prop.flow(anchor, horizon, u);
            v = prop.flow(anchor, horizon, v);
            detail::normalize_inplace(u, prop.norm(u));
            detail::normalize_inplace(v, prop.norm(v));
            const double d = hilbert_metric(u, v);
            if (d > d_prev + tol) (it == 0 ? rep.contraction_ok : rep.monotone_ok) = false;
            if (it == 0) {
                rep.max_post_distance = std::max(rep.max_post_distance, d);
                if (d > rep.diameter_bound + tol) rep.diameter_ok = false;
            }
            d_prev = d;
        }
    }
    return rep;
}

}  // namespace floq
