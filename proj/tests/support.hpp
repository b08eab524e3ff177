#pragma once

#include <cmath>
#include <random>

#include "floq/delay_cocycle.hpp"
#include "floq/driving.hpp"
#include "floq/parabolic_cocycle.hpp"

namespace testsup {

using namespace floq;

inline DrivingSystem periodic_driving(double alpha = 1.0) {
    DrivingConfig c;
    c.kind = DrivingKind::periodic;
    c.dimension = 1;
    c.frequencies = {alpha};
    return DrivingSystem(c);
}

inline DrivingSystem torus_driving() {
    DrivingConfig c;
    c.kind = DrivingKind::torus;
    c.dimension = 2;
    c.frequencies = {1.0, std::sqrt(2.0)};
    return DrivingSystem(c);
}

inline MatrixPath constant_path(SmallMatrix m) {
    return [m = std::move(m)](const DrivingPoint&, SmallMatrix& out) { out = m; };
}

inline DelayCocycle constant_delay(const SmallMatrix& a, const SmallMatrix& b, int grid) {
    return DelayCocycle(periodic_driving(), a.n, grid, constant_path(a), constant_path(b));
}

inline DelayCocycle scalar_delay(double a, double b, int grid) {
    SmallMatrix ma(1), mb(1);
    ma(0, 0) = a;
    mb(0, 0) = b;
    return constant_delay(ma, mb, grid);
}

// Quasi-periodically modulated cooperative two-component system.
inline DelayCocycle modulated_delay(int grid) {
    const double tp = 6.283185307179586477;
    MatrixPath a = [tp](const DrivingPoint& p, SmallMatrix& m) {
        if (m.n != 2) m = SmallMatrix(2);
        m(0, 0) = -0.5 + 0.2 * std::sin(tp * p.x[0]);
        m(0, 1) = 0.3 + 0.1 * std::cos(tp * p.x[1]);
        m(1, 0) = 0.2;
        m(1, 1) = -0.4 + 0.1 * std::cos(tp * p.x[0]);
    };
    MatrixPath b = [tp](const DrivingPoint& p, SmallMatrix& m) {
        if (m.n != 2) m = SmallMatrix(2);
        m(0, 0) = 0.5 + 0.2 * std::sin(tp * p.x[0]);
        m(0, 1) = 0.3;
        m(1, 0) = 0.4 + 0.1 * std::sin(tp * p.x[1]);
        m(1, 1) = 0.6 + 0.2 * std::cos(tp * p.x[1]);
    };
    return DelayCocycle(torus_driving(), 2, grid, std::move(a), std::move(b));
}

inline Segment random_segment(int comps, int grid, std::mt19937_64& rng, bool signed_values = false) {
    Segment s(comps, grid);
    for (double& x : s.v) x = signed_values ? 2.0 * uniform01(rng) - 1.0 : uniform01(rng);
    return s;
}

inline ParabolicCocycle heat_cocycle(int interior, int spu, BoundaryKind kind = BoundaryKind::dirichlet) {
    ParabolicCoefficients cf;
    cf.diffusion = [](const DrivingPoint&, double) { return 1.0; };
    cf.ellipticity_floor = 0.5;
    return ParabolicCocycle(periodic_driving(), std::move(cf), kind, interior, spu);
}

// Fully loaded quasi-periodic coefficients (space-time diffusion, flux drift,
// advection, reaction with envelopes, Robin absorption).
inline ParabolicCocycle loaded_parabolic(int interior, int spu, BoundaryKind kind) {
    const double tp = 6.283185307179586477;
    const double pi_ = 3.141592653589793238;
    ParabolicCoefficients cf;
    cf.diffusion = [tp, pi_](const DrivingPoint& p, double x) {
        return 1.0 + 0.2 * std::cos(tp * p.x[0]) * std::cos(pi_ * x);
    };
    cf.flux_drift = [tp](const DrivingPoint& p, double) { return 0.15 * std::sin(tp * p.x[1]); };
    cf.advection = [tp](const DrivingPoint& p, double) { return 0.2 * std::cos(tp * p.x[1]); };
    cf.zero_order = [tp, pi_](const DrivingPoint& p, double x) {
        return 0.3 * std::sin(tp * p.x[0]) + 0.2 * std::sin(tp * p.x[1]) * std::sin(pi_ * x);
    };
    cf.zero_order_lo = [tp](const DrivingPoint& p) {
        return 0.3 * std::sin(tp * p.x[0]) - 0.2 * std::abs(std::sin(tp * p.x[1]));
    };
    cf.zero_order_hi = [tp](const DrivingPoint& p) {
        return 0.3 * std::sin(tp * p.x[0]) + 0.2 * std::abs(std::sin(tp * p.x[1]));
    };
    cf.robin_left = [](const DrivingPoint&) { return 0.5; };
    cf.robin_right = [](const DrivingPoint&) { return 0.5; };
    cf.ellipticity_floor = 0.75;
    return ParabolicCocycle(torus_driving(), std::move(cf), kind, interior, spu);
}

}  // namespace testsup
