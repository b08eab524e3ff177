#pragma once

#include <cmath>
#include <random>
#include <utility>

#include "floq/delay_cocycle.hpp"
#include "floq/grid_function.hpp"
#include "floq/parabolic_cocycle.hpp"
#include "floq/segment.hpp"

namespace floq {

// Adapters giving the spectral estimators a uniform view of a cocycle: a flow,
// a norm, the cone, and reference vectors.

struct DelayPropagator {
    using State = Segment;
    static constexpr bool has_adjoint = false;

    const DelayCocycle* coc = nullptr;

    const DrivingSystem& driving() const { return coc->driving(); }

    State flow(const DrivingPoint& at, double duration, const State& u) const {
        return coc->propagate(at, duration, u);
    }

    double norm(const State& u) const { return u.sup_norm(); }
    bool in_cone(const State& u, double tol) const { return u.in_cone(tol); }

    State cone_reference() const {
        Segment e(coc->components(), coc->grid(), 1.0 / std::sqrt(static_cast<double>(coc->components())));
        return e;
    }

    int dimension() const { return coc->components() * (coc->grid() + 1); }

    State basis_state(int idx) const {
        Segment e(coc->components(), coc->grid(), 0.0);
        e.v[idx] = 1.0;
        return e;
    }

    State random_cone_state(std::mt19937_64& rng, bool rough = true) const {
        Segment u(coc->components(), coc->grid());
        if (rough) {
            for (double& x : u.v) x = uniform01(rng);
        } else {
            for (int i = 0; i < u.comps; ++i) {
                const double a = 2.0 * uniform01(rng) - 1.0;
                const double b = 2.0 * uniform01(rng) - 1.0;
                const double c = 2.0 * uniform01(rng) - 1.0;
                for (int k = 0; k <= u.grid; ++k) {
                    const double tau = u.node_time(k);
                    u.at(i, k) = std::exp(c + a * std::cos(3.141592653589793 * tau) +
                                          b * std::sin(3.141592653589793 * tau));
                }
            }
        }
        return u;
    }
};

struct ParabolicPropagator {
    using State = GridFunction;
    static constexpr bool has_adjoint = true;

    const ParabolicCocycle* coc = nullptr;

    const DrivingSystem& driving() const { return coc->driving(); }

    State flow(const DrivingPoint& at, double duration, const State& u) const {
        return coc->propagate(at, duration, u);
    }

    State adjoint_flow(const DrivingPoint& at, double duration, const State& u) const {
        return coc->propagate_adjoint(at, duration, u);
    }

    double norm(const State& u) const { return norm_h(u); }
    double pair(const State& a, const State& b) const { return inner_h(a, b); }
    bool in_cone(const State& u, double tol) const { return u.in_cone(tol); }

    State cone_reference() const { return coc->reference_profile(); }
    State dual_reference() const { return coc->reference_profile(); }

    // Sign-changing profile used to seed the complementary iteration.
    State secondary_seed() const {
        GridFunction g = coc->make_state();
        for (int i = 0; i < g.size(); ++i) g.v[i] = std::sin(2.0 * 3.141592653589793 * g.node_x(i));
        const double n = norm_h(g);
        for (double& x : g.v) x /= n;
        return g;
    }

    int dimension() const { return coc->state_size(); }

    State basis_state(int idx) const {
        GridFunction e = coc->make_state();
        e.v[idx] = 1.0;
        return e;
    }

    State random_cone_state(std::mt19937_64& rng, bool rough = false) const {
        GridFunction u = coc->make_state();
        if (rough) {
            for (double& x : u.v) x = uniform01(rng);
            if (u.kind == BoundaryKind::dirichlet) {
                // keep rough draws compatible with the absorbing boundary
                for (int i = 0; i < u.size(); ++i) u.v[i] *= std::sin(3.141592653589793 * u.node_x(i));
            }
        } else {
            const double a = 2.0 * uniform01(rng) - 1.0;
            const double b = 2.0 * uniform01(rng) - 1.0;
            const double c = uniform01(rng);
            for (int i = 0; i < u.size(); ++i) {
                const double x = u.node_x(i);
                double val = std::exp(c + a * std::cos(3.141592653589793 * x) +
                                      b * std::sin(3.141592653589793 * x));
                if (u.kind == BoundaryKind::dirichlet) val *= std::sin(3.141592653589793 * x);
                u.v[i] = val;
            }
        }
        return u;
    }
};

}  // namespace floq
