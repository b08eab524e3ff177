#pragma once

#include <cmath>
#include <string>

#include "floq/config.hpp"
#include "floq/delay_cocycle.hpp"
#include "floq/driving.hpp"
#include "floq/parabolic_cocycle.hpp"

namespace floq {

inline constexpr double two_pi = 6.283185307179586477;
inline constexpr double pi = 3.141592653589793238;

inline DrivingConfig parse_driving(const KeyValueConfig& kv) {
    DrivingConfig dc;
    const std::string kind = kv.get_string("driving", "kind", "periodic");
    if (kind == "torus")
        dc.kind = DrivingKind::torus;
    else if (kind == "periodic")
        dc.kind = DrivingKind::periodic;
    else if (kind == "random-fourier")
        dc.kind = DrivingKind::random_fourier;
    else
        throw ConfigError("unknown driving kind: " + kind);

    if (dc.kind == DrivingKind::random_fourier) {
        dc.modes = static_cast<int>(kv.get_int("driving", "modes", 8));
        dc.amplitude_decay = kv.get_double("driving", "decay", 1.4);
        dc.seed = kv.get_seed("driving", "seed", 7);
    } else {
        dc.frequencies = kv.get_list("driving", "alpha");
        dc.dimension = static_cast<int>(kv.get_int("driving", "dimension",
                                                   static_cast<long long>(dc.frequencies.size())));
        if (dc.dimension != static_cast<int>(dc.frequencies.size()))
            throw ConfigError("driving dimension does not match the alpha list");
    }
    return dc;
}

inline AssumptionVariant parse_variant(const KeyValueConfig& kv) {
    const std::string v = kv.get_string("system", "variant", "positivity");
    if (v == "irreducibility") return AssumptionVariant::irreducible_chain;
    if (v == "positivity") return AssumptionVariant::entrywise_positive;
    throw ConfigError("unknown assumption variant: " + v);
}

inline BoundaryKind parse_boundary(const KeyValueConfig& kv) {
    const std::string b = kv.get_string("system", "boundary", "dirichlet");
    if (b == "dirichlet") return BoundaryKind::dirichlet;
    if (b == "neumann") return BoundaryKind::neumann;
    if (b == "robin") return BoundaryKind::robin;
    throw ConfigError("unknown boundary kind: " + b);
}

inline DelayCocycle build_delay(const KeyValueConfig& kv) {
    DrivingSystem drv(parse_driving(kv));
    const int n = static_cast<int>(kv.get_int("system", "components"));
    const int m = static_cast<int>(kv.get_int("system", "grid", 128));
    const std::string profile = kv.get_string("system", "profile");

    MatrixPath a, b;
    if (profile == "scalar") {
        if (n != 1) throw ConfigError("scalar profile needs components = 1");
        const double a0 = kv.get_double("system", "a", 0.0);
        const double b0 = kv.get_double("system", "b", 1.0);
        const double aamp = kv.get_double("system", "a_amp", 0.0);
        const double bamp = kv.get_double("system", "b_amp", 0.0);
        // modulations come from the seeded mode sum when the driving is a
        // random Fourier system, from the first torus coordinate otherwise
        std::function<double(const DrivingPoint&)> mod_a, mod_b;
        if (drv.config().kind == DrivingKind::random_fourier) {
            mod_a = drv.fourier_channel(0);
            mod_b = drv.fourier_channel(1);
        } else {
            mod_a = mod_b = [](const DrivingPoint& p) { return std::sin(two_pi * p.x[0]); };
        }
        a = [a0, aamp, mod_a](const DrivingPoint& p, SmallMatrix& m_) {
            if (m_.n != 1) m_ = SmallMatrix(1);
            m_(0, 0) = a0 + aamp * mod_a(p);
        };
        b = [b0, bamp, mod_b](const DrivingPoint& p, SmallMatrix& m_) {
            if (m_.n != 1) m_ = SmallMatrix(1);
            m_(0, 0) = b0 + bamp * mod_b(p);
        };
    } else if (profile == "coupled-ones") {
        a = [n](const DrivingPoint&, SmallMatrix& m_) {
            if (m_.n != n) m_ = SmallMatrix(n);
            m_.zero();
        };
        b = [n](const DrivingPoint&, SmallMatrix& m_) {
            if (m_.n != n) m_ = SmallMatrix(n);
            for (double& v : m_.a) v = 1.0;
        };
    } else if (profile == "cyclic3") {
        if (n != 3) throw ConfigError("cyclic3 profile needs components = 3");
        const double amp = kv.get_double("system", "amp", 0.2);
        const int d = drv.dimension();
        a = [d](const DrivingPoint& p, SmallMatrix& m_) {
            if (m_.n != 3) m_ = SmallMatrix(3);
            m_.zero();
            for (int i = 0; i < 3; ++i)
                m_(i, i) = -0.2 + 0.1 * std::sin(two_pi * p.x[i % d]);
        };
        b = [amp, d](const DrivingPoint& p, SmallMatrix& m_) {
            if (m_.n != 3) m_ = SmallMatrix(3);
            m_.zero();
            m_(1, 0) = 1.0 + amp * std::sin(two_pi * p.x[0]);
            m_(2, 1) = 1.0 + amp * std::cos(two_pi * p.x[1 % d]);
            m_(0, 2) = 1.0;
        };
    } else {
        throw ConfigError("unknown delay profile: " + profile);
    }
    return DelayCocycle(std::move(drv), n, m, std::move(a), std::move(b));
}

inline ParabolicCocycle build_parabolic(const KeyValueConfig& kv) {
    DrivingSystem drv(parse_driving(kv));
    const int n = static_cast<int>(kv.get_int("system", "interior", 63));
    const int spu = static_cast<int>(kv.get_int("system", "steps_per_unit", 64));
    const BoundaryKind bk = parse_boundary(kv);
    const std::string profile = kv.get_string("system", "profile");

    ParabolicCoefficients cf;
    if (profile == "heat") {
        cf.diffusion = [](const DrivingPoint&, double) { return 1.0; };
        cf.ellipticity_floor = 0.9;
    } else if (profile == "advection-robin") {
        const double base = kv.get_double("system", "advection_base", 0.6);
        const double bamp = kv.get_double("system", "advection_amp", 0.2);
        const double famp = kv.get_double("system", "flux_drift_amp", 0.25);
        const double d0 = kv.get_double("system", "absorption", 0.5);
        cf.diffusion = [](const DrivingPoint&, double) { return 1.0; };
        cf.flux_drift = [famp](const DrivingPoint& p, double) { return famp * std::cos(two_pi * p.x[0]); };
        cf.advection = [base, bamp](const DrivingPoint& p, double) {
            return base + bamp * std::sin(two_pi * p.x[p.x.size() > 1 ? 1 : 0]);
        };
        cf.robin_left = [d0](const DrivingPoint&) { return d0; };
        cf.robin_right = [d0](const DrivingPoint&) { return d0; };
        cf.ellipticity_floor = 0.9;
    } else if (profile == "quasiperiodic") {
        const double damp = kv.get_double("system", "diffusion_amp", 0.2);
        const double famp = kv.get_double("system", "flux_drift_amp", 0.15);
        const double bamp = kv.get_double("system", "advection_amp", 0.2);
        const double ct = kv.get_double("system", "reaction_amp_time", 0.3);
        const double cs = kv.get_double("system", "reaction_amp_space", 0.2);
        cf.diffusion = [damp](const DrivingPoint& p, double x) {
            return 1.0 + damp * std::cos(two_pi * p.x[0]) * std::cos(pi * x);
        };
        cf.flux_drift = [famp](const DrivingPoint& p, double) {
            return famp * std::sin(two_pi * p.x[p.x.size() > 1 ? 1 : 0]);
        };
        cf.advection = [bamp](const DrivingPoint& p, double) {
            return bamp * std::cos(two_pi * p.x[p.x.size() > 1 ? 1 : 0]);
        };
        cf.zero_order = [ct, cs](const DrivingPoint& p, double x) {
            const std::size_t j = p.x.size() > 1 ? 1 : 0;
            return ct * std::sin(two_pi * p.x[0]) + cs * std::sin(two_pi * p.x[j]) * std::sin(pi * x);
        };
        cf.zero_order_lo = [ct, cs](const DrivingPoint& p) {
            const std::size_t j = p.x.size() > 1 ? 1 : 0;
            return ct * std::sin(two_pi * p.x[0]) - cs * std::abs(std::sin(two_pi * p.x[j]));
        };
        cf.zero_order_hi = [ct, cs](const DrivingPoint& p) {
            const std::size_t j = p.x.size() > 1 ? 1 : 0;
            return ct * std::sin(two_pi * p.x[0]) + cs * std::abs(std::sin(two_pi * p.x[j]));
        };
        cf.ellipticity_floor = 1.0 - damp - 1e-9;
    } else {
        throw ConfigError("unknown parabolic profile: " + profile);
    }

    // Uniform reaction shift, kept out of the profiles so gauge comparisons
    // reuse identical coefficient code paths.
    const double shift = kv.get_double("system", "reaction_shift", 0.0);
    if (shift != 0.0) {
        auto base_c = cf.zero_order;
        cf.zero_order = [base_c, shift](const DrivingPoint& p, double x) {
            return (base_c ? base_c(p, x) : 0.0) + shift;
        };
        auto base_lo = cf.zero_order_lo;
        cf.zero_order_lo = [base_lo, shift](const DrivingPoint& p) {
            return (base_lo ? base_lo(p) : 0.0) + shift;
        };
        auto base_hi = cf.zero_order_hi;
        cf.zero_order_hi = [base_hi, shift](const DrivingPoint& p) {
            return (base_hi ? base_hi(p) : 0.0) + shift;
        };
    }
    return ParabolicCocycle(std::move(drv), std::move(cf), bk, n, spu);
}

// Partner cocycle whose reaction term is raised by a nonnegative profile;
// every other coefficient object is shared.
inline ParabolicCocycle with_added_reaction(const ParabolicCocycle& base, SpaceTimeFn added,
                                            double added_min, double added_max) {
    ParabolicCoefficients cf = base.coefficients();
    auto c0 = cf.zero_order;
    cf.zero_order = [c0, added](const DrivingPoint& p, double x) {
        return (c0 ? c0(p, x) : 0.0) + added(p, x);
    };
    auto lo = cf.zero_order_lo;
    cf.zero_order_lo = [lo, added_min](const DrivingPoint& p) { return (lo ? lo(p) : 0.0) + added_min; };
    auto hi = cf.zero_order_hi;
    cf.zero_order_hi = [hi, added_max](const DrivingPoint& p) { return (hi ? hi(p) : 0.0) + added_max; };
    return ParabolicCocycle(base.driving(), std::move(cf), base.boundary(), base.interior(),
                            base.steps_per_unit());
}

}  // namespace floq
