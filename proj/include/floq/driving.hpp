#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "floq/errors.hpp"

namespace floq {

inline double mod1(double x) {
    double r = x - std::floor(x);
    return r < 1.0 ? r : 0.0;
}

// Standardized 53-bit uniform draw; uniform_real_distribution is
// implementation-defined, so conversion is done by hand.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

enum class DrivingKind { torus, periodic, random_fourier };

struct DrivingConfig {
    DrivingKind kind = DrivingKind::periodic;
    int dimension = 1;
    std::vector<double> frequencies;  // one per torus coordinate, 1/time
    int modes = 8;                    // random_fourier only
    double amplitude_decay = 1.4;     // random_fourier only
    std::uint64_t seed = 0;           // random_fourier only
};

// A point on the driving torus. The birth coordinates and the accumulated
// time shift are kept separate so that composing advances is exact: only the
// shifts are added, and the coordinates are reduced mod 1 once per evaluation.
struct DrivingPoint {
    std::vector<double> base;
    double shift = 0.0;
    std::vector<double> x;  // realized coordinates, each in [0, 1)
};

class DrivingSystem {
public:
    explicit DrivingSystem(DrivingConfig cfg) : cfg_(std::move(cfg)) {
        // Mode frequencies are drawn once per seed; an explicitly supplied
        // frequency vector (e.g. a time-reversed copy) is kept as-is.
        if (cfg_.kind == DrivingKind::random_fourier && cfg_.frequencies.empty()) {
            cfg_.dimension = cfg_.modes;
            std::mt19937_64 rng(cfg_.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
            cfg_.frequencies.resize(cfg_.modes);
            for (int k = 0; k < cfg_.modes; ++k)
                cfg_.frequencies[k] = 0.5 + 2.0 * uniform01(rng);
        }
        validate();
    }

    const DrivingConfig& config() const { return cfg_; }
    int dimension() const { return cfg_.dimension; }
    const std::vector<double>& frequencies() const { return cfg_.frequencies; }

    DrivingPoint make_point(std::vector<double> coords) const {
        if (static_cast<int>(coords.size()) != cfg_.dimension)
            throw ConfigError("driving point dimension mismatch");
        for (double& c : coords) c = mod1(c);
        DrivingPoint p;
        p.base = std::move(coords);
        p.shift = 0.0;
        p.x = p.base;
        return p;
    }

    // Draws from the invariant (uniform) measure; deterministic per seed.
    DrivingPoint sample_point(std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::vector<double> coords(cfg_.dimension);
        for (double& c : coords) c = uniform01(rng);
        return make_point(std::move(coords));
    }

    DrivingPoint advance(const DrivingPoint& p, double t) const {
        DrivingPoint q;
        q.base = p.base;
        q.shift = p.shift + t;
        q.x.resize(p.base.size());
        for (std::size_t i = 0; i < p.base.size(); ++i)
            q.x[i] = mod1(p.base[i] + mod1(q.shift * cfg_.frequencies[i]));
        return q;
    }

    // Scalar channel built from the seeded mode amplitudes and phases; the
    // absolute amplitudes sum to one. Only meaningful for random_fourier.
    std::function<double(const DrivingPoint&)> fourier_channel(int channel) const {
        if (cfg_.kind != DrivingKind::random_fourier)
            throw ConfigError("fourier_channel requires a random-fourier driving system");
        std::mt19937_64 rng(cfg_.seed ^ (0xabcd1234ULL + 0x100000001b3ULL * static_cast<std::uint64_t>(channel + 1)));
        std::vector<double> amp(cfg_.modes), phase(cfg_.modes);
        double total = 0.0;
        for (int k = 0; k < cfg_.modes; ++k) {
            amp[k] = std::pow(cfg_.amplitude_decay, -static_cast<double>(k));
            phase[k] = uniform01(rng);
            if (uniform01(rng) < 0.5) amp[k] = -amp[k];
            total += std::abs(amp[k]);
        }
        for (double& a : amp) a /= total;
        return [amp = std::move(amp), phase = std::move(phase)](const DrivingPoint& p) {
            double s = 0.0;
            for (std::size_t k = 0; k < amp.size(); ++k)
                s += amp[k] * std::sin(6.283185307179586477 * (p.x[k] + phase[k]));
            return s;
        };
    }

private:
    void validate() const {
        if (cfg_.dimension < 1) throw ConfigError("driving dimension must be >= 1");
        if (static_cast<int>(cfg_.frequencies.size()) != cfg_.dimension)
            throw ConfigError("driving frequency vector does not match dimension");
        if (cfg_.kind == DrivingKind::periodic && cfg_.dimension != 1)
            throw ConfigError("periodic driving has dimension 1");
        for (double a : cfg_.frequencies)
            if (!(std::isfinite(a)) || a == 0.0) throw ConfigError("driving frequencies must be finite and nonzero");
        if (cfg_.kind == DrivingKind::torus) {
            // Heuristic rational-independence check: reject frequency ratios
            // that sit within 1e-9 of p/q with q <= 64.
            for (std::size_t i = 0; i < cfg_.frequencies.size(); ++i)
                for (std::size_t j = i + 1; j < cfg_.frequencies.size(); ++j) {
                    const double r = cfg_.frequencies[i] / cfg_.frequencies[j];
                    for (int q = 1; q <= 64; ++q) {
                        const double p = std::round(r * q);
                        if (std::abs(r - p / q) < 1e-9)
                            throw ConfigError("torus frequencies look rationally dependent (ratio near " +
                                              std::to_string(static_cast<long long>(p)) + "/" + std::to_string(q) + ")");
                    }
                }
        }
    }

    DrivingConfig cfg_;
};

// t |-> table(theta_t omega); evaluable for every real t.
template <class Table>
auto coefficient_path(const DrivingSystem& sys, const DrivingPoint& omega, Table table) {
    return [&sys, omega, table = std::move(table)](double t) { return table(sys.advance(omega, t)); };
}

}  // namespace floq
