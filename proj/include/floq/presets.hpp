#pragma once

#include <map>
#include <string>

namespace floq {

// Built-in experiment configurations; `--preset NAME` loads one of these, and
// a config file with the same sections overrides individual keys.
inline const std::map<std::string, std::string>& builtin_presets() {
    static const std::map<std::string, std::string> presets = {
        {"scalar-dde", R"(
[driving]
kind = periodic
alpha = 1.0

[system]
type = delay
profile = scalar
components = 1
grid = 200
a = 0.0
b = 1.0
variant = positivity

[run]
T = 200
burn_in = 20
seed = 1
samples = 100
pullback_tol = 1e-10
pullback_depth = 60

[outputs]
directory = out
)"},
        {"coupled-dde-N2", R"(
[driving]
kind = periodic
alpha = 1.0

[system]
type = delay
profile = coupled-ones
components = 2
grid = 128
variant = irreducibility

[run]
T = 200
burn_in = 30
seed = 1
samples = 100
pullback_tol = 1e-10
pullback_depth = 60

[outputs]
directory = out
)"},
        {"cyclic-dde-N3", R"(
[driving]
kind = torus
dimension = 2
alpha = 1.0 1.4142135623730951

[system]
type = delay
profile = cyclic3
components = 3
grid = 64
amp = 0.2
variant = irreducibility

[run]
T = 200
burn_in = 40
seed = 1
samples = 100
pullback_tol = 1e-10
pullback_depth = 60

[outputs]
directory = out
)"},
        {"heat-dirichlet", R"(
[driving]
kind = periodic
alpha = 1.0

[system]
type = parabolic
profile = heat
interior = 99
steps_per_unit = 1024
boundary = dirichlet

[run]
T = 6
burn_in = 2
seed = 1
samples = 100
pullback_tol = 1e-10
pullback_depth = 60
refresh_cadence = 10

[outputs]
directory = out
)"},
        {"advection-robin", R"(
[driving]
kind = torus
dimension = 2
alpha = 1.0 1.4142135623730951

[system]
type = parabolic
profile = advection-robin
interior = 63
steps_per_unit = 256
boundary = robin
advection_base = 0.6
advection_amp = 0.2
flux_drift_amp = 0.25
absorption = 0.5

[run]
T = 100
burn_in = 10
seed = 1
samples = 100
pullback_tol = 1e-10
pullback_depth = 60
refresh_cadence = 10

[outputs]
directory = out
)"},
        {"quasiperiodic-parabolic", R"(
[driving]
kind = torus
dimension = 2
alpha = 1.0 1.4142135623730951

[system]
type = parabolic
profile = quasiperiodic
interior = 63
steps_per_unit = 512
boundary = dirichlet
diffusion_amp = 0.2
flux_drift_amp = 0.15
advection_amp = 0.2
reaction_amp_time = 0.3
reaction_amp_space = 0.2

[run]
T = 200
burn_in = 10
seed = 1
samples = 100
pullback_tol = 1e-10
pullback_depth = 60
refresh_cadence = 10

[outputs]
directory = out
)"},
    };
    return presets;
}

}  // namespace floq
