#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "floq/spectral.hpp"

namespace floq {

struct CheckResult {
    std::string name;
    bool pass = false;
    double margin = 0.0;
};

struct RunReport {
    std::string subcommand;
    std::string system;
    std::string preset;
    std::uint64_t omega_seed = 0;
    std::optional<double> lambda1, lambda1_adjoint, lambda2, sigma;
    bool minus_infinity = false;
    std::vector<CheckResult> checks;
    std::vector<std::string> traces;
    nlohmann::ordered_json extra;  // subcommand-specific details

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline nlohmann::ordered_json report_to_json(const RunReport& r) {
    nlohmann::ordered_json j;
    j["subcommand"] = r.subcommand;
    j["system"] = r.system;
    if (!r.preset.empty()) j["preset"] = r.preset;
    j["omega_seed"] = r.omega_seed;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("lambda1", r.lambda1);
    put("lambda1_adjoint", r.lambda1_adjoint);
    put("lambda2", r.lambda2);
    put("sigma", r.sigma);
    if (r.minus_infinity) j["minus_infinity"] = true;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}});
    j["traces"] = r.traces;
    if (!r.extra.is_null()) j["details"] = r.extra;
    // the timestamp is the single run-dependent field
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return j;
}

inline void write_exponent_trace_csv(const ExponentEstimate& est, std::ostream& out) {
    out << "k,log_accum,running_avg\n";
    char buf[32];
    for (const auto& p : est.trace) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.t);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", p.log_accum);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", p.running_avg);
        out << buf << "\n";
    }
}

inline void write_temperedness_csv(const SeparationEstimate& est, std::ostream& out) {
    out << "t,log_projection_norm_over_t\n";
    char buf[32];
    for (const auto& [t, v] : est.temperedness_trace) {
        std::snprintf(buf, sizeof(buf), "%.17g", t);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
}

}  // namespace floq
