#pragma once

// Standard variable layout for the three axis FISs and a few stock controllers.

#include <gfis/guidance.hpp>

#include <numbers>

namespace gfis {

/// Output term indices.
enum Term : int { NB = 0, NS = 1, ZE = 2, PS = 3, PB = 4 };

inline VariableSpec make_variable(std::string name, double lo, double hi, std::array<double, kMfCount> means,
                                  std::array<double, kMfCount> sigmas) {
    VariableSpec v;
    v.name = std::move(name);
    v.lo = lo;
    v.hi = hi;
    for (std::size_t i = 0; i < kMfCount; ++i)
        v.mfs[i] = {means[i], sigmas[i]};
    return v;
}

/// Untuned FIS skeleton with evenly spaced terms over the standard envelopes.
inline FisParams uniform_fis(char axis, const InputEnvelope &env = {}) {
    constexpr double pi = std::numbers::pi;
    const std::string a(1, axis);
    FisParams fis;
    fis.inputs = {VariableSpec::uniform("dist_m", 0.0, env.dist_max),
                  VariableSpec::uniform("vel_" + a + "_mps", -env.vel_max, env.vel_max),
                  VariableSpec::uniform(axis == 'z' ? "eta_u_rad" : "lambda_u_rad", -pi, pi)};
    fis.output = VariableSpec::uniform("force_" + a + "_N", -env.force_max, env.force_max);
    fis.rules = RuleTable::filled(3, ZE);
    return fis;
}

/// Every rule selects the centred zero term: the commanded force is exactly zero.
inline Controller zero_force_controller(const InputEnvelope &env = {}) {
    return {uniform_fis('x', env), uniform_fis('y', env), uniform_fis('z', env), {}};
}

/// Hand-written rule base: hold a stand-off band with radial damping, steer
/// along track toward the lit, uninspected region, and damp out-of-plane rate.
inline Controller baseline_controller(const InputEnvelope &env = {}) {
    constexpr double pi = std::numbers::pi;
    const double dmax = env.dist_max, vmax = env.vel_max, fmax = env.force_max;

    auto dist = make_variable("dist_m", 0.0, dmax, {0.0, 0.30 * dmax, 0.375 * dmax, 0.45 * dmax, dmax},
                              {0.10 * dmax, 0.05 * dmax, 0.04 * dmax, 0.05 * dmax, 0.15 * dmax});
    auto vel = [&](const std::string &a) {
        return make_variable("vel_" + a + "_mps", -vmax, vmax, {-vmax, -0.06 * vmax, 0.0, 0.06 * vmax, vmax},
                             {0.30 * vmax, 0.04 * vmax, 0.04 * vmax, 0.04 * vmax, 0.30 * vmax});
    };
    auto angle = [&](const std::string &name) {
        return make_variable(name, -pi, pi, {-pi, -0.5 * pi, 0.0, 0.5 * pi, pi},
                             {0.6, 0.5, 0.35, 0.5, 0.6});
    };
    auto force = [&](const std::string &a) {
        return make_variable("force_" + a + "_N", -fmax, fmax, {-fmax, -0.03 * fmax, 0.0, 0.03 * fmax, fmax},
                             {0.06 * fmax, 0.04 * fmax, 0.04 * fmax, 0.04 * fmax, 0.06 * fmax});
    };
    auto clampi = [](int t) { return std::clamp(t, int(NB) + 1, int(PB) - 1); };

    Controller c;
    // Radial: push out when close, pull in when far, damp radial rate.
    c.fis_x = {{dist, vel("x"), angle("lambda_u_rad")}, force("x"), RuleTable::filled(3, ZE)};
    // Along track: accelerate toward the target bearing, brake when already moving.
    c.fis_y = {{dist, vel("y"), angle("lambda_u_rad")}, force("y"), RuleTable::filled(3, ZE)};
    // Out of plane: rate damping only.
    c.fis_z = {{dist, vel("z"), angle("eta_u_rad")}, force("z"), RuleTable::filled(3, ZE)};

    for (std::size_t d = 0; d < kMfCount; ++d)
        for (std::size_t v = 0; v < kMfCount; ++v)
            for (std::size_t a = 0; a < kMfCount; ++a) {
                const std::array<std::size_t, 3> idx{d, v, a};
                const int dist_term = d <= 1 ? 1 : (d >= 3 ? -1 : 0);
                const int vel_term = v < 2 ? 1 : (v > 2 ? -1 : 0);
                const int ang_term = a < 2 ? -1 : (a > 2 ? 1 : 0);
                c.fis_x.rules.entries[c.fis_x.rules.flat_index(idx)] = clampi(ZE + dist_term + vel_term);
                c.fis_y.rules.entries[c.fis_y.rules.flat_index(idx)] = clampi(ZE + ang_term + vel_term);
                c.fis_z.rules.entries[c.fis_z.rules.flat_index(idx)] = clampi(ZE + vel_term);
            }
    return c;
}

} // namespace gfis
