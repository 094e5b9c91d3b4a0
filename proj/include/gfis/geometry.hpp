#pragma once

// Inspection points, sun illumination, and sensor field-of-view tests.

#include <gfis/dynamics.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace gfis {

inline constexpr double kAstronomicalUnit = 1.495978707e11; // [m]

struct InspectionGrid {
    std::vector<Vec3> points; // Hill frame [m]
    std::vector<bool> inspected;
    double ds = 10.0;

    std::size_t n_total() const { return points.size(); }

    std::size_t n_inspected() const {
        std::size_t k = 0;
        for (bool b : inspected)
            k += b ? 1 : 0;
        return k;
    }
};

struct SunState {
    double theta = 0.0;                 // [rad]
    double dES = kAstronomicalUnit;     // [m]

    /// Sun angle after `dt` seconds; the sun moves at -n in the Hill frame.
    SunState advanced(double n, double dt) const { return {theta - n * dt, dES}; }
};

struct SensorModel {
    Vec3 boresight{-1.0, 0.0, 0.0}; // deputy frame, unit
    double beta = 15.0 * std::numbers::pi / 180.0; // half-angle [rad]

    void validate() const {
        if (!boresight.allFinite() || std::abs(boresight.norm() - 1.0) > 1e-9)
            throw ConfigError("boresight", "must be a unit vector");
        if (!(beta > 0.0 && beta < 0.5 * std::numbers::pi))
            throw ConfigError("fov_half_angle_deg", "must lie in (0, 90) degrees");
    }
};

/// Fibonacci-lattice sphere of `n_total` points at radius `ds`. Deterministic.
inline InspectionGrid generate_grid(std::size_t n_total, double ds) {
    if (n_total < 4)
        throw ConfigError("grid_points", "need at least 4 inspection points");
    if (!(ds > 0.0) || !std::isfinite(ds))
        throw ConfigError("grid_radius_m", "must be positive");

    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    InspectionGrid g;
    g.ds = ds;
    g.points.reserve(n_total);
    const double n = static_cast<double>(n_total);
    for (std::size_t i = 0; i < n_total; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        Vec3 u{rho * std::cos(phi), rho * std::sin(phi), z};
        g.points.push_back(ds * u.normalized());
    }
    g.inspected.assign(n_total, false);
    return g;
}

inline Vec3 sun_position(const SunState &sun) {
    return sun.dES * Vec3{std::cos(sun.theta), std::sin(sun.theta), 0.0};
}

/// Lit iff the point faces the sun: -1 <= p.(p - r_s) / (|p||p - r_s|) < 0.
inline bool is_illuminated(const Vec3 &p, const Vec3 &r_s) {
    const Vec3 d = p - r_s;
    const double ratio = p.dot(d) / (p.norm() * d.norm());
    // Lower bound is only reached at the subsolar point, which is lit.
    return ratio >= -1.0 && ratio < 0.0;
}

/// Point is on the deputy-facing cap of the sphere and inside the sensor cone.
/// `boresight_hill` is the sensor axis already rotated into the Hill frame.
inline bool in_fov(const Vec3 &p, const Vec3 &r, const Vec3 &boresight_hill, double beta, double ds) {
    const double rn = r.norm();
    if (!(rn > ds))
        throw GeometryViolation("deputy is inside the inspection sphere");
    // acos is decreasing, so the tangent-cone test compares cosines directly.
    if (p.dot(r) / (p.norm() * rn) < ds / rn)
        return false;
    const Vec3 los = p - r;
    return std::cos(beta) <= los.dot(boresight_hill) / los.norm();
}

/// Marks every point that is lit and in view. Flags are never cleared.
/// Returns the number of points newly marked.
inline std::size_t update_inspected(InspectionGrid &grid, const Vec3 &r, const Vec3 &boresight_hill,
                                    const SensorModel &sensor, const Vec3 &r_s) {
    const double rn = r.norm();
    if (!(rn > grid.ds))
        return 0;
    const double cos_beta = std::cos(sensor.beta);
    const double cap = grid.ds / rn;
    std::size_t fresh = 0;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        if (grid.inspected[i])
            continue;
        const Vec3 &p = grid.points[i];
        if (p.dot(r) / (p.norm() * rn) < cap)
            continue;
        const Vec3 los = p - r;
        if (!(cos_beta <= los.dot(boresight_hill) / los.norm()))
            continue;
        if (!is_illuminated(p, r_s))
            continue;
        grid.inspected[i] = true;
        ++fresh;
    }
    return fresh;
}

/// Same, with the deputy attitude `q` mapping the sensor boresight into the Hill frame.
inline std::size_t update_inspected(InspectionGrid &grid, const Vec3 &r, const Quaternion &q,
                                    const SensorModel &sensor, const Vec3 &r_s) {
    return update_inspected(grid, r, dcm_from_quat(q).transpose() * sensor.boresight, sensor, r_s);
}

/// Percentage of inspected points.
inline double inspection_rate(const InspectionGrid &grid) {
    if (grid.n_total() == 0)
        throw ConfigError("grid_points", "empty inspection grid");
    return static_cast<double>(grid.n_inspected()) / static_cast<double>(grid.n_total()) * 100.0;
}

inline bool inspection_successful(double rate, double threshold) { return threshold <= rate; }

/// Mean of the lit, not-yet-inspected points; empty when there are none.
inline std::optional<Vec3> uninspected_centroid(const InspectionGrid &grid, const Vec3 &r_s) {
    Vec3 sum = Vec3::Zero();
    std::size_t k = 0;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        if (grid.inspected[i] || !is_illuminated(grid.points[i], r_s))
            continue;
        sum += grid.points[i];
        ++k;
    }
    if (k == 0)
        return std::nullopt;
    return sum / static_cast<double>(k);
}

} // namespace gfis
