#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

struct V3 {
    double x = 0, y = 0, z = 0;
};

inline double dot(const V3 &a, const V3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const V3 &a) { return std::sqrt(dot(a, a)); }
inline V3 sub(const V3 &a, const V3 &b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

/// Closed-form Clohessy-Wiltshire state at time t (x radial, y along track, z normal).
inline std::array<double, 6> cw_state(const std::array<double, 6> &s0, double n, double t) {
    const double x0 = s0[0], y0 = s0[1], z0 = s0[2], u0 = s0[3], v0 = s0[4], w0 = s0[5];
    const double s = std::sin(n * t), c = std::cos(n * t);
    std::array<double, 6> o{};
    o[0] = (4 - 3 * c) * x0 + s / n * u0 + 2 / n * (1 - c) * v0;
    o[1] = 6 * (s - n * t) * x0 + y0 - 2 / n * (1 - c) * u0 + (4 * s - 3 * n * t) / n * v0;
    o[2] = c * z0 + s / n * w0;
    o[3] = 3 * n * s * x0 + c * u0 + 2 * s * v0;
    o[4] = -6 * n * (1 - c) * x0 - 2 * s * u0 + (4 * c - 3) * v0;
    o[5] = -n * s * z0 + c * w0;
    return o;
}

/// Passive rotation matrix (frame rotation) for `angle` about unit `axis`:
/// cos(a) I + (1 - cos(a)) e e^T - sin(a) [e x].
inline std::array<std::array<double, 3>, 3> frame_rotation(const V3 &axis, double angle) {
    const double n = norm(axis);
    const double e[3] = {axis.x / n, axis.y / n, axis.z / n};
    const double c = std::cos(angle), s = std::sin(angle);
    const double ex[3][3] = {{0, -e[2], e[1]}, {e[2], 0, -e[0]}, {-e[1], e[0], 0}};
    std::array<std::array<double, 3>, 3> m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m[i][j] = (i == j ? c : 0.0) + (1 - c) * e[i] * e[j] - s * ex[i][j];
    return m;
}

/// Angle-form visibility: tangent cone via acos, boresight cone, strict illumination.
inline bool visible(const V3 &p, const V3 &r, const V3 &b_hill, double beta, double ds, const V3 &r_s) {
    const double rn = norm(r);
    const double point_angle = std::acos(std::clamp(dot(p, r) / (norm(p) * rn), -1.0, 1.0));
    if (!(point_angle <= std::acos(ds / rn)))
        return false;
    const V3 los = sub(p, r);
    if (!(std::cos(beta) <= dot(los, b_hill) / norm(los)))
        return false;
    const V3 d = sub(p, r_s);
    const double ratio = dot(p, d) / (norm(p) * norm(d));
    return ratio > -1.0 && ratio < 0.0;
}

struct Mf {
    double mean, sigma;
};

/// Mamdani product/max/clip centroid, trapezoidal rule on `points` uniform samples of [lo, hi].
/// inputs[a][k] are the membership functions of input a, clamped to ranges[a]; rules are flattened
/// with the first input varying slowest.
inline double mamdani_centroid(const std::vector<std::array<Mf, 5>> &inputs,
                               const std::vector<std::array<double, 2>> &ranges, const std::array<Mf, 5> &out, double lo,
                               double hi, const std::vector<int> &rules, const std::vector<double> &x,
                               std::size_t points) {
    auto g = [](const Mf &m, double v) { return std::exp(-(v - m.mean) * (v - m.mean) / (2 * m.sigma * m.sigma)); };
    std::vector<std::array<double, 5>> deg(inputs.size());
    for (std::size_t a = 0; a < inputs.size(); ++a) {
        const double xc = std::min(std::max(x[a], ranges[a][0]), ranges[a][1]);
        for (int k = 0; k < 5; ++k)
            deg[a][k] = g(inputs[a][k], xc);
    }
    std::array<double, 5> level{};
    const std::size_t n_rules = rules.size();
    for (std::size_t r = 0; r < n_rules; ++r) {
        std::size_t rem = r;
        double w = 1.0;
        for (std::size_t a = inputs.size(); a-- > 0;) {
            w *= deg[a][rem % 5];
            rem /= 5;
        }
        level[rules[r]] = std::max(level[rules[r]], w);
    }
    double num = 0, den = 0;
    for (std::size_t j = 0; j < points; ++j) {
        const double y = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
        double mu = 0;
        for (int k = 0; k < 5; ++k)
            mu = std::max(mu, std::min(level[k], g(out[k], y)));
        const double wt = (j == 0 || j + 1 == points) ? 0.5 : 1.0;
        num += wt * mu * y;
        den += wt * mu;
    }
    return num / den;
}

} // namespace oracle
