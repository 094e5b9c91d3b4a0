#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gfis {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quaternion whose norm deviates from 1 beyond tolerance.
struct InvalidQuaternion : Error {
    using Error::Error;
};

/// Inertia matrix that is not symmetric positive definite.
struct InvalidInertia : Error {
    using Error::Error;
};

/// Bad user-supplied configuration. `key()` names the offending entry when known.
struct ConfigError : Error {
    ConfigError(std::string key, const std::string &what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    explicit ConfigError(const std::string &what) : Error(what) {}
    const std::string &key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Geometry precondition failed (e.g. deputy inside the inspection sphere).
struct GeometryViolation : Error {
    using Error::Error;
};

/// Integrator produced a non-finite state.
struct PropagationDiverged : Error {
    using Error::Error;
};

// ----------------------------------------------------------------------------
// Quaternion
// ----------------------------------------------------------------------------

/// Attitude quaternion, vector part first and scalar last: q = [qv; q4].
struct Quaternion {
    Vec3 qv = Vec3::Zero();
    double q4 = 1.0;

    static Quaternion identity() { return {}; }

    /// Rotation of `angle` [rad] about unit `axis`.
    static Quaternion from_axis_angle(const Vec3 &axis, double angle) {
        return {axis.normalized() * std::sin(0.5 * angle), std::cos(0.5 * angle)};
    }

    double norm() const { return std::sqrt(qv.squaredNorm() + q4 * q4); }

    Quaternion normalized() const {
        const double s = norm();
        return {qv / s, q4 / s};
    }

    Quaternion conjugate() const { return {-qv, q4}; }

    bool allFinite() const { return qv.allFinite() && std::isfinite(q4); }
};

inline constexpr double kUnitQuatTolerance = 1e-6;

inline void require_unit(const Quaternion &q) {
    if (std::abs(q.norm() - 1.0) > kUnitQuatTolerance)
        throw InvalidQuaternion("quaternion norm " + std::to_string(q.norm()) + " is not unit");
}

/// Composition matching the DCM product: dcm(compose(a, b)) == dcm(a) * dcm(b).
inline Quaternion compose(const Quaternion &a, const Quaternion &b) {
    return {a.q4 * b.qv + b.q4 * a.qv - a.qv.cross(b.qv), a.q4 * b.q4 - a.qv.dot(b.qv)};
}

inline bool is_spd(const Mat3 &m, double tol = 1e-12) {
    if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-12))
        return false;
    Eigen::SelfAdjointEigenSolver<Mat3> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() > tol;
}

} // namespace gfis
