#pragma once

// Fuzzy translational guidance and PD attitude control for the deputy.
//
// FIS input layout per body axis:
//   x: (distance, body velocity x, in-plane angle lambda_u)
//   y: (distance, body velocity y, in-plane angle lambda_u)
//   z: (distance, body velocity z, out-of-plane angle eta_u)

#include <gfis/dynamics.hpp>
#include <gfis/fuzzy.hpp>
#include <gfis/geometry.hpp>

#include <array>
#include <cmath>
#include <numbers>

namespace gfis {

inline constexpr double kDegenerateProjection = 1e-9; // [m]

struct ProjectionAngles {
    double lambda_u = 0.0; // i-j plane, positive counterclockwise about +k
    double eta_u = 0.0;    // i-k plane, positive from +i toward +k
    bool lambda_degenerate = false;
    bool eta_degenerate = false;
};

/// Signed angles from the plane projections of `r` to those of `p_u`.
inline ProjectionAngles projection_angles(const Vec3 &r, const Vec3 &p_u) {
    auto plane_angle = [](double ra, double rb, double pa, double pb, bool &degenerate) {
        if (std::hypot(ra, rb) < kDegenerateProjection || std::hypot(pa, pb) < kDegenerateProjection) {
            degenerate = true;
            return 0.0;
        }
        return std::atan2(ra * pb - rb * pa, ra * pa + rb * pb);
    };
    ProjectionAngles a;
    a.lambda_u = plane_angle(r.x(), r.y(), p_u.x(), p_u.y(), a.lambda_degenerate);
    a.eta_u = plane_angle(r.x(), r.z(), p_u.x(), p_u.z(), a.eta_degenerate);
    return a;
}

struct GuidanceInputs {
    double dist = 0.0;       // [m]
    Vec3 vel = Vec3::Zero(); // deputy frame [m/s]
    double lambda_u = 0.0;   // [rad]
    double eta_u = 0.0;      // [rad]
    Vec3 p_u = Vec3::Zero(); // [m]
};

inline GuidanceInputs guidance_inputs(const RelativeState &s, const Vec3 &p_u) {
    const auto ang = projection_angles(s.r, p_u);
    return {s.r.norm(), dcm_from_quat(s.q) * s.v, ang.lambda_u, ang.eta_u, p_u};
}

/// Standard envelopes for the three axis controllers.
struct InputEnvelope {
    double dist_max = 200.0; // [m]
    double vel_max = 1.0;    // [m/s]
    double force_max = 1.0;  // [N]
};

enum class AttitudeMode {
    Boresight, // point the sensor at the chief centre
    FrameAlign // align the deputy frame with the chief/Hill frame
};

struct AttitudeGains {
    Mat3 Kp = 0.02 * Mat3::Identity(); // [N m]
    Mat3 Kd = 0.2 * Mat3::Identity();  // [N m s]
    AttitudeMode mode = AttitudeMode::Boresight;

    void validate() const {
        if (!is_spd(Kp))
            throw ConfigError("kp_Nm", "proportional gain must be symmetric positive definite");
        if (!is_spd(Kd))
            throw ConfigError("kd_Nms", "derivative gain must be symmetric positive definite");
    }
};

/// Three axis FISs plus the attitude loop.
struct Controller {
    FisParams fis_x, fis_y, fis_z;
    AttitudeGains gains;

    void validate() const {
        fis_x.validate();
        fis_y.validate();
        fis_z.validate();
        gains.validate();
    }
};

struct ForceCommand {
    Vec3 f_d = Vec3::Zero();       // clamped, deputy frame [N]
    Vec3 requested = Vec3::Zero(); // before clamping [N]
};

inline Vec3 clamp_per_axis(const Vec3 &v, double limit) {
    return v.cwiseMax(Vec3::Constant(-limit)).cwiseMin(Vec3::Constant(limit));
}

/// Evaluators for the three axis FISs, built once per controller.
class ForceLaw {
public:
    explicit ForceLaw(const Controller &c) : x_(c.fis_x), y_(c.fis_y), z_(c.fis_z) {}

    ForceCommand operator()(const GuidanceInputs &g, double fmax) const {
        const std::array<double, 3> in_x{g.dist, g.vel.x(), g.lambda_u};
        const std::array<double, 3> in_y{g.dist, g.vel.y(), g.lambda_u};
        const std::array<double, 3> in_z{g.dist, g.vel.z(), g.eta_u};
        ForceCommand cmd;
        cmd.requested = {x_(in_x), y_(in_y), z_(in_z)};
        cmd.f_d = clamp_per_axis(cmd.requested, fmax);
        return cmd;
    }

private:
    FisEvaluator x_, y_, z_;
};

/// Deputy-frame force from the three FISs, clamped to +-fmax per axis.
inline Vec3 fis_force(const FisParams &fis_x, const FisParams &fis_y, const FisParams &fis_z,
                      const GuidanceInputs &g, double fmax) {
    Controller c{fis_x, fis_y, fis_z, {}};
    return ForceLaw(c)(g, fmax).f_d;
}

inline Vec3 force_to_hill(const Vec3 &f_d, const Quaternion &q) { return dcm_from_quat(q).transpose() * f_d; }

/// Attitude reached from `current` by the smallest rotation that puts the
/// boresight on -r (sensor aimed at the chief centre).
inline Quaternion target_attitude(const Vec3 &r, const Vec3 &boresight, const Quaternion &current) {
    const Vec3 b_hill = (dcm_from_quat(current).transpose() * boresight).normalized();
    const Vec3 aim = -r.normalized();
    const Vec3 axis = b_hill.cross(aim);
    const double s = axis.norm();
    const double c = b_hill.dot(aim);
    if (s < 1e-12) {
        if (c > 0.0)
            return current;
        // Antiparallel: any axis normal to the boresight works; prefer the orbit normal.
        Vec3 n = Vec3::UnitZ() - Vec3::UnitZ().dot(b_hill) * b_hill;
        if (n.norm() < 1e-6)
            n = Vec3::UnitY() - Vec3::UnitY().dot(b_hill) * b_hill;
        return compose(current, Quaternion::from_axis_angle(n, std::numbers::pi)).normalized();
    }
    return compose(current, Quaternion::from_axis_angle(axis / s, std::atan2(s, c))).normalized();
}

inline Quaternion target_attitude(const Vec3 &r, const Vec3 &boresight) {
    return target_attitude(r, boresight, Quaternion::identity());
}

/// Error quaternion of the current attitude relative to the target, expressed
/// in the deputy frame, with the scalar part made non-negative.
inline Quaternion attitude_error(const Quaternion &q, const Quaternion &target) {
    Quaternion e = compose(q, target.conjugate());
    if (e.q4 < 0.0)
        e = {-e.qv, -e.q4};
    return e;
}

struct TorqueCommand {
    Vec3 tau = Vec3::Zero();
    Vec3 requested = Vec3::Zero();
};

inline TorqueCommand pd_torque_command(const Quaternion &q_err, const Vec3 &w, const AttitudeGains &gains,
                                       double tmax) {
    const Vec3 qe = q_err.q4 < 0.0 ? Vec3(-q_err.qv) : q_err.qv;
    TorqueCommand cmd;
    cmd.requested = -gains.Kp * qe - gains.Kd * w;
    cmd.tau = clamp_per_axis(cmd.requested, tmax);
    return cmd;
}

/// PD attitude torque, clamped to +-tmax per axis.
inline Vec3 pd_torque(const Quaternion &q_err, const Vec3 &w, const AttitudeGains &gains, double tmax) {
    return pd_torque_command(q_err, w, gains, tmax).tau;
}

/// Attitude target for the configured pointing mode.
inline Quaternion attitude_target(const RelativeState &s, const Vec3 &boresight, AttitudeMode mode) {
    if (mode == AttitudeMode::FrameAlign)
        return Quaternion::identity();
    return target_attitude(s.r, boresight, s.q);
}

} // namespace gfis
