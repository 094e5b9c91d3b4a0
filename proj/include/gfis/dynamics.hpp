#pragma once

// Relative translational (Clohessy-Wiltshire) and rotational dynamics of a
// deputy about a chief on a circular orbit, plus the joint RK4 propagator.

#include <gfis/types.hpp>

#include <cmath>

namespace gfis {

/// Deputy state relative to the chief. Position/velocity in the Hill frame,
/// angular velocity in the deputy frame.
struct RelativeState {
    Vec3 r = Vec3::Zero(); // [m]
    Vec3 v = Vec3::Zero(); // [m/s]
    Quaternion q;          // deputy w.r.t. chief (Hill)
    Vec3 w = Vec3::Zero(); // [rad/s]

    bool allFinite() const { return r.allFinite() && v.allFinite() && q.allFinite() && w.allFinite(); }
};

struct ChiefState {
    Quaternion qc;                // chief w.r.t. inertial
    Vec3 wc = Vec3::Zero();       // [rad/s]
    Mat3 Jc = Mat3::Identity();   // [kg m^2]

    bool allFinite() const { return qc.allFinite() && wc.allFinite() && Jc.allFinite(); }
};

struct BodyParams {
    double md = 12.0;             // [kg]
    Mat3 Jd = Mat3::Identity();   // [kg m^2]
    double n = 0.0011068;         // mean motion [rad/s]
    double fmax = 1.0;            // per-axis force limit [N]
    double tmax = 0.010;          // per-axis torque limit [N m]

    void validate() const {
        if (!(md > 0.0))
            throw ConfigError("deputy_mass_kg", "must be positive");
        if (!(n > 0.0))
            throw ConfigError("mean_motion_radps", "must be positive");
        if (!(fmax > 0.0))
            throw ConfigError("fmax_N", "must be positive");
        if (!(tmax > 0.0))
            throw ConfigError("tmax_Nm", "must be positive");
        if (!is_spd(Jd))
            throw InvalidInertia("deputy inertia must be symmetric positive definite");
    }
};

/// Cross-product matrix: skew(a) * b == a x b.
inline Mat3 skew(const Vec3 &rho) {
    Mat3 m;
    m << 0.0, -rho.z(), rho.y(),
         rho.z(), 0.0, -rho.x(),
         -rho.y(), rho.x(), 0.0;
    return m;
}

/// Direction cosine matrix taking chief/Hill-frame vectors into the deputy frame.
inline Mat3 dcm_from_quat(const Quaternion &q) {
    require_unit(q);
    const double q1 = q.qv.x(), q2 = q.qv.y(), q3 = q.qv.z(), q4 = q.q4;
    Mat3 c;
    c << q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4, 2.0 * (q1 * q2 + q3 * q4), 2.0 * (q1 * q3 - q2 * q4),
         2.0 * (q1 * q2 - q3 * q4), -q1 * q1 + q2 * q2 - q3 * q3 + q4 * q4, 2.0 * (q2 * q3 + q1 * q4),
         2.0 * (q1 * q3 + q2 * q4), 2.0 * (q2 * q3 - q1 * q4), -q1 * q1 - q2 * q2 + q3 * q3 + q4 * q4;
    return c;
}

/// Clohessy-Wiltshire acceleration in the Hill frame for a force `f_hill` [N].
inline Vec3 cw_accel(const Vec3 &r, const Vec3 &v, const Vec3 &f_hill, const BodyParams &p) {
    const double n = p.n;
    const Vec3 a = f_hill / p.md;
    return {3.0 * n * n * r.x() + 2.0 * n * v.y() + a.x(),
            -2.0 * n * v.x() + a.y(),
            -n * n * r.z() + a.z()};
}

struct QuaternionRate {
    Vec3 dqv = Vec3::Zero();
    double dq4 = 0.0;
};

inline QuaternionRate quat_rate(const Quaternion &q, const Vec3 &w) {
    return {-0.5 * w.cross(q.qv) + 0.5 * q.q4 * w, -0.5 * w.dot(q.qv)};
}

/// Torque-free Euler equation for the chief.
inline Vec3 chief_euler_rate(const ChiefState &chief) {
    return -chief.Jc.inverse() * chief.wc.cross(chief.Jc * chief.wc);
}

namespace detail {

inline Vec3 relative_att_accel(const RelativeState &s, const Vec3 &chief_w, const Vec3 &chief_wdot,
                               const Vec3 &tau, const Mat3 &J, const Mat3 &J_inv) {
    const Mat3 C = dcm_from_quat(s.q);
    const Vec3 wc_d = C * chief_w;
    const Vec3 &w = s.w;
    // A*w with A = -J[wc x] - [wc x]J + [J(w + wc) x], expanded as cross products.
    const Vec3 Aw = -J * wc_d.cross(w) - wc_d.cross(J * w) + (J * (w + wc_d)).cross(w);
    const Vec3 h = -wc_d.cross(J * wc_d) - J * (C * chief_wdot);
    return J_inv * (Aw + h + tau);
}

inline Mat3 checked_inverse(const Mat3 &J, const char *what) {
    if (!is_spd(J))
        throw InvalidInertia(std::string(what) + " inertia must be symmetric positive definite");
    return J.inverse();
}

} // namespace detail

/// Relative angular acceleration of the deputy w.r.t. the chief, in the deputy frame.
/// Solves Jd*wdot = A*w + h + tau with the chief rate mapped through C_DC.
inline Vec3 relative_att_accel(const RelativeState &s, const ChiefState &chief, const Vec3 &chief_wdot,
                               const Vec3 &tau, const BodyParams &p) {
    return detail::relative_att_accel(s, chief.wc, chief_wdot, tau, p.Jd, detail::checked_inverse(p.Jd, "deputy"));
}

// ----------------------------------------------------------------------------
// Propagation
// ----------------------------------------------------------------------------

struct Propagated {
    RelativeState rel;
    ChiefState chief;
    /// Largest |norm - 1| of either quaternion before renormalization.
    double norm_drift = 0.0;
};

namespace detail {

struct JointRate {
    Vec3 dr, dv;
    QuaternionRate dq;
    Vec3 dw;
    QuaternionRate dqc;
    Vec3 dwc;
};

// Kinematics evaluated on unnormalized stage quaternions; DCM use requires unit norm,
// so the stage attitude is normalized for the dynamics terms only.
struct InertiaInverses {
    Mat3 Jd_inv, Jc_inv;
};

inline JointRate joint_rate(const RelativeState &s, const ChiefState &c, const Vec3 &f, const Vec3 &tau,
                            const BodyParams &p, const InertiaInverses &inv) {
    JointRate d;
    d.dr = s.v;
    d.dv = cw_accel(s.r, s.v, f, p);
    d.dq = quat_rate(s.q, s.w);
    d.dwc = -inv.Jc_inv * c.wc.cross(c.Jc * c.wc);
    RelativeState unit = s;
    unit.q = s.q.normalized();
    d.dw = relative_att_accel(unit, c.wc, d.dwc, tau, p.Jd, inv.Jd_inv);
    d.dqc = quat_rate(c.qc, c.wc);
    return d;
}

inline void advance(const RelativeState &s, const ChiefState &c, const JointRate &d, double h,
                    RelativeState &so, ChiefState &co) {
    so.r = s.r + h * d.dr;
    so.v = s.v + h * d.dv;
    so.q = {s.q.qv + h * d.dq.dqv, s.q.q4 + h * d.dq.dq4};
    so.w = s.w + h * d.dw;
    co.qc = {c.qc.qv + h * d.dqc.dqv, c.qc.q4 + h * d.dqc.dq4};
    co.wc = c.wc + h * d.dwc;
    co.Jc = c.Jc;
}

} // namespace detail

/// One classical RK4 step of the joint (r, v, q, w, qc, wc) state with force and
/// torque held constant over the step. Quaternions are renormalized afterwards.
inline Propagated rk4_step(const RelativeState &s, const ChiefState &c, const Vec3 &f_hill, const Vec3 &tau,
                           const BodyParams &p, double h) {
    if (!(h > 0.0))
        throw ConfigError("step", "integration step must be positive");

    using detail::advance;
    using detail::joint_rate;

    const detail::InertiaInverses inv{p.Jd.inverse(), c.Jc.inverse()};
    RelativeState s2, s3, s4;
    ChiefState c2, c3, c4;
    const auto k1 = joint_rate(s, c, f_hill, tau, p, inv);
    advance(s, c, k1, 0.5 * h, s2, c2);
    const auto k2 = joint_rate(s2, c2, f_hill, tau, p, inv);
    advance(s, c, k2, 0.5 * h, s3, c3);
    const auto k3 = joint_rate(s3, c3, f_hill, tau, p, inv);
    advance(s, c, k3, h, s4, c4);
    const auto k4 = joint_rate(s4, c4, f_hill, tau, p, inv);

    const double w6 = h / 6.0;
    Propagated out;
    RelativeState &o = out.rel;
    o.r = s.r + w6 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
    o.v = s.v + w6 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    o.q.qv = s.q.qv + w6 * (k1.dq.dqv + 2.0 * k2.dq.dqv + 2.0 * k3.dq.dqv + k4.dq.dqv);
    o.q.q4 = s.q.q4 + w6 * (k1.dq.dq4 + 2.0 * k2.dq.dq4 + 2.0 * k3.dq.dq4 + k4.dq.dq4);
    o.w = s.w + w6 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);

    ChiefState &oc = out.chief;
    oc.Jc = c.Jc;
    oc.qc.qv = c.qc.qv + w6 * (k1.dqc.dqv + 2.0 * k2.dqc.dqv + 2.0 * k3.dqc.dqv + k4.dqc.dqv);
    oc.qc.q4 = c.qc.q4 + w6 * (k1.dqc.dq4 + 2.0 * k2.dqc.dq4 + 2.0 * k3.dqc.dq4 + k4.dqc.dq4);
    oc.wc = c.wc + w6 * (k1.dwc + 2.0 * k2.dwc + 2.0 * k3.dwc + k4.dwc);

    if (!o.allFinite() || !oc.allFinite())
        throw PropagationDiverged("non-finite state after RK4 step");

    out.norm_drift = std::max(std::abs(o.q.norm() - 1.0), std::abs(oc.qc.norm() - 1.0));
    o.q = o.q.normalized();
    oc.qc = oc.qc.normalized();
    return out;
}

} // namespace gfis
