#pragma once

// Inspection episodes, delta-v accounting, and Monte Carlo campaigns.

#include <gfis/dynamics.hpp>
#include <gfis/geometry.hpp>
#include <gfis/guidance.hpp>
#include <gfis/parallel.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace gfis {

struct Constraints {
    double d_min = 15.0;         // [m]
    double d_max = 200.0;        // [m]
    double eta_threshold = 95.0; // [%]
};

struct EpisodeConfig {
    double tf = 3600.0; // [s]
    double T = 10.0;    // control interval [s]
    /// RK4 steps per control interval. Thrust is held over T; the attitude
    /// loop is re-evaluated on every sub-step.
    int substeps = 20;
    RelativeState initial;
    ChiefState chief;
    BodyParams body;
    SensorModel sensor;
    std::size_t grid_points = 100;
    double grid_radius = 10.0; // [m]
    SunState sun;
    Constraints constraints;
    bool early_stop = false;
    bool record_trajectory = true;

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(tf / T)); }

    void validate() const {
        if (!(T > 0.0))
            throw ConfigError("T_s", "control interval must be positive");
        if (!(tf > 0.0))
            throw ConfigError("tf_s", "duration must be positive");
        if (std::abs(tf / T - std::round(tf / T)) > 1e-9)
            throw ConfigError("tf_s", "duration must be an integer number of control intervals");
        if (substeps < 1)
            throw ConfigError("substeps", "need at least one integration step per interval");
        if (!(constraints.d_min < constraints.d_max))
            throw ConfigError("d_min_m", "d_min must be smaller than d_max");
        if (!(constraints.eta_threshold >= 0.0 && constraints.eta_threshold <= 100.0))
            throw ConfigError("eta_threshold_pct", "must lie in [0, 100]");
        if (!initial.allFinite())
            throw ConfigError("r0_m", "initial state must be finite");
        if (std::abs(initial.q.norm() - 1.0) > kUnitQuatTolerance)
            throw ConfigError("q0", "initial quaternion must be unit norm");
        if (std::abs(chief.qc.norm() - 1.0) > kUnitQuatTolerance)
            throw ConfigError("chief_q0", "chief quaternion must be unit norm");
        if (!is_spd(chief.Jc))
            throw ConfigError("chief_inertia_kgm2", "must be symmetric positive definite");
        body.validate();
        sensor.validate();
        if (grid_points < 4)
            throw ConfigError("grid_points", "need at least 4 inspection points");
        if (!(grid_radius > 0.0))
            throw ConfigError("grid_radius_m", "must be positive");
    }

    /// Chief/deputy parameters of the reference inspection problem.
    static EpisodeConfig defaults() {
        EpisodeConfig c;
        const double n = c.body.n;
        c.initial.r = Vec3::Constant(75.0 / std::sqrt(3.0));
        c.initial.w = {0.0, 0.0, n};
        c.chief.wc = {0.0, 0.0, n};
        c.chief.Jc = 1000.0 * Mat3::Identity();
        return c;
    }
};

struct TrajectoryRow {
    double t = 0.0;
    Vec3 r, v;
    Quaternion q;
    Vec3 w;
    Vec3 f = Vec3::Zero();   // Hill-frame force held over [t, t + T) [N]
    Vec3 tau = Vec3::Zero(); // torque at the start of the interval [N m]
    std::size_t newly_inspected = 0;
    double cum_rate = 0.0;   // [%]
};

struct Violations {
    bool collision = false; // |r| < d_min
    bool corridor = false;  // |r| > d_max
    bool actuation = false; // a pre-clamp command exceeded its limit
};

struct EpisodeResult {
    double delta_v = 0.0;   // [m/s]
    double insp_rate = 0.0; // [%]
    double mean_dist = 0.0, min_dist = 0.0, max_dist = 0.0; // [m]
    Violations violations;
    bool failed = false;
    double max_abs_force = 0.0;  // largest applied per-axis force [N]
    double max_abs_torque = 0.0; // largest applied per-axis torque [N m]
    double max_norm_drift = 0.0; // per RK4 step, before renormalization
    double sum_norm_drift = 0.0;
    std::vector<Vec3> forces;    // Hill-frame force per control interval
    std::vector<TrajectoryRow> trajectory;

    bool successful(const Constraints &c) const {
        return !failed && !violations.collision && !violations.corridor && insp_rate >= c.eta_threshold;
    }
};

/// Fuel proxy: sum over intervals of (|fx| + |fy| + |fz|) / md * T.
inline double delta_v(std::span<const Vec3> forces, double md, double T) {
    double dv = 0.0;
    for (const auto &f : forces)
        dv += (std::abs(f.x()) + std::abs(f.y()) + std::abs(f.z())) / md * T;
    return dv;
}

/// Runs one episode to tf (or to the inspection threshold when early_stop is set).
inline EpisodeResult run_episode(const EpisodeConfig &cfg, const Controller &controller) {
    cfg.validate();
    controller.validate();
    const ForceLaw law(controller);
    const std::size_t n_steps = cfg.steps();
    const double h = cfg.T / static_cast<double>(cfg.substeps);
    const auto &body = cfg.body;
    const auto &sensor = cfg.sensor;

    RelativeState s = cfg.initial;
    s.q = s.q.normalized();
    ChiefState chief = cfg.chief;
    chief.qc = chief.qc.normalized();
    SunState sun = cfg.sun;
    InspectionGrid grid = generate_grid(cfg.grid_points, cfg.grid_radius);

    EpisodeResult res;
    res.forces.reserve(n_steps);
    if (cfg.record_trajectory)
        res.trajectory.reserve(n_steps + 1);

    double dist_sum = 0.0;
    std::size_t samples = 0;
    res.min_dist = std::numeric_limits<double>::infinity();
    auto observe = [&](const RelativeState &st) {
        const Vec3 r_s = sun_position(sun);
        const std::size_t fresh = update_inspected(grid, st.r, st.q, sensor, r_s);
        const double d = st.r.norm();
        dist_sum += d;
        ++samples;
        res.min_dist = std::min(res.min_dist, d);
        res.max_dist = std::max(res.max_dist, d);
        if (d < cfg.constraints.d_min)
            res.violations.collision = true;
        if (d > cfg.constraints.d_max)
            res.violations.corridor = true;
        return fresh;
    };
    auto make_row = [&](double t, const RelativeState &st, std::size_t fresh) {
        TrajectoryRow row;
        row.t = t;
        row.r = st.r;
        row.v = st.v;
        row.q = st.q;
        row.w = st.w;
        row.newly_inspected = fresh;
        row.cum_rate = inspection_rate(grid);
        return row;
    };

    // Fallback guidance point before any lit, uninspected point exists.
    Vec3 p_u = cfg.grid_radius * sun_position(sun).normalized();

    std::size_t fresh = observe(s);
    std::size_t k = 0;
    for (; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.T;
        if (cfg.early_stop && inspection_rate(grid) >= cfg.constraints.eta_threshold)
            break;

        if (auto c = uninspected_centroid(grid, sun_position(sun)))
            p_u = *c;
        const GuidanceInputs g = guidance_inputs(s, p_u);
        const ForceCommand fc = law(g, body.fmax);
        const Vec3 f_hill = force_to_hill(fc.f_d, s.q);
        if ((fc.requested.cwiseAbs().array() > body.fmax).any())
            res.violations.actuation = true;
        res.max_abs_force = std::max(res.max_abs_force, fc.f_d.cwiseAbs().maxCoeff());
        res.forces.push_back(f_hill);

        TrajectoryRow row;
        if (cfg.record_trajectory)
            row = make_row(t, s, fresh);

        try {
            for (int sub = 0; sub < cfg.substeps; ++sub) {
                const Quaternion target = attitude_target(s, sensor.boresight, controller.gains.mode);
                const TorqueCommand tc =
                    pd_torque_command(attitude_error(s.q, target), s.w, controller.gains, body.tmax);
                if ((tc.requested.cwiseAbs().array() > body.tmax).any())
                    res.violations.actuation = true;
                res.max_abs_torque = std::max(res.max_abs_torque, tc.tau.cwiseAbs().maxCoeff());
                if (sub == 0)
                    row.tau = tc.tau;
                const Propagated next = rk4_step(s, chief, f_hill, tc.tau, body, h);
                s = next.rel;
                chief = next.chief;
                res.max_norm_drift = std::max(res.max_norm_drift, next.norm_drift);
                res.sum_norm_drift += next.norm_drift;
            }
        } catch (const PropagationDiverged &) {
            res.failed = true;
            if (cfg.record_trajectory) {
                row.f = f_hill;
                res.trajectory.push_back(row);
            }
            break;
        }
        if (cfg.record_trajectory) {
            row.f = f_hill;
            res.trajectory.push_back(row);
        }

        sun = sun.advanced(body.n, cfg.T);
        fresh = observe(s);
    }
    // Closing sample: no control is applied after it.
    if (cfg.record_trajectory && !res.failed)
        res.trajectory.push_back(make_row(static_cast<double>(k) * cfg.T, s, fresh));

    res.delta_v = delta_v(res.forces, body.md, cfg.T);
    res.insp_rate = inspection_rate(grid);
    res.mean_dist = dist_sum / static_cast<double>(samples);
    return res;
}

// ----------------------------------------------------------------------------
// Monte Carlo
// ----------------------------------------------------------------------------

struct ShellSampling {
    double r_min = 50.0;  // [m]
    double r_max = 100.0; // [m]
    bool randomize_sun = true;
};

struct McSample {
    Vec3 r0 = Vec3::Zero();
    double sun_theta0 = 0.0;
};

/// Uniform-in-volume point of the spherical shell [r_min, r_max].
template <typename Rng>
Vec3 sample_shell_position(Rng &rng, double r_min, double r_max) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double z = 2.0 * unit(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double u = unit(rng);
    const double a3 = r_min * r_min * r_min, b3 = r_max * r_max * r_max;
    const double radius = std::cbrt(u * (b3 - a3) + a3);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return radius * Vec3{rho * std::cos(phi), rho * std::sin(phi), z};
}

inline McSample mc_sample(std::uint64_t seed, std::size_t run, const ShellSampling &shell) {
    std::mt19937_64 rng(stream_seed(seed, 0x4d43, run));
    McSample s;
    s.r0 = sample_shell_position(rng, shell.r_min, shell.r_max);
    if (shell.randomize_sun) {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        s.sun_theta0 = angle(rng);
    }
    return s;
}

struct Stat {
    double mean = 0.0;
    double stddev = 0.0; // sample (n - 1) standard deviation
};

inline Stat describe(std::span<const double> xs) {
    Stat st;
    if (xs.empty())
        return st;
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    st.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - st.mean) * (x - st.mean);
        st.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return st;
}

struct McSummary {
    std::size_t runs = 0;
    Stat delta_v, insp_rate, mean_dist;
    std::size_t successes = 0, collisions = 0, corridor = 0, failures = 0;
};

struct McResult {
    std::vector<McSample> samples;
    std::vector<EpisodeResult> runs;
    McSummary summary;
};

inline McSummary summarize(std::span<const EpisodeResult> runs, const Constraints &c) {
    McSummary s;
    s.runs = runs.size();
    std::vector<double> dv, eta, dist;
    for (const auto &r : runs) {
        dv.push_back(r.delta_v);
        eta.push_back(r.insp_rate);
        dist.push_back(r.mean_dist);
        s.successes += r.successful(c) ? 1 : 0;
        s.collisions += r.violations.collision ? 1 : 0;
        s.corridor += r.violations.corridor ? 1 : 0;
        s.failures += r.failed ? 1 : 0;
    }
    s.delta_v = describe(dv);
    s.insp_rate = describe(eta);
    s.mean_dist = describe(dist);
    return s;
}

/// Episodes from shell-sampled initial positions at rest. Deterministic in `seed`;
/// run i always uses the stream derived from (seed, i).
inline McResult monte_carlo(const EpisodeConfig &base, const Controller &controller, std::size_t n_runs,
                            std::uint64_t seed, const ShellSampling &shell = {}, bool keep_trajectories = false) {
    if (n_runs < 1)
        throw ConfigError("runs", "need at least one Monte Carlo run");
    McResult out;
    out.samples.resize(n_runs);
    out.runs.resize(n_runs);
    parallel_for(n_runs, [&](std::size_t i) {
        const McSample smp = mc_sample(seed, i, shell);
        EpisodeConfig cfg = base;
        cfg.initial.r = smp.r0;
        cfg.initial.v = Vec3::Zero();
        if (shell.randomize_sun)
            cfg.sun.theta = smp.sun_theta0;
        else
            out.samples[i].sun_theta0 = cfg.sun.theta;
        cfg.record_trajectory = keep_trajectories;
        out.samples[i].r0 = smp.r0;
        if (shell.randomize_sun)
            out.samples[i].sun_theta0 = smp.sun_theta0;
        out.runs[i] = run_episode(cfg, controller);
    });
    out.summary = summarize(out.runs, base.constraints);
    return out;
}

} // namespace gfis
