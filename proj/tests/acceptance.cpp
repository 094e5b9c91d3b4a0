// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include "oracles.hpp"

#include <gfis/controllers.hpp>
#include <gfis/ga.hpp>
#include <gfis/io.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

using namespace gfis;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const char *name, const std::string &detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string format(const char *fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path data(const char *name) { return fs::path(GFIS_DATA_DIR) / name; }

Quaternion random_unit(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    return Quaternion{{g(rng), g(rng), g(rng)}, g(rng)}.normalized();
}

void dynamics_fidelity() {
    const auto t0 = std::chrono::steady_clock::now();
    BodyParams p;
    ChiefState c;
    c.wc = {0, 0, p.n};
    c.Jc = 1000.0 * Mat3::Identity();
    auto propagate = [&](double h, double t_end) {
        RelativeState s;
        s.r = {10, 0, 0};
        const auto steps = std::llround(t_end / h);
        for (long long k = 0; k < steps; ++k)
            s = rk4_step(s, c, Vec3::Zero(), Vec3::Zero(), p, h).rel;
        return s;
    };
    auto err = [&](const RelativeState &s, double t) {
        const auto ref = oracle::cw_state({10, 0, 0, 0, 0, 0}, p.n, t);
        return (s.r - Vec3(ref[0], ref[1], ref[2])).norm();
    };
    const double period = 2 * std::numbers::pi / p.n;
    const double t_orbit = 10.0 * std::round(period / 10.0);
    double worst = 0.0;
    {
        RelativeState s;
        s.r = {10, 0, 0};
        for (double t = 10.0; t <= t_orbit + 1e-9; t += 10.0) {
            s = rk4_step(s, c, Vec3::Zero(), Vec3::Zero(), p, 10.0).rel;
            worst = std::max(worst, err(s, t));
        }
    }
    const double t_ord = 5680.0;
    const double ratio = err(propagate(40.0, t_ord), t_ord) / err(propagate(20.0, t_ord), t_ord);
    const double dt = seconds_since(t0);
    report(worst < 1e-4 && ratio >= 12.0 && dt < 1.0, "dynamics_fidelity",
           format("max |r - r_cw| over one orbit %.3e m (< 1e-4), halving ratio %.2f (>= 12), %.3f s (< 1)", worst,
                  ratio, dt));
}

void quaternion_integrity(const Controller &ref) {
    EpisodeConfig cfg = load_scenario(data("scenario_default.json"));
    cfg.record_trajectory = false;
    const auto r = run_episode(cfg, ref);
    report(r.sum_norm_drift < 1e-9, "quaternion_integrity",
           format("accumulated norm drift over 3600 s %.3e (< 1e-9), worst step %.3e", r.sum_norm_drift,
                  r.max_norm_drift));
}

void visibility_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0, 1);
    const SensorModel sensor;
    std::size_t mismatches = 0, seen = 0;
    for (int i = 0; i < 100; ++i) {
        auto grid = generate_grid(100, 10.0);
        const Vec3 r = (15.0 + 135.0 * u(rng)) * Vec3(g(rng), g(rng), g(rng)).normalized();
        const Quaternion q = i % 2 == 0 ? target_attitude(r, sensor.boresight, random_unit(rng)) : random_unit(rng);
        const Vec3 rs = sun_position({2 * std::numbers::pi * u(rng)});
        // Boresight in Hill coordinates via the explicit frame rotation.
        const auto axis = q.qv.norm() > 0 ? q.qv.normalized() : Vec3::UnitX();
        const double angle = 2 * std::atan2(q.qv.norm(), q.q4);
        const auto R = oracle::frame_rotation({axis.x(), axis.y(), axis.z()}, angle);
        const Vec3 b = sensor.boresight;
        const oracle::V3 b_hill{R[0][0] * b.x() + R[1][0] * b.y() + R[2][0] * b.z(),
                                R[0][1] * b.x() + R[1][1] * b.y() + R[2][1] * b.z(),
                                R[0][2] * b.x() + R[1][2] * b.y() + R[2][2] * b.z()};
        std::vector<bool> expect;
        for (const auto &pt : grid.points)
            expect.push_back(oracle::visible({pt.x(), pt.y(), pt.z()}, {r.x(), r.y(), r.z()}, b_hill, sensor.beta,
                                             10.0, {rs.x(), rs.y(), rs.z()}));
        seen += update_inspected(grid, r, q, sensor, rs);
        mismatches += grid.inspected == expect ? 0 : 1;
    }
    const double dt = seconds_since(t0);
    report(mismatches == 0 && dt < 1.0, "visibility_oracle",
           format("%zu of 100 poses differ from brute force (%zu points seen), %.3f s (< 1)", mismatches, seen, dt));
}

void delta_v_accounting() {
    auto cfg = EpisodeConfig::defaults();
    cfg.initial.r = {60, 0, 0};
    cfg.initial.w = Vec3::Zero();
    cfg.constraints.d_max = 1e9;
    // Constant 0.05 N along body x; frame-aligned and not rotating, so body and Hill axes coincide.
    Controller c = zero_force_controller();
    for (auto *f : {&c.fis_x, &c.fis_y, &c.fis_z})
        for (auto &mf : f->output.mfs)
            mf = {0.0, 0.02};
    c.fis_x.output.lo = 0.05 - 0.95;
    c.fis_x.output.hi = 0.05 + 0.95;
    for (auto &mf : c.fis_x.output.mfs)
        mf = {0.05, 0.02};
    c.gains.mode = AttitudeMode::FrameAlign;
    const auto r = run_episode(cfg, c);
    // Hand computation of sum |f_i| / m * T over the logged forces and over the nominal 0.05 N.
    double hand = 0.0, nominal = 0.0;
    for (const auto &f : r.forces)
        hand += (std::abs(f.x()) + std::abs(f.y()) + std::abs(f.z())) / 12.0 * 10.0;
    for (int k = 0; k < 360; ++k)
        nominal += 0.05 / 12.0 * 10.0;
    const double eps = std::numeric_limits<double>::epsilon();
    report(r.forces.size() == 360 && std::abs(r.delta_v - hand) <= 360 * eps * hand &&
               std::abs(r.delta_v - nominal) <= 360 * eps * nominal && std::abs(nominal - 15.0) <= 360 * eps * 15.0,
           "delta_v_accounting",
           format("harness %.17g m/s, hand sum of logged forces %.17g m/s, nominal %.17g m/s", r.delta_v, hand,
                  nominal));
}

VariableSpec random_variable(std::mt19937_64 &rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(0, 1);
    VariableSpec v;
    v.name = "v";
    v.lo = lo;
    v.hi = hi;
    std::array<double, kMfCount> m{};
    for (auto &x : m)
        x = lo + (hi - lo) * u(rng);
    std::sort(m.begin(), m.end());
    for (std::size_t i = 0; i < kMfCount; ++i)
        v.mfs[i] = {m[i], (hi - lo) * (0.02 + 0.48 * u(rng))};
    return v;
}

void defuzzification_oracle() {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> term(0, 4);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        FisParams f;
        std::vector<std::array<oracle::Mf, 5>> ins;
        std::vector<std::array<double, 2>> ranges;
        std::vector<double> x;
        for (int a = 0; a < 3; ++a) {
            const double lo = -3.0 * a, hi = 1.0 + 50.0 * a;
            f.inputs.push_back(random_variable(rng, lo, hi));
            std::array<oracle::Mf, 5> m{};
            for (std::size_t k = 0; k < 5; ++k)
                m[k] = {f.inputs.back().mfs[k].mean, f.inputs.back().mfs[k].sigma};
            ins.push_back(m);
            ranges.push_back({lo, hi});
            x.push_back(lo + (hi - lo) * u(rng));
        }
        f.output = random_variable(rng, -1.0, 1.0);
        f.rules = RuleTable::filled(3, 0);
        for (auto &e : f.rules.entries)
            e = term(rng);
        std::array<oracle::Mf, 5> out{};
        for (std::size_t k = 0; k < 5; ++k)
            out[k] = {f.output.mfs[k].mean, f.output.mfs[k].sigma};
        const double ref = oracle::mamdani_centroid(ins, ranges, out, -1.0, 1.0, f.rules.entries, x, 100001);
        worst = std::max(worst, std::abs(infer_and_defuzzify(f, x) - ref) / f.output.width());
    }
    report(worst <= 1e-3, "defuzzification_oracle",
           format("worst |engine - fine grid| / range over 1000 cases %.3e (<= 1e-3)", worst));
}

void ga_machinery() {
    auto sphere = [](const Chromosome &ch) {
        double s = 0;
        for (double x : ch.reals)
            s += (x - 1.0) * (x - 1.0);
        return s;
    };
    Chromosome layout;
    layout.real_bounds.assign(6, {-5.0, 5.0});
    layout.reals.assign(6, 0.0);

    GaConfig mono;
    mono.population = 40;
    mono.generations = 50;
    mono.seed = 21;
    const auto m = evolve(mono, layout, sphere);
    bool monotone = true;
    for (std::size_t gi = 1; gi < m.history.size(); ++gi)
        monotone = monotone && m.history[gi].best <= m.history[gi - 1].best;

    const auto t0 = std::chrono::steady_clock::now();
    GaConfig cfg;
    cfg.population = 50;
    cfg.generations = 100;
    cfg.seed = 11;
    const auto r = evolve(cfg, layout, sphere);
    const double dt = seconds_since(t0);
    report(monotone && r.best_fitness < 1e-2 && dt < 10.0, "ga_machinery",
           format("elitism monotone over 50 generations: %s; sphere best %.3e (< 1e-2) in %.2f s (< 10)",
                  monotone ? "yes" : "no", r.best_fitness, dt));
}

void desk_training() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scenarios = load_scenario_set(data("desk_scenarios.json"));
    const GaConfig cfg = load_ga_config(data("ga_desk.json"));
    const ControllerCodec codec(baseline_controller());
    const auto r = train(cfg, codec, scenarios);
    bool ok = scenarios.size() == 2 && cfg.population == 40 && cfg.generations == 50;
    std::string detail;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto e = run_episode(scenarios[i], r.controller);
        ok = ok && e.insp_rate >= 95.0 && !e.violations.collision && !e.violations.corridor && !e.failed;
        detail += format("scenario %zu: eta %.1f%% dv %.2f m/s collision %d corridor %d; ", i, e.insp_rate,
                         e.delta_v, int(e.violations.collision), int(e.violations.corridor));
    }
    const double dt = seconds_since(t0);
    ok = ok && dt <= 15 * 60.0;
    report(ok, "desk_training", detail + format("seed %llu, %.1f s (<= 900)", (unsigned long long)cfg.seed, dt));
}

void full_scale(const Controller &ref) {
    const EpisodeConfig base = load_scenario(data("scenario_default.json"));
    const auto mc = monte_carlo(base, ref, 1000, 7);
    const auto &s = mc.summary;
    const bool ok = s.insp_rate.mean >= 95.0 && s.delta_v.mean >= 3.0 && s.delta_v.mean <= 9.0;
    report(ok, "full_scale_monte_carlo",
           format("reference controller over 1000 runs: mean dv %.3f m/s (in [3, 9]), mean eta %.3f%% (>= 95), "
                  "mean distance %.3f m",
                  s.delta_v.mean, s.insp_rate.mean, s.mean_dist.mean));
}

void mc_reproducibility(const Controller &ref) {
    const auto t0 = std::chrono::steady_clock::now();
    const EpisodeConfig base = load_scenario(data("scenario_default.json"));
    const fs::path dir = fs::temp_directory_path() / "gfis_acceptance";
    const auto a = dir / "a_summary.csv", b = dir / "b_summary.csv";
    write_text(a, mc_summary_csv(monte_carlo(base, ref, 100, 99).summary));
    write_text(b, mc_summary_csv(monte_carlo(base, ref, 100, 99).summary));
    const bool same = read_text(a) == read_text(b);
    const double dt = seconds_since(t0);
    report(same && dt < 60.0, "monte_carlo_reproducibility",
           format("summary files byte-identical: %s, %.1f s (< 60)", same ? "yes" : "no", dt));
}

void constraint_compliance(const Controller &ref) {
    EpisodeConfig base = load_scenario(data("scenario_default.json"));
    const auto mc = monte_carlo(base, ref, 100, 11);
    double fmax = 0, tmax = 0;
    std::size_t clear = 0;
    for (const auto &r : mc.runs) {
        fmax = std::max(fmax, r.max_abs_force);
        tmax = std::max(tmax, r.max_abs_torque);
        clear += r.min_dist >= 15.0 ? 1 : 0;
    }
    report(fmax <= 1.0 && tmax <= 0.01 && clear >= 95, "constraint_compliance",
           format("max |f| %.6f N (<= 1), max |tau| %.6f Nm (<= 0.01), min distance >= 15 m in %zu of 100 (>= 95)",
                  fmax, tmax, clear));
}

} // namespace

int main() {
    try {
        const Controller ref = load_controller(data("reference_controller.json")).controller;
        dynamics_fidelity();
        quaternion_integrity(ref);
        visibility_oracle();
        delta_v_accounting();
        defuzzification_oracle();
        ga_machinery();
        desk_training();
        full_scale(ref);
        mc_reproducibility(ref);
        constraint_compliance(ref);
    } catch (const std::exception &e) {
        std::printf("FAIL setup: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
