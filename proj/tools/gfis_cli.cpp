// gfis: train, evaluate, simulate and Monte Carlo test fuzzy inspection controllers.

#include <gfis/io.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace gfis;
namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kConfig = 1, kFile = 2, kVersion = 3, kRuntime = 4 };

void print_metrics(const EpisodeResult &r, const Constraints &c) {
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    std::printf("delta_v_mps        %.3f\n", r.delta_v);
    std::printf("insp_rate_pct      %.3f\n", r.insp_rate);
    std::printf("mean_dist_m        %.3f\n", r.mean_dist);
    std::printf("min_dist_m         %.3f\n", r.min_dist);
    std::printf("max_dist_m         %.3f\n", r.max_dist);
    std::printf("collision          %s\n", yn(r.violations.collision));
    std::printf("corridor_exit      %s\n", yn(r.violations.corridor));
    std::printf("actuation_limited  %s\n", yn(r.violations.actuation));
    std::printf("failed             %s\n", yn(r.failed));
    std::printf("successful         %s\n", yn(r.successful(c)));
}

struct TrainArgs {
    std::string scenarios, ga, out, warm_start, history, checkpoint;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

int cmd_train(const TrainArgs &a) {
    const auto scenarios = load_scenario_set(a.scenarios);
    GaConfig cfg = load_ga_config(a.ga);
    if (a.seed)
        cfg.seed = *a.seed;

    std::optional<Controller> warm;
    if (!a.warm_start.empty())
        warm = load_controller(a.warm_start).controller;

    const ControllerCodec codec(warm ? *warm : baseline_controller());
    const fs::path history = a.history.empty() ? fs::path(a.out).replace_extension(".history.csv") : fs::path(a.history);
    const fs::path checkpoint =
        a.checkpoint.empty() ? fs::path(a.out).replace_extension(".checkpoint.json") : fs::path(a.checkpoint);

    std::size_t round = 0, last_gen = 0;
    const Json ga_json = ga_config_to_json(cfg);
    auto on_gen = [&](const GenerationStats &st, const Chromosome &best) {
        if (st.generation < last_gen)
            ++round;
        last_gen = st.generation;
        if (!a.quiet)
            std::fprintf(stderr, "iteration %zu generation %zu best %.6g mean %.6g\n", round, st.generation, st.best,
                         st.mean);
        write_json(checkpoint, {{"iteration", round},
                                {"generation", st.generation},
                                {"best_fitness", st.best},
                                {"ga", ga_json},
                                {"chromosome", {{"reals", best.reals}, {"ints", best.ints}}}});
    };
    const TrainResult r = train(cfg, codec, scenarios, warm, on_gen);

    Json prov = {{"generator", "gfis train"},
                 {"ga", ga_json},
                 {"seed", cfg.seed},
                 {"best_fitness", r.best_fitness},
                 {"training_scenarios", scenarios.size()},
                 {"warm_start", a.warm_start.empty() ? Json(nullptr) : Json(fs::path(a.warm_start).filename().string())}};
    save_controller(a.out, r.controller, prov);

    // Numbering generations continuously across iterations keeps the history one tidy table.
    std::vector<GenerationStats> hist = r.history;
    for (std::size_t i = 0; i < hist.size(); ++i)
        hist[i].generation = i;
    write_text(history, history_csv(hist));
    std::printf("best_fitness %.6f\n", r.best_fitness);
    return kOk;
}

struct EvalArgs {
    std::string controller, scenario, trajectory;
};

int cmd_evaluate(const EvalArgs &a) {
    const ControllerFile cf = load_controller(a.controller);
    EpisodeConfig cfg = load_scenario(a.scenario);
    cfg.record_trajectory = !a.trajectory.empty();
    const EpisodeResult r = run_episode(cfg, cf.controller);
    print_metrics(r, cfg.constraints);
    if (!a.trajectory.empty())
        write_text(a.trajectory, trajectory_csv(r.trajectory));
    return kOk;
}

struct McArgs {
    std::string controller, scenario, out_dir;
    std::size_t runs = 1000;
    std::uint64_t seed = 7;
    double r_min = 50.0, r_max = 100.0;
    bool fixed_sun = false;
};

int cmd_montecarlo(const McArgs &a) {
    const ControllerFile cf = load_controller(a.controller);
    const EpisodeConfig base = load_scenario(a.scenario);
    if (!(a.r_min > 0.0 && a.r_min <= a.r_max))
        throw ConfigError("r-min", "need 0 < r-min <= r-max");
    const ShellSampling shell{a.r_min, a.r_max, !a.fixed_sun};
    const McResult mc = monte_carlo(base, cf.controller, a.runs, a.seed, shell);
    const fs::path dir(a.out_dir);
    write_text(dir / "runs.csv", mc_runs_csv(mc, base.constraints));
    write_text(dir / "summary.csv", mc_summary_csv(mc.summary));
    write_text(dir / "outcomes.csv", mc_outcomes_csv(mc.summary));
    const auto &s = mc.summary;
    std::printf("%-20s %14s %14s %16s\n", "", "delta_v_mps", "insp_rate_pct", "mean_dist_m");
    std::printf("%-20s %14.3f %14.3f %16.3f\n", "Mean", s.delta_v.mean, s.insp_rate.mean, s.mean_dist.mean);
    std::printf("%-20s %14.3f %14.3f %16.3f\n", "Standard deviation", s.delta_v.stddev, s.insp_rate.stddev,
                s.mean_dist.stddev);
    std::printf("runs %zu successes %zu collisions %zu corridor_exits %zu failures %zu\n", s.runs, s.successes,
                s.collisions, s.corridor, s.failures);
    return kOk;
}

template <typename F>
int guarded(F &&f) {
    try {
        return f();
    } catch (const FileError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFile;
    } catch (const VersionMismatch &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kVersion;
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "error: invalid configuration at '%s': %s\n", e.key().c_str(), e.what());
        return kConfig;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntime;
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Genetic fuzzy spacecraft inspection toolkit"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto *train = app.add_subcommand("train", "Tune the three force FISs with the genetic algorithm");
    train->add_option("scenarios", ta.scenarios, "Scenario-set JSON")->required();
    train->add_option("ga_config", ta.ga, "GA configuration JSON")->required();
    train->add_option("out", ta.out, "Output controller JSON")->required();
    train->add_option("--seed", ta.seed, "Override the GA seed");
    train->add_option("--warm-start", ta.warm_start, "Controller JSON to start from");
    train->add_option("--history", ta.history, "Fitness history CSV (default: <out>.history.csv)");
    train->add_option("--checkpoint", ta.checkpoint, "Per-generation checkpoint (default: <out>.checkpoint.json)");
    train->add_flag("--quiet", ta.quiet, "No per-generation progress");

    EvalArgs ea;
    auto *evaluate = app.add_subcommand("evaluate", "Run one episode and print its metrics");
    evaluate->add_option("controller", ea.controller, "Controller JSON")->required();
    evaluate->add_option("scenario", ea.scenario, "Scenario JSON")->required();
    evaluate->add_option("--export-trajectory", ea.trajectory, "Trajectory CSV");

    EvalArgs sa;
    auto *simulate = app.add_subcommand("simulate", "Run one episode and export its trajectory");
    simulate->add_option("controller", sa.controller, "Controller JSON")->required();
    simulate->add_option("scenario", sa.scenario, "Scenario JSON")->required();
    simulate->add_option("--export-trajectory", sa.trajectory, "Trajectory CSV")->required();

    McArgs ma;
    auto *mc = app.add_subcommand("montecarlo", "Monte Carlo campaign over a spherical shell of start positions");
    mc->add_option("controller", ma.controller, "Controller JSON")->required();
    mc->add_option("scenario", ma.scenario, "Base scenario JSON")->required();
    mc->add_option("--runs", ma.runs, "Number of episodes")->check(CLI::PositiveNumber);
    mc->add_option("--seed", ma.seed, "Sampling seed");
    mc->add_option("--out", ma.out_dir, "Output directory")->required();
    mc->add_option("--r-min", ma.r_min, "Inner shell radius [m]");
    mc->add_option("--r-max", ma.r_max, "Outer shell radius [m]");
    mc->add_flag("--fixed-sun", ma.fixed_sun, "Keep the scenario's initial sun angle");

    CLI11_PARSE(app, argc, argv);

    if (*train)
        return guarded([&] { return cmd_train(ta); });
    if (*evaluate)
        return guarded([&] { return cmd_evaluate(ea); });
    if (*simulate)
        return guarded([&] { return cmd_evaluate(sa); });
    return guarded([&] { return cmd_montecarlo(ma); });
}
