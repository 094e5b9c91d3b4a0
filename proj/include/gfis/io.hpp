#pragma once

// File formats: JSON scenario, scenario-set, GA and controller documents, and
// CSV exports for trajectories, fitness histories and Monte Carlo campaigns.

#include <gfis/ga.hpp>
#include <gfis/sim.hpp>

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

namespace gfis {

using Json = nlohmann::json;

inline constexpr int kControllerFormatVersion = 1;
inline constexpr const char *kControllerFormat = "gfis-controller";

struct FileError : Error {
    FileError(const std::filesystem::path &path, const std::string &what)
        : Error(path.string() + ": " + what), path_(path) {}
    const std::filesystem::path &path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct VersionMismatch : Error {
    using Error::Error;
};

// ----------------------------------------------------------------------------
// Files
// ----------------------------------------------------------------------------

inline std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FileError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FileError(path, "cannot open file for writing");
    out << text;
    if (!out)
        throw FileError(path, "write failed");
}

inline Json read_json(const std::filesystem::path &path) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw FileError(path, std::string("invalid JSON: ") + e.what());
    }
}

inline void write_json(const std::filesystem::path &path, const Json &j) { write_text(path, j.dump(2) + "\n"); }

// ----------------------------------------------------------------------------
// JSON helpers
// ----------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const Json &j, std::initializer_list<const char *> known, const std::string &where) {
    if (!j.is_object())
        throw ConfigError(where.empty() ? "document" : where, "expected a JSON object");
    const std::set<std::string> ok(known.begin(), known.end());
    for (const auto &[k, _] : j.items())
        if (!ok.contains(k))
            throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
}

template <typename T>
T get(const Json &j, const std::string &key) {
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception &e) {
        throw ConfigError(key, e.what());
    }
}

template <typename T>
void get_to(const Json &j, const std::string &key, T &out) {
    if (j.contains(key))
        out = get<T>(j, key);
}

inline Vec3 vec3(const Json &j, const std::string &key) {
    const auto v = get<std::vector<double>>(j, key);
    if (v.size() != 3)
        throw ConfigError(key, "expected 3 numbers");
    return {v[0], v[1], v[2]};
}

inline Json to_json(const Vec3 &v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Quaternion quat(const Json &j, const std::string &key) {
    const auto v = get<std::vector<double>>(j, key);
    if (v.size() != 4)
        throw ConfigError(key, "expected 4 numbers [q1, q2, q3, q4], scalar last");
    return {{v[0], v[1], v[2]}, v[3]};
}

inline Json to_json(const Quaternion &q) { return Json::array({q.qv.x(), q.qv.y(), q.qv.z(), q.q4}); }

inline Mat3 mat3(const Json &j, const std::string &key) {
    const auto rows = get<std::vector<std::vector<double>>>(j, key);
    if (rows.size() != 3)
        throw ConfigError(key, "expected a 3x3 matrix");
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        if (rows[i].size() != 3)
            throw ConfigError(key, "expected a 3x3 matrix");
        for (int k = 0; k < 3; ++k)
            m(i, k) = rows[i][k];
    }
    return m;
}

inline Json to_json(const Mat3 &m) {
    Json rows = Json::array();
    for (int i = 0; i < 3; ++i)
        rows.push_back(Json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return rows;
}

inline constexpr double kDeg = std::numbers::pi / 180.0;

} // namespace detail

// ----------------------------------------------------------------------------
// Scenario
// ----------------------------------------------------------------------------

/// Missing keys take the reference defaults. Rates w0 and chief_w0 default to
/// (0, 0, n) with the file's mean motion.
inline EpisodeConfig scenario_from_json(const Json &j) {
    using namespace detail;
    reject_unknown(j,
                   {"tf_s", "T_s", "substeps", "r0_m", "v0_mps", "q0", "w0_radps", "chief_q0", "chief_w0_radps",
                    "chief_inertia_kgm2", "deputy_mass_kg", "deputy_inertia_kgm2", "mean_motion_radps", "fmax_N",
                    "tmax_Nm", "boresight", "fov_half_angle_deg", "grid_points", "grid_radius_m", "sun_theta0_rad",
                    "sun_distance_m", "d_min_m", "d_max_m", "eta_threshold_pct", "early_stop"},
                   "");
    EpisodeConfig c = EpisodeConfig::defaults();
    get_to(j, "tf_s", c.tf);
    get_to(j, "T_s", c.T);
    get_to(j, "substeps", c.substeps);
    get_to(j, "deputy_mass_kg", c.body.md);
    get_to(j, "mean_motion_radps", c.body.n);
    get_to(j, "fmax_N", c.body.fmax);
    get_to(j, "tmax_Nm", c.body.tmax);
    if (j.contains("deputy_inertia_kgm2"))
        c.body.Jd = mat3(j, "deputy_inertia_kgm2");
    const Vec3 orbit_rate{0.0, 0.0, c.body.n};
    c.initial.w = orbit_rate;
    c.chief.wc = orbit_rate;
    if (j.contains("r0_m"))
        c.initial.r = vec3(j, "r0_m");
    if (j.contains("v0_mps"))
        c.initial.v = vec3(j, "v0_mps");
    if (j.contains("q0"))
        c.initial.q = quat(j, "q0");
    if (j.contains("w0_radps"))
        c.initial.w = vec3(j, "w0_radps");
    if (j.contains("chief_q0"))
        c.chief.qc = quat(j, "chief_q0");
    if (j.contains("chief_w0_radps"))
        c.chief.wc = vec3(j, "chief_w0_radps");
    if (j.contains("chief_inertia_kgm2"))
        c.chief.Jc = mat3(j, "chief_inertia_kgm2");
    if (j.contains("boresight"))
        c.sensor.boresight = vec3(j, "boresight");
    if (j.contains("fov_half_angle_deg"))
        c.sensor.beta = get<double>(j, "fov_half_angle_deg") * kDeg;
    get_to(j, "grid_points", c.grid_points);
    get_to(j, "grid_radius_m", c.grid_radius);
    get_to(j, "sun_theta0_rad", c.sun.theta);
    get_to(j, "sun_distance_m", c.sun.dES);
    get_to(j, "d_min_m", c.constraints.d_min);
    get_to(j, "d_max_m", c.constraints.d_max);
    get_to(j, "eta_threshold_pct", c.constraints.eta_threshold);
    get_to(j, "early_stop", c.early_stop);
    if (!(c.sun.dES > 0.0))
        throw ConfigError("sun_distance_m", "must be positive");
    c.validate();
    return c;
}

inline Json scenario_to_json(const EpisodeConfig &c) {
    using detail::to_json;
    return {{"tf_s", c.tf},
            {"T_s", c.T},
            {"substeps", c.substeps},
            {"r0_m", to_json(c.initial.r)},
            {"v0_mps", to_json(c.initial.v)},
            {"q0", to_json(c.initial.q)},
            {"w0_radps", to_json(c.initial.w)},
            {"chief_q0", to_json(c.chief.qc)},
            {"chief_w0_radps", to_json(c.chief.wc)},
            {"chief_inertia_kgm2", to_json(c.chief.Jc)},
            {"deputy_mass_kg", c.body.md},
            {"deputy_inertia_kgm2", to_json(c.body.Jd)},
            {"mean_motion_radps", c.body.n},
            {"fmax_N", c.body.fmax},
            {"tmax_Nm", c.body.tmax},
            {"boresight", to_json(c.sensor.boresight)},
            {"fov_half_angle_deg", c.sensor.beta / detail::kDeg},
            {"grid_points", c.grid_points},
            {"grid_radius_m", c.grid_radius},
            {"sun_theta0_rad", c.sun.theta},
            {"sun_distance_m", c.sun.dES},
            {"d_min_m", c.constraints.d_min},
            {"d_max_m", c.constraints.d_max},
            {"eta_threshold_pct", c.constraints.eta_threshold},
            {"early_stop", c.early_stop}};
}

inline EpisodeConfig load_scenario(const std::filesystem::path &path) { return scenario_from_json(read_json(path)); }

/// {"base": scenario, "initial_positions_m": [[x, y, z], ...], "sun_theta0_rad": [...]}.
/// Without positions the eight 75 m octant starts are used. The optional sun
/// phases pair with the scenarios one to one.
inline std::vector<EpisodeConfig> scenario_set_from_json(const Json &j) {
    detail::reject_unknown(j, {"base", "initial_positions_m", "sun_theta0_rad"}, "");
    const EpisodeConfig base = j.contains("base") ? scenario_from_json(j.at("base")) : EpisodeConfig::defaults();
    std::vector<EpisodeConfig> out;
    if (!j.contains("initial_positions_m")) {
        out = training_scenarios(base);
    } else {
        const auto pos = detail::get<std::vector<std::vector<double>>>(j, "initial_positions_m");
        if (pos.empty())
            throw ConfigError("initial_positions_m", "need at least one position");
        for (const auto &p : pos) {
            if (p.size() != 3)
                throw ConfigError("initial_positions_m", "each position needs 3 numbers");
            EpisodeConfig c = base;
            c.initial.r = {p[0], p[1], p[2]};
            c.initial.v = Vec3::Zero();
            out.push_back(c);
        }
    }
    if (j.contains("sun_theta0_rad")) {
        const auto sun = detail::get<std::vector<double>>(j, "sun_theta0_rad");
        if (sun.size() != out.size())
            throw ConfigError("sun_theta0_rad", "need one sun phase per scenario");
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i].sun.theta = sun[i];
    }
    for (const auto &c : out)
        c.validate();
    return out;
}

inline std::vector<EpisodeConfig> load_scenario_set(const std::filesystem::path &path) {
    return scenario_set_from_json(read_json(path));
}

// ----------------------------------------------------------------------------
// GA configuration
// ----------------------------------------------------------------------------

inline GaConfig ga_config_from_json(const Json &j) {
    using detail::get_to;
    detail::reject_unknown(j,
                           {"population", "generations", "tournament_size", "crossover_rate", "mutation_rate",
                            "elitism_rate", "seed", "mutation_scale_start", "mutation_scale_end",
                            "warm_start_fraction", "iterations", "aggregation", "penalty_collision",
                            "penalty_corridor", "penalty_shortfall_per_pct", "penalty_failed"},
                           "");
    GaConfig c;
    get_to(j, "population", c.population);
    get_to(j, "generations", c.generations);
    get_to(j, "tournament_size", c.tournament_size);
    get_to(j, "crossover_rate", c.crossover_rate);
    get_to(j, "mutation_rate", c.mutation_rate);
    get_to(j, "elitism_rate", c.elitism_rate);
    get_to(j, "seed", c.seed);
    get_to(j, "mutation_scale_start", c.mutation.start);
    get_to(j, "mutation_scale_end", c.mutation.end);
    get_to(j, "warm_start_fraction", c.warm_start_fraction);
    get_to(j, "iterations", c.iterations);
    get_to(j, "penalty_collision", c.penalties.collision);
    get_to(j, "penalty_corridor", c.penalties.corridor);
    get_to(j, "penalty_shortfall_per_pct", c.penalties.shortfall);
    get_to(j, "penalty_failed", c.penalties.failed);
    if (j.contains("aggregation")) {
        const auto a = detail::get<std::string>(j, "aggregation");
        if (a == "mean")
            c.aggregation = Aggregation::Mean;
        else if (a == "worst")
            c.aggregation = Aggregation::Worst;
        else
            throw ConfigError("aggregation", "expected \"mean\" or \"worst\"");
    }
    c.validate();
    return c;
}

inline Json ga_config_to_json(const GaConfig &c) {
    return {{"population", c.population},
            {"generations", c.generations},
            {"tournament_size", c.tournament_size},
            {"crossover_rate", c.crossover_rate},
            {"mutation_rate", c.mutation_rate},
            {"elitism_rate", c.elitism_rate},
            {"seed", c.seed},
            {"mutation_scale_start", c.mutation.start},
            {"mutation_scale_end", c.mutation.end},
            {"warm_start_fraction", c.warm_start_fraction},
            {"iterations", c.iterations},
            {"aggregation", c.aggregation == Aggregation::Mean ? "mean" : "worst"},
            {"penalty_collision", c.penalties.collision},
            {"penalty_corridor", c.penalties.corridor},
            {"penalty_shortfall_per_pct", c.penalties.shortfall},
            {"penalty_failed", c.penalties.failed}};
}

inline GaConfig load_ga_config(const std::filesystem::path &path) { return ga_config_from_json(read_json(path)); }

// ----------------------------------------------------------------------------
// Controller
// ----------------------------------------------------------------------------

namespace detail {

inline Json variable_to_json(const VariableSpec &v) {
    Json means = Json::array(), sigmas = Json::array();
    for (const auto &mf : v.mfs) {
        means.push_back(mf.mean);
        sigmas.push_back(mf.sigma);
    }
    return {{"name", v.name}, {"range", {v.lo, v.hi}}, {"means", means}, {"sigmas", sigmas}};
}

inline VariableSpec variable_from_json(const Json &j) {
    reject_unknown(j, {"name", "range", "means", "sigmas"}, "variable");
    VariableSpec v;
    v.name = get<std::string>(j, "name");
    const auto range = get<std::vector<double>>(j, "range");
    const auto means = get<std::vector<double>>(j, "means");
    const auto sigmas = get<std::vector<double>>(j, "sigmas");
    if (range.size() != 2)
        throw ConfigError(v.name + ".range", "expected [lo, hi]");
    if (means.size() != kMfCount || sigmas.size() != kMfCount)
        throw ConfigError(v.name, "expected five means and five sigmas");
    v.lo = range[0];
    v.hi = range[1];
    for (std::size_t i = 0; i < kMfCount; ++i)
        v.mfs[i] = {means[i], sigmas[i]};
    v.validate();
    return v;
}

inline Json fis_to_json(const FisParams &f) {
    Json inputs = Json::array();
    for (const auto &in : f.inputs)
        inputs.push_back(variable_to_json(in));
    return {{"inputs", inputs},
            {"output", variable_to_json(f.output)},
            {"rules", {{"dims", f.rules.dims}, {"entries", f.rules.entries}}}};
}

inline FisParams fis_from_json(const Json &j, const std::string &axis) {
    reject_unknown(j, {"inputs", "output", "rules"}, "fis." + axis);
    FisParams f;
    if (!j.contains("inputs") || !j.at("inputs").is_array())
        throw ConfigError("fis." + axis + ".inputs", "expected an array of variables");
    for (const auto &in : j.at("inputs"))
        f.inputs.push_back(variable_from_json(in));
    if (!j.contains("output"))
        throw ConfigError("fis." + axis + ".output", "missing");
    f.output = variable_from_json(j.at("output"));
    if (!j.contains("rules"))
        throw ConfigError("fis." + axis + ".rules", "missing");
    const Json &r = j.at("rules");
    reject_unknown(r, {"dims", "entries"}, "fis." + axis + ".rules");
    f.rules.dims = get<std::vector<std::size_t>>(r, "dims");
    f.rules.entries = get<std::vector<int>>(r, "entries");
    f.validate();
    return f;
}

} // namespace detail

struct ControllerFile {
    Controller controller;
    Json provenance = Json::object();
};

inline Json controller_to_json(const Controller &c, const Json &provenance = Json::object()) {
    using namespace detail;
    return {{"format", kControllerFormat},
            {"version", kControllerFormatVersion},
            {"fis", {{"x", fis_to_json(c.fis_x)}, {"y", fis_to_json(c.fis_y)}, {"z", fis_to_json(c.fis_z)}}},
            {"attitude",
             {{"kp_Nm", to_json(c.gains.Kp)},
              {"kd_Nms", to_json(c.gains.Kd)},
              {"mode", c.gains.mode == AttitudeMode::Boresight ? "boresight" : "frame_align"}}},
            {"provenance", provenance}};
}

inline ControllerFile controller_from_json(const Json &j) {
    using namespace detail;
    if (!j.is_object() || j.value("format", std::string()) != kControllerFormat)
        throw ConfigError("format", std::string("not a controller file (expected \"") + kControllerFormat + "\")");
    const int version = get<int>(j, "version");
    if (version != kControllerFormatVersion)
        throw VersionMismatch("controller file version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kControllerFormatVersion) +
                              "); re-export it with a matching gfis release or retrain it with `gfis train`");
    reject_unknown(j, {"format", "version", "fis", "attitude", "provenance"}, "");
    ControllerFile out;
    const Json &fis = j.at("fis");
    reject_unknown(fis, {"x", "y", "z"}, "fis");
    for (const char *axis : {"x", "y", "z"})
        if (!fis.contains(axis))
            throw ConfigError(std::string("fis.") + axis, "missing");
    out.controller.fis_x = fis_from_json(fis.at("x"), "x");
    out.controller.fis_y = fis_from_json(fis.at("y"), "y");
    out.controller.fis_z = fis_from_json(fis.at("z"), "z");
    if (j.contains("attitude")) {
        const Json &a = j.at("attitude");
        reject_unknown(a, {"kp_Nm", "kd_Nms", "mode"}, "attitude");
        if (a.contains("kp_Nm"))
            out.controller.gains.Kp = mat3(a, "kp_Nm");
        if (a.contains("kd_Nms"))
            out.controller.gains.Kd = mat3(a, "kd_Nms");
        if (a.contains("mode")) {
            const auto m = get<std::string>(a, "mode");
            if (m == "boresight")
                out.controller.gains.mode = AttitudeMode::Boresight;
            else if (m == "frame_align")
                out.controller.gains.mode = AttitudeMode::FrameAlign;
            else
                throw ConfigError("attitude.mode", "expected \"boresight\" or \"frame_align\"");
        }
    }
    if (j.contains("provenance"))
        out.provenance = j.at("provenance");
    out.controller.validate();
    return out;
}

inline ControllerFile load_controller(const std::filesystem::path &path) {
    return controller_from_json(read_json(path));
}

inline void save_controller(const std::filesystem::path &path, const Controller &c,
                            const Json &provenance = Json::object()) {
    write_json(path, controller_to_json(c, provenance));
}

// ----------------------------------------------------------------------------
// CSV
// ----------------------------------------------------------------------------

/// Shortest decimal text that parses back to the same double.
inline std::string fmt(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

inline std::string fmt(std::size_t x) { return std::to_string(x); }
inline std::string fmt(bool b) { return b ? "1" : "0"; }

namespace detail {

inline void csv_row(std::string &out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto &c : cells) {
        if (!first)
            out += ',';
        first = false;
        if (c.find_first_of(",\"\r\n") != std::string::npos) {
            out += '"';
            for (char ch : c) {
                if (ch == '"')
                    out += '"';
                out += ch;
            }
            out += '"';
        } else {
            out += c;
        }
    }
    out += "\r\n";
}

} // namespace detail

inline constexpr const char *kTrajectoryHeader = "t,x,y,z,vx,vy,vz,q1,q2,q3,q4,wx,wy,wz,fx,fy,fz,tx,ty,tz,newly_inspected,cum_rate";

inline std::string trajectory_csv(std::span<const TrajectoryRow> rows) {
    std::string out = std::string(kTrajectoryHeader) + "\r\n";
    for (const auto &r : rows)
        detail::csv_row(out, {fmt(r.t),       fmt(r.r.x()),   fmt(r.r.y()),   fmt(r.r.z()),   fmt(r.v.x()),
                              fmt(r.v.y()),   fmt(r.v.z()),   fmt(r.q.qv.x()), fmt(r.q.qv.y()), fmt(r.q.qv.z()),
                              fmt(r.q.q4),    fmt(r.w.x()),   fmt(r.w.y()),   fmt(r.w.z()),   fmt(r.f.x()),
                              fmt(r.f.y()),   fmt(r.f.z()),   fmt(r.tau.x()), fmt(r.tau.y()), fmt(r.tau.z()),
                              fmt(r.newly_inspected), fmt(r.cum_rate)});
    return out;
}

/// Minimal reader for the numeric CSVs written here: header row, then rows of numbers.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string &name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ConfigError(name, "column not found");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable parse_numeric_csv(const std::string &text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
            continue;
        }
        std::vector<double> row;
        for (const auto &c : cells) {
            double v = 0.0;
            const auto r = std::from_chars(c.data(), c.data() + c.size(), v);
            if (r.ec != std::errc() || r.ptr != c.data() + c.size())
                throw ConfigError(c, "not a number");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline std::string history_csv(std::span<const GenerationStats> hist) {
    std::string out = "iteration_generation,best_fitness,mean_fitness\r\n";
    for (const auto &h : hist)
        detail::csv_row(out, {fmt(h.generation), fmt(h.best), fmt(h.mean)});
    return out;
}

inline std::string mc_runs_csv(const McResult &mc, const Constraints &c) {
    std::string out = "run,x0_m,y0_m,z0_m,radius_m,sun_theta0_rad,delta_v_mps,insp_rate_pct,mean_dist_m,min_dist_m,"
                      "max_dist_m,collision,corridor,actuation,failed,success\r\n";
    for (std::size_t i = 0; i < mc.runs.size(); ++i) {
        const auto &s = mc.samples[i];
        const auto &r = mc.runs[i];
        detail::csv_row(out, {fmt(i), fmt(s.r0.x()), fmt(s.r0.y()), fmt(s.r0.z()), fmt(s.r0.norm()),
                              fmt(s.sun_theta0), fmt(r.delta_v), fmt(r.insp_rate), fmt(r.mean_dist), fmt(r.min_dist),
                              fmt(r.max_dist), fmt(r.violations.collision), fmt(r.violations.corridor),
                              fmt(r.violations.actuation), fmt(r.failed), fmt(r.successful(c))});
    }
    return out;
}

/// Rows "Mean" and "Standard deviation" over delta-v, inspection rate and mean distance.
inline std::string mc_summary_csv(const McSummary &s) {
    std::string out = "statistic,delta_v_mps,insp_rate_pct,mean_dist_m\r\n";
    detail::csv_row(out, {"Mean", fmt(s.delta_v.mean), fmt(s.insp_rate.mean), fmt(s.mean_dist.mean)});
    detail::csv_row(out, {"Standard deviation", fmt(s.delta_v.stddev), fmt(s.insp_rate.stddev),
                          fmt(s.mean_dist.stddev)});
    return out;
}

inline std::string mc_outcomes_csv(const McSummary &s) {
    std::string out = "runs,successes,collisions,corridor_exits,failures\r\n";
    detail::csv_row(out, {fmt(s.runs), fmt(s.successes), fmt(s.collisions), fmt(s.corridor), fmt(s.failures)});
    return out;
}

} // namespace gfis
