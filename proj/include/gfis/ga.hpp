#pragma once

// Genetic tuning of the three axis FISs.
//
// A chromosome holds real genes (interior MF means and all MF sigmas of every
// variable) and integer genes (the three 125-entry rule tables). The
// generational loop uses tournament selection, scattered crossover, annealed
// bound-clamped mutation, and elitism.

#include <gfis/controllers.hpp>
#include <gfis/parallel.hpp>
#include <gfis/sim.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

namespace gfis {

struct GeneBounds {
    double lo = 0.0;
    double hi = 1.0;
    double width() const { return hi - lo; }
    bool operator==(const GeneBounds &) const = default;
};

struct Chromosome {
    std::vector<double> reals;
    std::vector<int> ints;
    std::vector<GeneBounds> real_bounds;
    int int_lo = 0;
    int int_hi = static_cast<int>(kMfCount) - 1;

    std::size_t size() const { return reals.size() + ints.size(); }

    bool same_layout(const Chromosome &o) const {
        return reals.size() == o.reals.size() && ints.size() == o.ints.size() && real_bounds == o.real_bounds &&
               int_lo == o.int_lo && int_hi == o.int_hi;
    }

    bool within_bounds() const {
        for (std::size_t i = 0; i < reals.size(); ++i)
            if (!(reals[i] >= real_bounds[i].lo && reals[i] <= real_bounds[i].hi))
                return false;
        return std::all_of(ints.begin(), ints.end(), [&](int g) { return g >= int_lo && g <= int_hi; });
    }

    bool operator==(const Chromosome &) const = default;
};

// ----------------------------------------------------------------------------
// Encoding
// ----------------------------------------------------------------------------

inline constexpr double kSigmaMinFraction = 0.02;
inline constexpr double kSigmaMaxFraction = 0.5;
inline constexpr std::size_t kGenesPerVariable = (kMfCount - 2) + kMfCount;

namespace detail {

template <typename C>
auto fis_of(C &c) {
    return std::array{&c.fis_x, &c.fis_y, &c.fis_z};
}

template <typename F>
auto variables_of(F &f) {
    using V = std::conditional_t<std::is_const_v<F>, const VariableSpec, VariableSpec>;
    std::vector<V *> out;
    for (auto &in : f.inputs)
        out.push_back(&in);
    out.push_back(&f.output);
    return out;
}

} // namespace detail

/// Maps a controller to and from a chromosome. Variable names and ranges, the
/// pinned extreme means, and the attitude gains come from the template.
class ControllerCodec {
public:
    explicit ControllerCodec(Controller tmpl) : tmpl_(std::move(tmpl)) {
        tmpl_.validate();
        for (const FisParams *f : detail::fis_of(tmpl_))
            for (const VariableSpec *v : detail::variables_of(*f)) {
                const double w = v->width();
                for (std::size_t i = 1; i + 1 < kMfCount; ++i)
                    bounds_.push_back({v->lo, v->hi});
                for (std::size_t i = 0; i < kMfCount; ++i)
                    bounds_.push_back({kSigmaMinFraction * w, kSigmaMaxFraction * w});
            }
        for (const FisParams *f : detail::fis_of(tmpl_))
            n_ints_ += f->rules.entries.size();
    }

    const Controller &templ() const { return tmpl_; }
    std::size_t real_genes() const { return bounds_.size(); }
    std::size_t int_genes() const { return n_ints_; }

    /// Chromosome with the right layout and every gene at its lower bound.
    Chromosome blank() const {
        Chromosome ch;
        ch.real_bounds = bounds_;
        ch.reals.resize(bounds_.size());
        for (std::size_t i = 0; i < bounds_.size(); ++i)
            ch.reals[i] = bounds_[i].lo;
        ch.ints.assign(n_ints_, 0);
        return ch;
    }

    /// Throws ConfigError when `c` does not fit the template layout or a gene
    /// falls outside its bounds.
    Chromosome encode(const Controller &c) const {
        c.validate();
        Chromosome ch;
        ch.real_bounds = bounds_;
        auto t = detail::fis_of(tmpl_);
        auto src = detail::fis_of(c);
        for (std::size_t f = 0; f < 3; ++f) {
            auto tv = detail::variables_of(*t[f]);
            auto sv = detail::variables_of(*src[f]);
            if (tv.size() != sv.size())
                throw ConfigError("inputs", "controller layout does not match the template");
            for (std::size_t a = 0; a < tv.size(); ++a) {
                const VariableSpec &v = *sv[a];
                if (v.lo != tv[a]->lo || v.hi != tv[a]->hi)
                    throw ConfigError(v.name, "variable range differs from the template");
                if (v.mfs.front().mean != v.lo || v.mfs.back().mean != v.hi)
                    throw ConfigError(v.name, "extreme membership means must sit on the range ends");
                for (std::size_t i = 1; i + 1 < kMfCount; ++i)
                    ch.reals.push_back(v.mfs[i].mean);
                for (std::size_t i = 0; i < kMfCount; ++i)
                    ch.reals.push_back(v.mfs[i].sigma);
            }
            ch.ints.insert(ch.ints.end(), src[f]->rules.entries.begin(), src[f]->rules.entries.end());
        }
        if (ch.ints.size() != n_ints_)
            throw ConfigError("rules", "rule table size differs from the template");
        for (std::size_t i = 0; i < ch.reals.size(); ++i)
            if (!(ch.reals[i] >= bounds_[i].lo && ch.reals[i] <= bounds_[i].hi))
                throw ConfigError("gene " + std::to_string(i), "value outside its bounds");
        return ch;
    }

    /// Builds the controller, sorting interior means and flooring sigmas.
    Controller decode(const Chromosome &ch) const {
        if (ch.reals.size() != bounds_.size() || ch.ints.size() != n_ints_)
            throw ConfigError("chromosome", "gene count does not match the controller layout");
        Controller c = tmpl_;
        std::size_t g = 0, r = 0;
        for (FisParams *f : detail::fis_of(c)) {
            for (VariableSpec *v : detail::variables_of(*f)) {
                std::array<double, kMfCount - 2> interior{};
                for (auto &m : interior)
                    m = std::clamp(ch.reals[g++], v->lo, v->hi);
                std::sort(interior.begin(), interior.end());
                v->mfs.front().mean = v->lo;
                v->mfs.back().mean = v->hi;
                for (std::size_t i = 1; i + 1 < kMfCount; ++i)
                    v->mfs[i].mean = interior[i - 1];
                const double floor = kSigmaMinFraction * v->width();
                for (std::size_t i = 0; i < kMfCount; ++i)
                    v->mfs[i].sigma = std::max(ch.reals[g++], floor);
            }
            for (auto &e : f->rules.entries)
                e = std::clamp(ch.ints[r++], 0, static_cast<int>(kMfCount) - 1);
        }
        return c;
    }

private:
    Controller tmpl_;
    std::vector<GeneBounds> bounds_;
    std::size_t n_ints_ = 0;
};

// ----------------------------------------------------------------------------
// Fitness
// ----------------------------------------------------------------------------

enum class Aggregation { Mean, Worst };

struct PenaltyWeights {
    double collision = 1000.0;
    double corridor = 1000.0;
    double shortfall = 10.0; // per percentage point below the threshold
    double failed = 1e6;
};

/// Delta-v plus penalties for one episode.
inline double episode_cost(const EpisodeResult &r, const Constraints &c, const PenaltyWeights &w = {}) {
    if (r.failed)
        return w.failed;
    double zeta = 0.0;
    if (r.violations.collision)
        zeta += w.collision;
    if (r.violations.corridor)
        zeta += w.corridor;
    zeta += w.shortfall * std::max(0.0, c.eta_threshold - r.insp_rate);
    return r.delta_v + zeta;
}

inline double aggregate_costs(std::span<const double> costs, Aggregation agg) {
    if (costs.empty())
        throw ConfigError("scenarios", "need at least one training scenario");
    if (agg == Aggregation::Worst)
        return *std::max_element(costs.begin(), costs.end());
    return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
}

inline double controller_fitness(const Controller &c, std::span<const EpisodeConfig> scenarios,
                                 const PenaltyWeights &w = {}, Aggregation agg = Aggregation::Mean) {
    if (scenarios.empty())
        throw ConfigError("scenarios", "need at least one training scenario");
    std::vector<double> costs;
    costs.reserve(scenarios.size());
    for (const auto &sc : scenarios) {
        EpisodeConfig cfg = sc;
        cfg.record_trajectory = false;
        EpisodeResult r;
        try {
            r = run_episode(cfg, c);
        } catch (const Error &) {
            r.failed = true;
        }
        costs.push_back(episode_cost(r, sc.constraints, w));
    }
    return aggregate_costs(costs, agg);
}

/// L_fit = delta-v + penalty, aggregated over the scenarios.
inline double fitness(const Chromosome &ch, const ControllerCodec &codec, std::span<const EpisodeConfig> scenarios,
                      const PenaltyWeights &w = {}, Aggregation agg = Aggregation::Mean) {
    return controller_fitness(codec.decode(ch), scenarios, w, agg);
}

/// Starts at the eight octant directions, at rest.
inline std::vector<EpisodeConfig> training_scenarios(const EpisodeConfig &base, double radius = 75.0) {
    std::vector<EpisodeConfig> out;
    for (int sx : {1, -1})
        for (int sy : {1, -1})
            for (int sz : {1, -1}) {
                EpisodeConfig c = base;
                c.initial.r = radius / std::sqrt(3.0) * Vec3(sx, sy, sz);
                c.initial.v = Vec3::Zero();
                out.push_back(c);
            }
    return out;
}

// ----------------------------------------------------------------------------
// Operators
// ----------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Lowest-fitness individual among k distinct, uniformly drawn candidates.
inline std::size_t tournament_select(std::span<const double> fitnesses, std::size_t k, Rng &rng) {
    const std::size_t n = fitnesses.size();
    if (n == 0)
        throw ConfigError("population", "tournament on an empty population");
    k = std::clamp<std::size_t>(k, 1, n);
    // Partial Fisher-Yates over a virtual index array.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t best = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        const std::size_t cand = idx[i];
        if (best == n || fitnesses[cand] < fitnesses[best])
            best = cand;
    }
    return best;
}

/// Child 1 takes gene i from `a` where mask[i] is set, else from `b`; child 2 is
/// the complement. Mask covers reals first, then ints.
inline std::pair<Chromosome, Chromosome> crossover_with_mask(const Chromosome &a, const Chromosome &b,
                                                             const std::vector<bool> &mask) {
    if (!a.same_layout(b) || mask.size() != a.size())
        throw ConfigError("chromosome", "crossover parents have different layouts");
    Chromosome c1 = a, c2 = b;
    const std::size_t nr = a.reals.size();
    for (std::size_t i = 0; i < nr; ++i)
        if (!mask[i])
            std::swap(c1.reals[i], c2.reals[i]);
    for (std::size_t i = 0; i < a.ints.size(); ++i)
        if (!mask[nr + i])
            std::swap(c1.ints[i], c2.ints[i]);
    return {std::move(c1), std::move(c2)};
}

inline std::pair<Chromosome, Chromosome> scattered_crossover(const Chromosome &a, const Chromosome &b, double rate,
                                                             Rng &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (!(unit(rng) < rate))
        return {a, b};
    std::vector<bool> mask(a.size());
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = coin(rng);
    return crossover_with_mask(a, b, mask);
}

/// Mutation step scale, as a fraction of gene width, annealed linearly over the run.
struct MutationSchedule {
    double start = 0.10;
    double end = 0.01;

    double scale(std::size_t generation, std::size_t max_gen) const {
        if (max_gen == 0)
            return end;
        const double t = std::min(1.0, static_cast<double>(generation) / static_cast<double>(max_gen));
        return start + (end - start) * t;
    }
};

inline Chromosome adaptive_mutation(Chromosome ch, double rate, std::size_t generation, std::size_t max_gen, Rng &rng,
                                    const MutationSchedule &schedule = {}) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> step(0.0, 1.0);
    std::uniform_int_distribution<int> level(ch.int_lo, ch.int_hi);
    const double scale = schedule.scale(generation, max_gen);
    for (std::size_t i = 0; i < ch.reals.size(); ++i) {
        if (!(unit(rng) < rate))
            continue;
        const auto &b = ch.real_bounds[i];
        ch.reals[i] = std::clamp(ch.reals[i] + scale * b.width() * step(rng), b.lo, b.hi);
    }
    for (auto &g : ch.ints)
        if (unit(rng) < rate)
            g = level(rng);
    return ch;
}

/// Uniform random chromosome within bounds.
inline Chromosome random_chromosome(const Chromosome &layout, Rng &rng) {
    Chromosome ch = layout;
    for (std::size_t i = 0; i < ch.reals.size(); ++i) {
        std::uniform_real_distribution<double> u(ch.real_bounds[i].lo, ch.real_bounds[i].hi);
        ch.reals[i] = u(rng);
    }
    std::uniform_int_distribution<int> level(ch.int_lo, ch.int_hi);
    for (auto &g : ch.ints)
        g = level(rng);
    return ch;
}

// ----------------------------------------------------------------------------
// Generational loop
// ----------------------------------------------------------------------------

struct GaConfig {
    std::size_t population = 200;
    std::size_t generations = 500;
    std::size_t tournament_size = 4;
    double crossover_rate = 0.8;
    double mutation_rate = 0.1;
    double elitism_rate = 0.1;
    std::uint64_t seed = 1;
    MutationSchedule mutation;
    /// Share of a warm-started population seeded with mutated copies of the initial chromosome.
    double warm_start_fraction = 0.5;
    /// Warm-started retraining rounds; a round's result is kept only if it improves.
    std::size_t iterations = 1;
    Aggregation aggregation = Aggregation::Mean;
    PenaltyWeights penalties;

    std::size_t elite_count() const {
        return std::min(population, static_cast<std::size_t>(std::llround(elitism_rate * static_cast<double>(population))));
    }

    void validate() const {
        auto rate = [](double r, const char *key) {
            if (!(r >= 0.0 && r <= 1.0))
                throw ConfigError(key, "must lie in [0, 1]");
        };
        rate(crossover_rate, "crossover_rate");
        rate(mutation_rate, "mutation_rate");
        rate(elitism_rate, "elitism_rate");
        rate(warm_start_fraction, "warm_start_fraction");
        if (population < 2)
            throw ConfigError("population", "need at least two individuals");
        if (tournament_size < 1)
            throw ConfigError("tournament_size", "must be at least 1");
        if (iterations < 1)
            throw ConfigError("iterations", "must be at least 1");
        if (!(mutation.start >= 0.0 && mutation.end >= 0.0))
            throw ConfigError("mutation_scale", "must be non-negative");
    }
};

struct GenerationStats {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
};

struct EvolveResult {
    Chromosome best;
    double best_fitness = std::numeric_limits<double>::infinity();
    std::vector<GenerationStats> history;
    std::vector<std::vector<Chromosome>> populations; // only when requested
};

using FitnessFn = std::function<double(const Chromosome &)>;
using GenerationCallback = std::function<void(const GenerationStats &, const Chromosome &best)>;

struct EvolveOptions {
    bool keep_populations = false;
    GenerationCallback on_generation;
};

/// Generational GA minimizing `fit`. Generation 0 is the initial population;
/// `cfg.generations` breeding rounds follow. Fitness evaluation runs in
/// parallel; all random draws come from streams keyed on (seed, generation,
/// slot), so the outcome does not depend on the thread count.
inline EvolveResult evolve(const GaConfig &cfg, const Chromosome &layout, const FitnessFn &fit,
                           const std::optional<Chromosome> &init = std::nullopt, const EvolveOptions &opt = {}) {
    cfg.validate();
    if (init && !init->same_layout(layout))
        throw ConfigError("warm_start", "initial chromosome does not match the layout");

    const std::size_t n = cfg.population;
    const std::size_t n_elite = cfg.elite_count();
    std::vector<Chromosome> pop(n);
    std::vector<double> fitv(n, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(stream_seed(cfg.seed, 0x1a17, i));
        const auto n_seeded = static_cast<std::size_t>(cfg.warm_start_fraction * static_cast<double>(n));
        if (init && i == 0)
            pop[i] = *init;
        else if (init && i < n_seeded)
            pop[i] = adaptive_mutation(*init, std::max(cfg.mutation_rate, 0.05), 0, cfg.generations, rng,
                                       cfg.mutation);
        else
            pop[i] = random_chromosome(layout, rng);
    }

    EvolveResult res;
    auto evaluate = [&] {
        parallel_for(n, [&](std::size_t i) {
            if (std::isnan(fitv[i]))
                fitv[i] = fit(pop[i]);
        });
    };
    auto record = [&](std::size_t g) {
        const auto it = std::min_element(fitv.begin(), fitv.end());
        const auto bi = static_cast<std::size_t>(it - fitv.begin());
        GenerationStats st{g, *it, std::accumulate(fitv.begin(), fitv.end(), 0.0) / static_cast<double>(n)};
        if (*it < res.best_fitness || res.history.empty()) {
            res.best_fitness = *it;
            res.best = pop[bi];
        }
        res.history.push_back(st);
        if (opt.keep_populations)
            res.populations.push_back(pop);
        if (opt.on_generation)
            opt.on_generation(st, res.best);
    };

    evaluate();
    record(0);

    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fitv[a] < fitv[b]; });

        std::vector<Chromosome> next;
        std::vector<double> next_fit;
        next.reserve(n);
        for (std::size_t e = 0; e < n_elite; ++e) {
            next.push_back(pop[order[e]]);
            next_fit.push_back(fitv[order[e]]);
        }
        for (std::size_t slot = 0; next.size() < n; ++slot) {
            Rng rng(stream_seed(cfg.seed, g, slot));
            const auto p1 = tournament_select(fitv, cfg.tournament_size, rng);
            const auto p2 = tournament_select(fitv, cfg.tournament_size, rng);
            auto [c1, c2] = scattered_crossover(pop[p1], pop[p2], cfg.crossover_rate, rng);
            next.push_back(adaptive_mutation(std::move(c1), cfg.mutation_rate, g, cfg.generations, rng, cfg.mutation));
            next_fit.push_back(std::numeric_limits<double>::quiet_NaN());
            if (next.size() < n) {
                next.push_back(
                    adaptive_mutation(std::move(c2), cfg.mutation_rate, g, cfg.generations, rng, cfg.mutation));
                next_fit.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        pop = std::move(next);
        fitv = std::move(next_fit);
        evaluate();
        record(g);
    }
    return res;
}

struct TrainResult {
    Controller controller;
    Chromosome best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> history; // concatenated over iterations
};

/// Tunes a controller on the scenarios, optionally warm-started. Each extra
/// iteration restarts the GA from the incumbent with a derived seed.
inline TrainResult train(const GaConfig &cfg, const ControllerCodec &codec, std::span<const EpisodeConfig> scenarios,
                         const std::optional<Controller> &warm_start = std::nullopt,
                         const GenerationCallback &on_generation = {}) {
    cfg.validate();
    if (scenarios.empty())
        throw ConfigError("scenarios", "need at least one training scenario");
    const std::vector<EpisodeConfig> sc(scenarios.begin(), scenarios.end());
    const FitnessFn fit = [&](const Chromosome &ch) { return fitness(ch, codec, sc, cfg.penalties, cfg.aggregation); };

    std::optional<Chromosome> incumbent;
    double incumbent_fit = std::numeric_limits<double>::infinity();
    if (warm_start) {
        incumbent = codec.encode(*warm_start);
        incumbent_fit = fit(*incumbent);
    }

    TrainResult out;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        GaConfig round = cfg;
        round.seed = it == 0 ? cfg.seed : stream_seed(cfg.seed, 0x17e2, it);
        EvolveOptions opt;
        opt.on_generation = on_generation;
        const auto r = evolve(round, codec.blank(), fit, incumbent, opt);
        out.history.insert(out.history.end(), r.history.begin(), r.history.end());
        if (!incumbent || r.best_fitness < incumbent_fit) {
            incumbent = r.best;
            incumbent_fit = r.best_fitness;
        }
    }
    out.best = *incumbent;
    out.best_fitness = incumbent_fit;
    out.controller = codec.decode(out.best);
    return out;
}

} // namespace gfis
