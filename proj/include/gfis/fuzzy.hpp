#pragma once

// Data-driven Mamdani fuzzy inference with Gaussian membership functions.
//
// Operators: product t-norm for rule firing, max aggregation per output term,
// consequents clipped at their firing level, centroid over a uniform
// 201-point discretization of the output range.

#include <gfis/types.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace gfis {

inline constexpr std::size_t kMfCount = 5;
inline constexpr std::size_t kDefuzzPoints = 201;

struct GaussianMF {
    double mean = 0.0;
    double sigma = 1.0;

    bool operator==(const GaussianMF &) const = default;
};

inline double membership(const GaussianMF &mf, double x) {
    const double d = (x - mf.mean) / mf.sigma;
    return std::exp(-0.5 * d * d);
}

/// One linguistic variable: range plus five terms ordered NB, NS, ZE, PS, PB.
struct VariableSpec {
    std::string name;
    double lo = -1.0;
    double hi = 1.0;
    std::array<GaussianMF, kMfCount> mfs{};

    double width() const { return hi - lo; }

    void validate() const {
        const std::string key = name.empty() ? std::string("variable") : name;
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw ConfigError(key, "range must satisfy lo < hi");
        for (std::size_t i = 0; i < kMfCount; ++i) {
            const auto &mf = mfs[i];
            if (!(mf.sigma > 0.0) || !std::isfinite(mf.sigma))
                throw ConfigError(key, "membership sigma must be positive");
            if (!(mf.mean >= lo && mf.mean <= hi))
                throw ConfigError(key, "membership mean outside range");
            if (i > 0 && mfs[i - 1].mean > mf.mean)
                throw ConfigError(key, "membership means must be non-decreasing");
        }
    }

    bool operator==(const VariableSpec &) const = default;

    /// Evenly spaced means from lo to hi with a shared sigma.
    static VariableSpec uniform(std::string name, double lo, double hi, double sigma_fraction = 0.125) {
        VariableSpec v;
        v.name = std::move(name);
        v.lo = lo;
        v.hi = hi;
        const double step = (hi - lo) / static_cast<double>(kMfCount - 1);
        for (std::size_t i = 0; i < kMfCount; ++i)
            v.mfs[i] = {lo + step * static_cast<double>(i), sigma_fraction * (hi - lo)};
        return v;
    }
};

/// Dense rule matrix. Entry at (i0, i1, ...) is the output term index, with the
/// first input varying slowest.
struct RuleTable {
    std::vector<std::size_t> dims;
    std::vector<int> entries;

    std::size_t size() const {
        std::size_t n = dims.empty() ? 0 : 1;
        for (auto d : dims)
            n *= d;
        return n;
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        std::size_t k = 0;
        for (std::size_t a = 0; a < dims.size(); ++a)
            k = k * dims[a] + idx[a];
        return k;
    }

    int at(std::span<const std::size_t> idx) const { return entries[flat_index(idx)]; }

    void validate() const {
        if (entries.size() != size())
            throw ConfigError("rules", "rule table length does not match input dimensions");
        for (int e : entries)
            if (e < 0 || e >= static_cast<int>(kMfCount))
                throw ConfigError("rules", "rule entry outside 0..4");
    }

    static RuleTable filled(std::size_t n_inputs, int value) {
        RuleTable t;
        t.dims.assign(n_inputs, kMfCount);
        t.entries.assign(t.size(), value);
        return t;
    }

    bool operator==(const RuleTable &) const = default;
};

struct FisParams {
    std::vector<VariableSpec> inputs;
    VariableSpec output;
    RuleTable rules;

    void validate() const {
        if (inputs.size() < 2 || inputs.size() > 3)
            throw ConfigError("inputs", "a controller FIS takes two or three inputs");
        for (const auto &in : inputs)
            in.validate();
        output.validate();
        if (rules.dims.size() != inputs.size())
            throw ConfigError("rules", "rule table rank does not match input count");
        for (auto d : rules.dims)
            if (d != kMfCount)
                throw ConfigError("rules", "each rule axis must have five terms");
        rules.validate();
    }

    bool operator==(const FisParams &) const = default;
};

/// Membership degrees of the clamped input against all five terms.
inline std::array<double, kMfCount> fuzzify(const VariableSpec &spec, double x) {
    const double xc = std::clamp(x, spec.lo, spec.hi);
    std::array<double, kMfCount> deg{};
    for (std::size_t i = 0; i < kMfCount; ++i)
        deg[i] = membership(spec.mfs[i], xc);
    return deg;
}

/// Inference engine bound to one FisParams. Output term shapes are sampled once
/// on the defuzzification grid; evaluation is then allocation-free.
class FisEvaluator {
public:
    explicit FisEvaluator(const FisParams &fis) : fis_(fis) {
        fis_.validate();
        const auto &out = fis_.output;
        // Grid mirrored about the range centre so symmetric rule bases give exact zeros.
        const double centre = 0.5 * (out.lo + out.hi);
        const double half = 0.5 * out.width();
        constexpr double mid = static_cast<double>(kDefuzzPoints / 2);
        for (std::size_t j = 0; j < kDefuzzPoints; ++j) {
            y_[j] = centre + half * ((static_cast<double>(j) - mid) / mid);
            for (std::size_t k = 0; k < kMfCount; ++k)
                shape_[k][j] = membership(out.mfs[k], y_[j]);
        }
    }

    const FisParams &params() const { return fis_; }

    /// Firing level of each output term (max over the rules that select it).
    std::array<double, kMfCount> output_levels(std::span<const double> x) const {
        const std::size_t n_in = fis_.inputs.size();
        if (x.size() != n_in)
            throw ConfigError("inputs", "input vector length does not match FIS");

        std::array<std::array<double, kMfCount>, 3> deg{};
        for (std::size_t a = 0; a < n_in; ++a)
            deg[a] = fuzzify(fis_.inputs[a], x[a]);

        std::array<double, kMfCount> level{};
        const auto &rules = fis_.rules.entries;
        std::size_t r = 0;
        if (n_in == 3) {
            for (std::size_t i = 0; i < kMfCount; ++i)
                for (std::size_t j = 0; j < kMfCount; ++j) {
                    const double dij = deg[0][i] * deg[1][j];
                    for (std::size_t k = 0; k < kMfCount; ++k, ++r) {
                        const double s = dij * deg[2][k];
                        auto &l = level[static_cast<std::size_t>(rules[r])];
                        l = std::max(l, s);
                    }
                }
        } else {
            for (std::size_t i = 0; i < kMfCount; ++i)
                for (std::size_t j = 0; j < kMfCount; ++j, ++r) {
                    const double s = deg[0][i] * deg[1][j];
                    auto &l = level[static_cast<std::size_t>(rules[r])];
                    l = std::max(l, s);
                }
        }
        return level;
    }

    /// Crisp output in [output.lo, output.hi].
    double operator()(std::span<const double> x) const {
        const auto level = output_levels(x);
        std::array<double, kDefuzzPoints> agg{};
        for (std::size_t k = 0; k < kMfCount; ++k) {
            const double lk = level[k];
            if (lk <= 0.0)
                continue;
            const auto &shape = shape_[k];
            for (std::size_t j = 0; j < kDefuzzPoints; ++j) {
                const double clipped = shape[j] < lk ? shape[j] : lk;
                agg[j] = agg[j] < clipped ? clipped : agg[j];
            }
        }
        constexpr std::size_t last = kDefuzzPoints - 1;
        // Trapezoidal weights, summed in mirrored pairs so symmetric shapes cancel exactly.
        double num = agg[last / 2] * y_[last / 2], den = agg[last / 2];
        for (std::size_t j = 0; j < last / 2; ++j) {
            const double wt = j == 0 ? 0.5 : 1.0;
            num += wt * (agg[j] * y_[j] + agg[last - j] * y_[last - j]);
            den += wt * (agg[j] + agg[last - j]);
        }
        if (!(den > 0.0))
            return 0.5 * (fis_.output.lo + fis_.output.hi);
        return std::clamp(num / den, fis_.output.lo, fis_.output.hi);
    }

private:
    FisParams fis_;
    std::array<double, kDefuzzPoints> y_{};
    std::array<std::array<double, kDefuzzPoints>, kMfCount> shape_{};
};

inline double infer_and_defuzzify(const FisParams &fis, std::span<const double> x) {
    return FisEvaluator(fis)(x);
}

} // namespace gfis
