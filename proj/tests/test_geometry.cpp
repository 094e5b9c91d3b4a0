#include "oracles.hpp"

#include <gfis/geometry.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace gfis;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

oracle::V3 o(const Vec3 &v) { return {v.x(), v.y(), v.z()}; }

} // namespace

TEST(Grid, PointsOnSphere) {
    const auto g = generate_grid(100, 10.0);
    ASSERT_EQ(g.n_total(), 100u);
    EXPECT_EQ(g.n_inspected(), 0u);
    EXPECT_EQ(inspection_rate(g), 0.0);
    for (const auto &p : g.points)
        EXPECT_NEAR(p.norm(), 10.0, 1e-9 * 10.0);
}

TEST(Grid, QuasiUniformSpacing) {
    const auto g = generate_grid(100, 10.0);
    std::vector<double> nn;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        double best = 1e300;
        for (std::size_t k = 0; k < g.points.size(); ++k)
            if (k != i)
                best = std::min(best, (g.points[i] - g.points[k]).norm());
        nn.push_back(best);
    }
    double mean = 0;
    for (double d : nn)
        mean += d;
    mean /= static_cast<double>(nn.size());
    double var = 0;
    for (double d : nn)
        var += (d - mean) * (d - mean);
    var /= static_cast<double>(nn.size());
    EXPECT_LT(std::sqrt(var) / mean, 0.25);
}

TEST(Grid, Deterministic) {
    EXPECT_EQ(generate_grid(64, 3.0).points, generate_grid(64, 3.0).points);
}

TEST(Grid, RejectsBadArguments) {
    EXPECT_THROW(generate_grid(3, 10.0), ConfigError);
    EXPECT_THROW(generate_grid(100, 0.0), ConfigError);
    EXPECT_THROW(generate_grid(100, -1.0), ConfigError);
}

TEST(Sun, Position) {
    const SunState s0{0.0};
    EXPECT_EQ(sun_position(s0), Vec3(kAstronomicalUnit, 0, 0));
    const Vec3 p = sun_position({std::numbers::pi / 2});
    EXPECT_NEAR(p.x(), 0.0, 1e-16 * kAstronomicalUnit);
    EXPECT_NEAR(p.y(), kAstronomicalUnit, 1e-6);
    EXPECT_EQ(p.z(), 0.0);
}

TEST(Sun, RetrogradeMotion) {
    const SunState s{0.3};
    EXPECT_DOUBLE_EQ(s.advanced(0.0011068, 100.0).theta, 0.3 - 0.0011068 * 100.0);
}

TEST(Illumination, Examples) {
    const Vec3 rs = sun_position({0.0});
    EXPECT_TRUE(is_illuminated({10, 0, 0}, rs));
    EXPECT_FALSE(is_illuminated({-10, 0, 0}, rs));
    EXPECT_FALSE(is_illuminated({0, 10, 0}, rs)); // terminator
}

TEST(Illumination, FractionBelowHalf) {
    const auto g = generate_grid(100, 10.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> th(0, 2 * std::numbers::pi);
    for (int i = 0; i < 50; ++i) {
        const Vec3 rs = sun_position({th(rng)});
        int lit = 0;
        for (const auto &p : g.points)
            lit += is_illuminated(p, rs) ? 1 : 0;
        EXPECT_GE(lit, 40);
        EXPECT_LE(lit, 55);
    }
}

TEST(Fov, Examples) {
    const Vec3 r{50, 0, 0}, b{-1, 0, 0};
    EXPECT_TRUE(in_fov({10, 0, 0}, r, b, 15 * kDeg, 10.0));
    EXPECT_FALSE(in_fov({-10, 0, 0}, r, b, 15 * kDeg, 10.0));
    EXPECT_FALSE(in_fov({10, 30, 0}, r, b, 15 * kDeg, 10.0));
}

TEST(Fov, InsideSphereIsAnError) {
    EXPECT_THROW(in_fov({10, 0, 0}, {5, 0, 0}, {-1, 0, 0}, 0.3, 10.0), GeometryViolation);
    EXPECT_THROW(in_fov({10, 0, 0}, {10, 0, 0}, {-1, 0, 0}, 0.3, 10.0), GeometryViolation);
}

TEST(Fov, RotationInvariant) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0, 1);
    int agree = 0, total = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 r = (20 + 80 * u(rng)) * Vec3(g(rng), g(rng), g(rng)).normalized();
        const Vec3 p = 10.0 * Vec3(g(rng), g(rng), g(rng)).normalized();
        // Boresight near the line of sight so both outcomes occur.
        const Vec3 b = (-r.normalized() + 0.3 * Vec3(g(rng), g(rng), g(rng))).normalized();
        const Mat3 R = Eigen::Quaterniond(Eigen::Vector4d(g(rng), g(rng), g(rng), g(rng)).normalized())
                           .toRotationMatrix();
        const bool a = in_fov(p, r, b, 15 * kDeg, 10.0);
        const bool c = in_fov(R * p, R * r, R * b, 15 * kDeg, 10.0);
        agree += a == c ? 1 : 0;
        ++total;
    }
    // Rotations move values by rounding only; exact boundary hits are measure zero.
    EXPECT_EQ(agree, total);
}

TEST(UpdateInspected, MatchesBruteForceAtReferencePose) {
    auto g = generate_grid(100, 10.0);
    const Vec3 r{50, 0, 0}, b{-1, 0, 0};
    const SensorModel sensor;
    const Vec3 rs = sun_position({0.0});
    std::vector<bool> expect;
    std::size_t count = 0;
    for (const auto &p : g.points) {
        expect.push_back(oracle::visible(o(p), o(r), o(b), sensor.beta, 10.0, o(rs)));
        count += expect.back() ? 1 : 0;
    }
    EXPECT_GT(count, 0u);
    EXPECT_EQ(update_inspected(g, r, b, sensor, rs), count);
    EXPECT_EQ(g.inspected, expect);
}

TEST(UpdateInspected, QuaternionOverloadRotatesBoresight) {
    // Deputy on +y; a 90 degree turn about z points the -x boresight at the chief.
    const Vec3 r{0, 50, 0};
    const Quaternion q = Quaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2);
    const SensorModel sensor;
    const Vec3 rs = sun_position({std::numbers::pi / 2});
    auto g1 = generate_grid(100, 10.0), g2 = g1;
    const Vec3 b_hill = Vec3(0, -1, 0);
    const auto n1 = update_inspected(g1, r, q, sensor, rs);
    const auto n2 = update_inspected(g2, r, b_hill, sensor, rs);
    EXPECT_GT(n1, 0u);
    EXPECT_EQ(n1, n2);
    EXPECT_EQ(g1.inspected, g2.inspected);
}

TEST(UpdateInspected, IdempotentAndMonotone) {
    auto g = generate_grid(100, 10.0);
    const SensorModel sensor;
    const Vec3 rs = sun_position({0.4});
    const Vec3 r{40, 10, 5};
    const Vec3 b = -r.normalized();
    update_inspected(g, r, b, sensor, rs);
    const auto flags = g.inspected;
    EXPECT_EQ(update_inspected(g, r, b, sensor, rs), 0u);
    EXPECT_EQ(g.inspected, flags);
    // A different pose only adds flags.
    update_inspected(g, {-40, 10, 5}, Vec3(40, -10, -5).normalized(), sensor, sun_position({2.0}));
    for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i])
            EXPECT_TRUE(g.inspected[i]);
}

TEST(UpdateInspected, SaturatedGridReturnsZero) {
    auto g = generate_grid(100, 10.0);
    g.inspected.assign(100, true);
    EXPECT_EQ(update_inspected(g, {50, 0, 0}, Vec3(-1, 0, 0), SensorModel{}, sun_position({0.0})), 0u);
    EXPECT_EQ(inspection_rate(g), 100.0);
}

TEST(UpdateInspected, DeputyInsideSphereSeesNothing) {
    auto g = generate_grid(100, 10.0);
    EXPECT_EQ(update_inspected(g, {5, 0, 0}, Vec3(-1, 0, 0), SensorModel{}, sun_position({0.0})), 0u);
}

TEST(InspectionRate, Threshold) {
    auto g = generate_grid(100, 10.0);
    for (int i = 0; i < 95; ++i)
        g.inspected[static_cast<std::size_t>(i)] = true;
    EXPECT_DOUBLE_EQ(inspection_rate(g), 95.0);
    EXPECT_TRUE(inspection_successful(inspection_rate(g), 95.0));
    EXPECT_FALSE(inspection_successful(94.0, 95.0));
}

TEST(Centroid, Examples) {
    InspectionGrid g;
    g.ds = 10;
    g.points = {{10, 0, 0}, {0, 10, 0}, {-10, 0, 0}};
    g.inspected = {false, false, false};
    // Sun in the first quadrant lights the first two points only.
    const Vec3 rs = sun_position({std::numbers::pi / 4});
    const auto c = uninspected_centroid(g, rs);
    ASSERT_TRUE(c.has_value());
    EXPECT_LT((*c - Vec3(5, 5, 0)).norm(), 1e-12);

    g.inspected[1] = true;
    EXPECT_LT((*uninspected_centroid(g, rs) - Vec3(10, 0, 0)).norm(), 1e-12);

    g.inspected[0] = true;
    EXPECT_FALSE(uninspected_centroid(g, rs).has_value());
}

TEST(Sensor, Validation) {
    SensorModel s;
    EXPECT_NO_THROW(s.validate());
    s.boresight = {1, 1, 0};
    EXPECT_THROW(s.validate(), ConfigError);
    s = {};
    s.beta = std::numbers::pi / 2;
    EXPECT_THROW(s.validate(), ConfigError);
}
