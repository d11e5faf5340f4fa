#include <gtest/gtest.h>

#include <random>

#include "isokit/bmo.hpp"
#include "oracles.hpp"

using namespace isokit;

TEST(Bmo, ConstantIsZero) {
    auto S = build_space("cube", 2, 8);
    GridFunction c(S.size(), 3.0);
    auto balls = metric_ball_family(S);
    EXPECT_EQ(bmo_norm(S, c, balls), 0.0);
    for (double v : sharp_maximal(S, c, balls)) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(john_stromberg_gap(S, c, SubsetMask(S.size(), true)), 0.0);
}

TEST(Bmo, IndicatorHalf) {
    auto S = build_space("interval", 1, 64);
    GridFunction chi(64, 0.0);
    for (int i = 0; i < 32; ++i) chi[i] = 1.0;
    EXPECT_NEAR(bmo_norm(S, chi, interval_family(S)), 0.5, 1e-12);
}

TEST(Bmo, SubintervalOracle) {
    auto S = build_space("interval", 1, 24);
    auto balls = interval_family(S);
    std::mt19937_64 g(12);
    for (int rep = 0; rep < 20; ++rep) {
        auto v = oracle::random_values(g, 24, rep % 2 ? 3 : 0);
        EXPECT_NEAR(bmo_norm(S, v, balls), oracle::bmo_subintervals(v, S.measures), 1e-12);
    }
}

TEST(Bmo, SharpMaximalBounded) {
    auto S = build_space("cube", 2, 10);
    auto balls = metric_ball_family(S);
    std::mt19937_64 g(3);
    auto v = oracle::random_values(g, S.size());
    double b = bmo_norm(S, v, balls);
    double mx = 0.0;
    for (double s : sharp_maximal(S, v, balls)) mx = std::max(mx, s);
    EXPECT_NEAR(mx, b, 1e-12);
}

TEST(Bmo, StaircaseGapExact) {
    // 8 cells, values 8..1, B = middle half (cells 2..5, values 6,5,4,3)
    auto S = build_space("interval", 1, 8);
    GridFunction f{8, 7, 6, 5, 4, 3, 2, 1};
    SubsetMask B(8, false);
    for (int i = 2; i < 6; ++i) B[i] = true;
    auto r = rearrangement_on(S, f, B);
    EXPECT_DOUBLE_EQ(r.total_measure, 0.5);
    double gap = john_stromberg_gap(S, f, B);
    // (f chi_B)**(t) - (f chi_B)*(t) at t = mu(B)/2 = 0.25: avg(6,5) - 4 = 1.5
    EXPECT_NEAR(gap, 1.5, 1e-12);
}

TEST(Bmo, MedianMinimisesUpToThree) {
    auto S = build_space("interval", 1, 32);
    auto balls = interval_family(S);
    std::mt19937_64 g(5);
    for (int rep = 0; rep < 20; ++rep) {
        auto v = oracle::random_values(g, 32);
        for (std::size_t b = 0; b < balls.size(); b += 7) {
            auto mask = balls.mask(b);
            double m = median(S, v, mask);
            double mass = 0, s = 0;
            for (auto i : balls.members[b]) mass += S.measures[i], s += S.measures[i] * v[i];
            double avg = s / mass, lm = 0, la = 0;
            for (auto i : balls.members[b]) {
                lm += S.measures[i] * std::abs(v[i] - m);
                la += S.measures[i] * std::abs(v[i] - avg);
            }
            EXPECT_LE(lm, 3 * la + 1e-12);
        }
    }
}
