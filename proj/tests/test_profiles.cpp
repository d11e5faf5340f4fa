#include <gtest/gtest.h>

#include <cmath>

#include "isokit/domain.hpp"
#include "isokit/profiles.hpp"

using namespace isokit;

TEST(Profiles, Lipschitz) {
    auto I1 = lipschitz_profile(1);
    for (double t : {0.01, 0.5, 0.9}) EXPECT_DOUBLE_EQ(I1(t), 1.0);
    auto I2 = lipschitz_profile(2);
    EXPECT_NEAR(I2(0.125), 0.353553, 1e-6);
    EXPECT_NEAR(I2(0.875), I2(0.125), 1e-15);
    EXPECT_TRUE(I2.symmetric && I2.concave && I2.vanishing_at_zero);
    EXPECT_THROW(lipschitz_profile(0), std::invalid_argument);
}

TEST(Profiles, Mazya) {
    EXPECT_NEAR(mazya_estimator(0.75)(0.0625), 0.125, 1e-12);
    EXPECT_DOUBLE_EQ(mazya_estimator(0.0, 1.0, 2.0)(0.3), 2.0);
    EXPECT_THROW(mazya_estimator(1.0), std::invalid_argument);
}

TEST(Profiles, Ahlfors) {
    EXPECT_NEAR(ahlfors_estimator(2)(0.25), 0.5, 1e-12);
    auto big = ahlfors_estimator(1e6, 1.0, 2.0);
    for (double t : {0.1, 0.3, 0.8}) EXPECT_NEAR(big(t), std::min(t, 1 - t) / 2.0, 1e-4);
    EXPECT_THROW(ahlfors_estimator(1.0), std::invalid_argument);
}

TEST(Profiles, GaussianType) {
    auto G = gaussian_type_profile(2);
    double t = std::exp(-4.0);
    EXPECT_NEAR(G(t), 2 * t, 1e-12);
    EXPECT_NEAR(2 * t, 0.036631, 1e-6);
    auto E = gaussian_type_profile(1);
    for (double s : {0.05, 0.4, 0.7}) EXPECT_NEAR(E(s), std::min(s, 1 - s), 1e-15);
    EXPECT_THROW(gaussian_type_profile(2.5), std::invalid_argument);
    EXPECT_THROW(gaussian_type_profile(2, 1), std::invalid_argument);
}

TEST(Profiles, Relative) {
    auto I = lipschitz_profile(2);
    auto R = relative_estimator(I, 0.5);
    EXPECT_NEAR(R(0.4), 0.316228, 1e-6);
    auto F = relative_estimator(I, 1.0, 3.0);
    for (double s : {0.1, 0.6}) EXPECT_NEAR(F(s), 3 * I(s), 1e-15);
    EXPECT_THROW(relative_estimator(I, 1.5), std::invalid_argument);
}

TEST(Profiles, ConcavityOfAnalytic) {
    for (const auto& P : {lipschitz_profile(3), mazya_estimator(0.4), ahlfors_estimator(2.5),
                          gaussian_type_profile(1.5, 0.5)}) {
        for (int i = 1; i < 99; ++i) {
            double a = (i - 0.5) / 100, b = (i + 0.5) / 100, m = i / 100.0;
            EXPECT_GE(P(m) + 1e-12, 0.5 * (P(a) + P(b))) << P.kind << " at " << m;
        }
    }
}

TEST(Profiles, EmpiricalInterval) {
    auto S = build_space("interval", 1, 256);
    std::vector<SubsetMask> cands;
    for (int k = 1; k < 256; ++k) {
        SubsetMask A(256, false);
        for (int i = 0; i < k; ++i) A[i] = true;
        cands.push_back(A);
    }
    auto E = empirical_profile(S, cands, 32);
    for (int b = 1; b < 31; ++b) EXPECT_NEAR(E((b + 0.5) / 32), 1.0, 2.0 / 256);
}

TEST(Profiles, EmpiricalSquareSlices) {
    auto S = build_space("cube", 2, 64);
    SubsetMask A(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) A[i] = S.points[i][0] < 0.5;
    auto E = empirical_profile(S, {A}, 32);
    EXPECT_LE(E(0.5), 1.05);
    EXPECT_TRUE(std::isinf(E(0.1)));
}

TEST(Profiles, JsonSamples) {
    auto j = to_json(lipschitz_profile(2), 8);
    EXPECT_EQ(j["kind"], "lipschitz");
    EXPECT_EQ(j["samples"].size(), 8u);
}
