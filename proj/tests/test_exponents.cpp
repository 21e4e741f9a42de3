#include <gtest/gtest.h>

#include <cmath>

#include "lqglab/exponents.hpp"

using namespace lqglab;

TEST(Charges, KnownValues) {
    EXPECT_NEAR(charges_from_gamma(std::sqrt(8.0 / 3)).c_M, 0.0, 1e-12);
    auto c2 = charges_from_gamma(2.0);
    EXPECT_NEAR(c2.c_M, 1.0, 1e-12);
    EXPECT_NEAR(c2.c_L, 25.0, 1e-12);
    EXPECT_NEAR(charges_from_gamma(std::sqrt(3.0)).c_M, 0.5, 1e-12);
    EXPECT_NEAR(gamma_from_cM(0.0), std::sqrt(8.0 / 3), 1e-12);
    EXPECT_NEAR(gamma_from_cM(1.0), 2.0, 1e-12);
    EXPECT_NEAR(gamma_from_cM(-2.0), std::sqrt(2.0), 1e-12);
    EXPECT_THROW(charges_from_gamma(0.0), ExponentError);
    EXPECT_THROW(charges_from_gamma(2.1), ExponentError);
    EXPECT_THROW(gamma_from_cM(1.5), ExponentError);
}

TEST(Charges, IdentitiesOnGrid) {
    for (int k = 1; k <= 1000; ++k) {
        double g = 2.0 * k / 1000;
        auto c = charges_from_gamma(g);
        EXPECT_NEAR(c.c_L, 1 + 6 * c.Q * c.Q, 1e-12 * c.c_L);
        EXPECT_NEAR(c.c_M + c.c_L, 26.0, 1e-12 * c.c_L);
        EXPECT_NEAR(c.Q, 2 / g + g / 2, 1e-12 * c.Q);
        EXPECT_NEAR(c.kappa_small * c.kappa_large, 16.0, 1e-12);
        EXPECT_NEAR(gamma_from_cM(c.c_M), g, 1e-10);
    }
}

TEST(Mating, Correlation) {
    EXPECT_NEAR(mot_correlation(6.0), 0.5, 1e-15);
    EXPECT_NEAR(mot_correlation(8.0), 0.0, 1e-15);
    EXPECT_NEAR(mot_correlation(16.0 / 3), std::sqrt(2.0) / 2, 1e-15);
    EXPECT_THROW(mot_correlation(4.0), ExponentError);
}

TEST(Weight, Formula) {
    EXPECT_EQ(conformal_weight(0.0, 1.0), 0.0);
    EXPECT_NEAR(conformal_weight(1.0, 1.0), 1.0, 1e-15);
    const double Q = charges_from_gamma(1.3).Q, h = 1e-5;
    EXPECT_NEAR(conformal_weight(Q, 1.3), Q * Q / 4, 1e-14);
    EXPECT_NEAR((conformal_weight(Q + h, 1.3) - conformal_weight(Q - h, 1.3)) / (2 * h), 0.0, 1e-9);
}

TEST(Backbone, RootAndScan) {
    EXPECT_NEAR(backbone_function(0.25), 0.0, 1e-15);
    EXPECT_GT(backbone_function(2.0 / 3), 0.0);
    auto r = backbone_exponent(1e-12);
    EXPECT_GT(r.root, 0.25);
    EXPECT_LT(r.root, 2.0 / 3);
    EXPECT_LT(r.residual, 1e-12);
    EXPECT_LT(r.bracket, 1e-12);
    EXPECT_EQ(r.sign_changes, 1);
    EXPECT_NEAR(backbone_exponent(1e-8).root, r.root, 1e-8);
}

TEST(Fit, LogLogExact) {
    std::vector<double> x{1, 2, 4, 8}, y;
    for (double v : x) y.push_back(3 * std::pow(v, -0.7));
    auto f = loglog_fit(x, y);
    EXPECT_NEAR(f.slope, -0.7, 1e-12);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
    EXPECT_THROW(loglog_fit({1}, {1}), ExponentError);
}

TEST(Arms, AllOpenHasZeroSlope) {
    auto e = arm_exponent_mc(ArmType::one_arm_blue, 2, dyadic_radii(8, 32), 40, 1, 1, 1.0);
    for (auto& a : e.annuli) EXPECT_EQ(a.p_hat, 1.0);
    EXPECT_NEAR(e.exponent, 0.0, 1e-12);
    EXPECT_GT(e.stderr_, 0.0);
}

TEST(Arms, SubcriticalDecaysFast) {
    auto e = arm_exponent_mc(ArmType::one_arm_blue, 2, dyadic_radii(8, 64), 2000, 3, 0, 0.4);
    EXPECT_GT(e.exponent, 0.5);
}

TEST(Arms, ThreadCountInvariant) {
    auto a = arm_exponent_mc(ArmType::two_arm_bichromatic, 2, dyadic_radii(8, 32), 200, 9, 1);
    auto b = arm_exponent_mc(ArmType::two_arm_bichromatic, 2, dyadic_radii(8, 32), 200, 9, 3);
    EXPECT_EQ(a.exponent, b.exponent);
    EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Arms, Errors) {
    EXPECT_THROW(arm_exponent_mc(ArmType::one_arm_blue, 2, {8}, 100, 1), ExponentError);
    EXPECT_THROW(arm_exponent_mc(ArmType::one_arm_blue, 2, {16, 8}, 100, 1), ExponentError);
}
