#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lsfts/lrv.hpp"
#include "lsfts/rng.hpp"
#include "test_support.hpp"

using namespace lsfts;

namespace {

// Stationary AR(1) with coefficient 0.5 and unit innovations; long-run variance 4.
Matrix ar1_path(Index n, std::uint64_t seed) {
    RandomStream rng(seed, stream_id(StreamTag::Test, 1));
    Matrix x(n, 1);
    double prev = rng.next_normal() / std::sqrt(1.0 - 0.25);
    for (Index i = 0; i < n; ++i) {
        prev = 0.5 * prev + rng.next_normal();
        x(i, 0) = prev;
    }
    return x;
}

// Literal evaluation of the estimator with nested loops.
double lrv_oracle(const Matrix& x, Index col, int w, double tau, double u) {
    const Index n = x.rows();
    const double lo = static_cast<double>(w) / n;
    u = std::clamp(u, lo, 1.0 - lo);
    double num = 0.0, den = 0.0;
    for (Index j = w; j <= n - w; ++j) {
        double left = 0.0, right = 0.0;
        for (Index i = j - w + 1; i <= j; ++i) left += x(i - 1, col);
        for (Index i = j + 1; i <= j + w; ++i) right += x(i - 1, col);
        const double delta = (left - right) / w;
        const double weight = kernel_h((static_cast<double>(j) / n - u) / tau);
        num += weight * w * delta * delta / 2.0;
        den += weight;
    }
    return num / den;
}

}  // namespace

TEST(LrvDefaults, FollowPowerRules) {
    const LrvParams p800 = default_lrv_params(800);
    EXPECT_EQ(p800.w, 6);
    EXPECT_NEAR(p800.tau, 0.384833, 1e-6);
    const LrvParams p500 = default_lrv_params(500);
    EXPECT_EQ(p500.w, 5);
    EXPECT_NEAR(p500.tau, 0.411560, 1e-6);
    const LrvParams p128 = default_lrv_params(128);
    EXPECT_EQ(p128.w, 4);
    EXPECT_DOUBLE_EQ(p128.tau, 0.5);
    EXPECT_THROW(default_lrv_params(20), ParameterError);
}

TEST(Lrv, ConstantDataGivesZero) {
    const FunctionalSeries s(Matrix::Constant(100, 2, 4.2));
    const LrvEstimator est(s, {4, 0.3});
    for (double u : {0.0, 0.3, 0.5, 1.0}) EXPECT_EQ(est.estimate(u, 1), 0.0);
}

TEST(Lrv, MatchesLoopOracleOnTrendPlusNoise) {
    const Index n = 90;
    Matrix x = fixtures::random_matrix(n, 2, 4);
    for (Index i = 0; i < n; ++i) x(i, 1) += 3.0 * static_cast<double>(i + 1) / n;
    const FunctionalSeries s(x);
    const LrvEstimator est(s, {5, 0.35});
    for (double u : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        for (Index k = 0; k < 2; ++k) EXPECT_NEAR(est.estimate(u, k), lrv_oracle(x, k, 5, 0.35, u), 1e-12);
    }
}

TEST(Lrv, LinearTrendContributesOnlyDeterministicTerm) {
    // For X_i = c i/n, every Delta_j = -c w / n, so sigma^2 = w (c w / n)^2 / 2.
    const Index n = 200;
    const double c = 2.0;
    Matrix x(n, 1);
    for (Index i = 0; i < n; ++i) x(i, 0) = c * static_cast<double>(i + 1) / n;
    const LrvEstimator est(FunctionalSeries(x), {4, 0.3});
    const double expected = 4.0 * std::pow(c * 4.0 / n, 2) / 2.0;
    EXPECT_NEAR(est.estimate(0.5, 0), expected, 1e-15);
}

TEST(Lrv, Ar1MedianNearAnalyticValue) {
    const Index n = 2000;
    std::vector<double> medians;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const FunctionalSeries s(ar1_path(n, 1000 + rep));
        const LrvEstimator est(s, default_lrv_params(n));
        std::vector<double> vals;
        for (double u = 0.1; u <= 0.9 + 1e-12; u += 0.05) vals.push_back(est.estimate(u, 0));
        medians.push_back(median(vals));
    }
    const double med = median(medians);
    EXPECT_GT(med, 4.0 * 0.7);
    EXPECT_LT(med, 4.0 * 1.3);
}

TEST(Lrv, FieldAgreesWithPointEvaluation) {
    const FunctionalSeries s(fixtures::random_matrix(120, 3, 9));
    const LrvEstimator est(s, {4, 0.4});
    const std::vector<double> u{0.1, 0.4, 0.9};
    const std::vector<Index> cols{0, 2};
    const Matrix field = est.field(u, cols);
    for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t c = 0; c < cols.size(); ++c)
            EXPECT_EQ(field(static_cast<Index>(a), static_cast<Index>(c)), est.estimate(u[a], cols[c]));
    const Matrix design = est.design_field();
    EXPECT_EQ(design.rows(), 120);
    EXPECT_EQ(design(59, 1), est.estimate(60.0 / 120.0, 1));
}

TEST(Lrv, ConstantBeyondBoundary) {
    const FunctionalSeries s(fixtures::random_matrix(100, 1, 12));
    const LrvEstimator est(s, {5, 0.3});
    EXPECT_EQ(est.estimate(0.0, 0), est.estimate(0.05, 0));
    EXPECT_EQ(est.estimate(0.01, 0), est.estimate(0.05, 0));
    EXPECT_EQ(est.estimate(1.0, 0), est.estimate(0.95, 0));
}

TEST(Lrv, ScalesQuadratically) {
    const Matrix x = fixtures::random_matrix(100, 2, 13);
    const LrvEstimator a(FunctionalSeries(x), {4, 0.3});
    const LrvEstimator b(FunctionalSeries(3.0 * x), {4, 0.3});
    for (double u : {0.2, 0.6}) EXPECT_NEAR(b.estimate(u, 1), 9.0 * a.estimate(u, 1), 1e-12 * b.estimate(u, 1));
}

TEST(Lrv, WeightsSumToOne) {
    const LrvEstimator est(FunctionalSeries(fixtures::random_matrix(100, 1, 1)), {4, 0.2});
    for (double u : {0.0, 0.3, 1.0}) EXPECT_NEAR(est.weights(u).sum(), 1.0, 1e-14);
}

TEST(Lrv, RejectsBadParameters) {
    const FunctionalSeries s(fixtures::random_matrix(30, 1, 1));
    EXPECT_THROW(LrvEstimator(s, {1, 0.3}), ParameterError);
    EXPECT_THROW(LrvEstimator(s, {11, 0.3}), ParameterError);
    EXPECT_THROW(LrvEstimator(s, {4, 0.0}), ParameterError);
    EXPECT_THROW(LrvEstimator(s, {4, 0.3}).estimate(0.5, 1), ParameterError);
}
