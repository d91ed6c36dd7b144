#include <gtest/gtest.h>

#include <cmath>

#include "lsfts/simgen.hpp"
#include "lsfts/smoothing.hpp"
#include "test_support.hpp"

using namespace lsfts;

namespace {

// Composite Simpson rule on [-1, 1] with 10000 intervals.
template <class F>
double integrate(F f, int intervals = 10000) {
    const double h = 2.0 / intervals;
    double acc = f(-1.0) + f(1.0);
    for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(-1.0 + i * h);
    return acc * h / 3.0;
}

EvalGrid interior_grid(Index n, Index p, double b) { return EvalGrid::theory(n, p, b); }

}  // namespace

TEST(Kernels, PointValues) {
    EXPECT_DOUBLE_EQ(kernel_k(0.0), 1.40625);
    EXPECT_DOUBLE_EQ(kernel_k(1.0), 0.0);
    EXPECT_DOUBLE_EQ(kernel_k(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(kernel_k(0.5), 0.439453125);
    EXPECT_DOUBLE_EQ(kernel_k(1.5), 0.0);
    EXPECT_DOUBLE_EQ(kernel_h(0.0), 0.75);
    EXPECT_DOUBLE_EQ(kernel_h(0.5), 0.5625);
    EXPECT_DOUBLE_EQ(kernel_h(-1.0), 0.0);
}

TEST(Kernels, QuadratureMoments) {
    EXPECT_LT(std::abs(integrate(kernel_k) - 1.0), 1e-10);
    EXPECT_LT(std::abs(integrate([](double x) { return x * x * kernel_k(x); })), 1e-10);
    EXPECT_LT(std::abs(integrate(kernel_h) - 1.0), 1e-10);
    EXPECT_LT(std::abs(integrate([](double x) { return x * kernel_k(x); })), 1e-12);
}

TEST(NwEstimate, ZeroInputGivesZero) {
    const FunctionalSeries s(Matrix::Zero(100, 3));
    const Matrix est = nw_estimate(s, 0.1, interior_grid(100, 3, 0.1));
    EXPECT_TRUE(est.isZero(0.0));
}

TEST(NwEstimate, ConstantInputMatchesWeightSum) {
    const Index n = 200;
    const double b = 0.1;
    const FunctionalSeries s(Matrix::Constant(n, 2, 3.0));
    const EvalGrid grid = interior_grid(n, 2, b);
    const Matrix est = nw_estimate(s, b, grid);
    for (std::size_t a = 0; a < grid.u_size(); ++a) {
        const double u = grid.u_values[a];
        double oracle = 0.0;
        for (Index i = 1; i <= n; ++i) oracle += kernel_k((static_cast<double>(i) / n - u) / b);
        oracle *= 3.0 / (n * b);
        EXPECT_NEAR(est(static_cast<Index>(a), 0), oracle, 1e-12);
        // the Riemann sum approximates the kernel integral
        EXPECT_NEAR(est(static_cast<Index>(a), 1), 3.0, 1e-2);
    }
}

TEST(NwEstimate, MatchesBruteForceOnNoiselessMean) {
    sim::ModelSpec spec;
    spec.model = sim::Model::A;
    spec.n = 120;
    spec.p = 5;
    spec.zero_noise = true;
    const FunctionalSeries s = sim::simulate_model(spec);
    const double b = 0.15;
    const EvalGrid grid = interior_grid(s.n(), s.p(), b);
    const Matrix est = nw_estimate(s, b, grid);
    for (std::size_t a = 0; a < grid.u_size(); ++a) {
        for (Index k = 0; k < s.p(); ++k) {
            double brute = 0.0;
            for (Index i = 0; i < s.n(); ++i) {
                brute += s.values()(i, k) * kernel_k((s.design_point(i) - grid.u_values[a]) / b);
            }
            brute /= s.n() * b;
            EXPECT_NEAR(est(static_cast<Index>(a), k), brute, 1e-12);
        }
    }
}

TEST(NwEstimate, IsLinearInData) {
    const Matrix x = fixtures::random_matrix(150, 3, 5);
    const Matrix y = fixtures::random_matrix(150, 3, 6);
    const double b = 0.12;
    const EvalGrid grid = interior_grid(150, 3, b);
    const Matrix lhs = nw_estimate(FunctionalSeries(2.5 * x - y), b, grid);
    const Matrix rhs = 2.5 * nw_estimate(FunctionalSeries(x), b, grid) - nw_estimate(FunctionalSeries(y), b, grid);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NwEstimate, IgnoresRowsOutsideBandwidth) {
    const Index n = 100;
    const double b = 0.1;
    Matrix x = Matrix::Zero(n, 1);
    x(0, 0) = 1e6;  // u = 0.01, outside every window around u >= 0.2
    EvalGrid grid{{0.2, 0.5}, {0}};
    const Matrix est = nw_estimate(FunctionalSeries(x), b, grid);
    EXPECT_EQ(est(0, 0), 0.0);
    EXPECT_EQ(est(1, 0), 0.0);
}

TEST(NwEstimate, RejectsExteriorPointsAndTinyWindows) {
    const FunctionalSeries s(Matrix::Zero(100, 1));
    EXPECT_THROW(nw_estimate(s, 0.1, EvalGrid{{0.05}, {0}}), ParameterError);
    EXPECT_THROW(nw_estimate(s, 0.01, EvalGrid{{0.5}, {0}}), ParameterError);
}

TEST(LocalLinear, ReproducesAffineTrendExactly) {
    const Index n = 300;
    Matrix x(n, 3);
    for (Index i = 0; i < n; ++i) {
        const double u = static_cast<double>(i + 1) / n;
        x(i, 0) = 2.0 + 3.0 * u;
        x(i, 1) = -1.0 + 0.5 * u;
        x(i, 2) = 7.0;
    }
    for (double d : {0.02, 0.1, 0.3}) {
        const LocalLinearFit fit = local_linear_fit(FunctionalSeries(x), d);
        EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-10) << "d=" << d;
    }
}

TEST(LocalLinear, MatchesWeightedLeastSquaresOracle) {
    const Index n = 50;
    const double d = 0.2;
    const Matrix x = fixtures::random_matrix(n, 2, 17);
    const LocalLinearFit fit = local_linear_fit(FunctionalSeries(x), d);
    for (Index i = 0; i < n; ++i) {
        const double u = static_cast<double>(i + 1) / n;
        Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();
        Eigen::Matrix<double, 2, Eigen::Dynamic> rhs = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, 2);
        for (Index j = 0; j < n; ++j) {
            const double z = static_cast<double>(j + 1) / n - u;
            const double w = kernel_h(z / d);
            const Eigen::Vector2d v(1.0, z);
            gram += w * v * v.transpose();
            rhs += w * v * x.row(j);
        }
        const Eigen::Matrix<double, 2, Eigen::Dynamic> beta = gram.ldlt().solve(rhs);
        for (Index k = 0; k < 2; ++k) EXPECT_NEAR(fit.fitted(i, k), beta(0, k), 1e-9);
    }
}

TEST(LocalLinear, AddingAffineTrendShiftsFitByTrend) {
    const Index n = 120;
    const Matrix x = fixtures::random_matrix(n, 2, 21);
    Matrix y = x;
    for (Index i = 0; i < n; ++i) y.row(i).array() += 1.0 - 4.0 * static_cast<double>(i + 1) / n;
    const LocalLinearFit fx = local_linear_fit(FunctionalSeries(x), 0.15);
    const LocalLinearFit fy = local_linear_fit(FunctionalSeries(y), 0.15);
    EXPECT_LT((fx.residuals - fy.residuals).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LocalLinear, TooSmallBandwidthIsNumericalError) {
    const FunctionalSeries s(fixtures::random_matrix(100, 1, 2));
    EXPECT_THROW(local_linear_fit(s, 0.005), NumericalError);
}

TEST(LocalLinear, HatRowsSumToOne) {
    const LocalLinearSmoother sm(80, 0.1);
    for (Index i = 0; i < 80; ++i) {
        double total = 0.0;
        for (Index j = 0; j < 80; ++j) total += sm.hat(i, j);
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}
