#include <gtest/gtest.h>

#include <cmath>

#include "lsfts/bands.hpp"
#include "lsfts/simgen.hpp"
#include "test_support.hpp"

using namespace lsfts;

namespace {

BootstrapConfig small_config() {
    BootstrapConfig cfg;
    cfg.b_n = 0.15;
    cfg.d_n = 0.12;
    cfg.m_n = 6;
    cfg.B = 200;
    cfg.seed = 17;
    return cfg;
}

FunctionalSeries model_a(Index n, Index p, std::uint64_t seed) {
    sim::ModelSpec spec;
    spec.n = n;
    spec.p = p;
    spec.seed = seed;
    return sim::simulate_model(spec);
}

}  // namespace

TEST(BandFixedT, EqualsSurfaceOfSingleColumn) {
    const FunctionalSeries s = model_a(200, 5, 1);
    const BootstrapConfig cfg = small_config();
    const ConfidenceBand band = band_fixed_t(s, 2, cfg, WidthMode::Constant);
    const FunctionalSeries col = s.column(2);
    const ConfidenceSurface surf = surface_constant(col, cfg, EvalGrid::theory(200, 1, cfg.b_n));
    ASSERT_EQ(band.points, surf.grid.u_values);
    EXPECT_EQ(band.center, Vector(surf.center.col(0)));
    EXPECT_EQ(band.lower, Vector(surf.lower.col(0)));
    EXPECT_EQ(band.upper, Vector(surf.upper.col(0)));
    EXPECT_DOUBLE_EQ(band.fixed_value, 3.0 / 5.0);
    EXPECT_EQ(band.axis, FixedAxis::T);
}

TEST(BandFixedT, OneColumnSeriesMatchesSurface) {
    const FunctionalSeries s = model_a(200, 2, 2).column(0);
    const BootstrapConfig cfg = small_config();
    const ConfidenceBand band = band_fixed_t(s, 0, cfg, WidthMode::Varying);
    const ConfidenceSurface surf = surface_varying(s, cfg, default_lrv_params(200), EvalGrid::theory(200, 1, cfg.b_n));
    EXPECT_EQ(band.radius, Vector(surf.radius.col(0)));
}

TEST(BandFixedT, RejectsBadColumn) {
    const FunctionalSeries s = model_a(100, 3, 3);
    EXPECT_THROW(band_fixed_t(s, 3, small_config(), WidthMode::Constant), ParameterError);
}

TEST(LocalWindowIndices, ClipsToSample) {
    const LocalWindow w = local_window(100, 0.5, 0.1);
    EXPECT_EQ(w.first, 40);
    EXPECT_EQ(w.last, 60);
    const LocalWindow edge = local_window(100, 0.05, 0.1);
    EXPECT_EQ(edge.first, 1);
    EXPECT_EQ(edge.last, 15);
    const LocalWindow frac = local_window(100, 0.503, 0.1);
    EXPECT_EQ(frac.first, 41);
    EXPECT_EQ(frac.last, 60);
}

TEST(FixedUBlocks, CountMatchesWindowFormula) {
    const Matrix e = fixtures::random_matrix(100, 3, 5);
    const FixedUBlocks b = fixed_u_blocks(e, 0.5, 0.1, 6, Vector::Ones(3));
    // floor(nu+nb) - ceil(nu-nb) - m' + 2 = 60 - 40 - 6 + 2
    EXPECT_EQ(b.count(), 16);
}

TEST(FixedUBlocks, MatchDirectDefinition) {
    const Index n = 60;
    const Matrix e = fixtures::random_matrix(n, 2, 6);
    const double u = 0.45, b = 0.15;
    const Vector scale = Vector::Constant(2, 2.0);
    const FixedUBlocks blocks = fixed_u_blocks(e, u, b, 4, scale);
    const LocalWindow w = local_window(n, u, b);
    for (Index j = 0; j < blocks.count(); ++j) {
        for (Index s = 0; s < 2; ++s) {
            double first = 0.0, second = 0.0;
            for (Index q = 0; q < 4; ++q) {
                const Index i = w.first + j + q;
                const double z = kernel_k((static_cast<double>(i) / n - u) / b) * e(i - 1, s) / 2.0;
                (q < 2 ? first : second) += z;
            }
            EXPECT_NEAR(blocks.blocks(s, j), (first - second) / 2.0, 1e-14);
        }
    }
}

TEST(FixedUBlocks, WindowTooShortForBlock) {
    const Matrix e = fixtures::random_matrix(100, 1, 7);
    // |I| = 11 at n b = 5
    EXPECT_THROW(fixed_u_blocks(e, 0.5, 0.05, 10, Vector::Ones(1)), ParameterError);
    EXPECT_NO_THROW(fixed_u_blocks(e, 0.5, 0.05, 8, Vector::Ones(1)));
}

TEST(FixedUMaxima, ConditionalVarianceMatchesBlockSquares) {
    const Matrix e = fixtures::random_matrix(80, 2, 8);
    const FixedUBlocks blocks = fixed_u_blocks(e, 0.5, 0.1, 4, Vector::Ones(2));
    const int draws = 20000;
    const Matrix mult = multiplier_matrix(blocks.count(), 0, draws, 21);
    const Matrix t = blocks.blocks * mult;
    for (Index s = 0; s < 2; ++s) {
        const double expected = blocks.blocks.row(s).squaredNorm();
        EXPECT_NEAR(t.row(s).squaredNorm() / draws, expected, 0.05 * expected);
    }
}

TEST(FixedUMaxima, IndependentOfThreadCountAndChunking) {
    const Matrix e = fixtures::random_matrix(120, 4, 9);
    const FixedUBlocks blocks = fixed_u_blocks(e, 0.5, 0.1, 4, Vector::Ones(4));
    const auto one = fixed_u_maxima(blocks, 300, 4, 1);
    EXPECT_EQ(one, fixed_u_maxima(blocks, 300, 4, 8));
    const Matrix mult = multiplier_matrix(blocks.count(), 0, 300, 4);
    const Matrix t = blocks.blocks * mult;
    for (Index r = 0; r < 300; r += 37) EXPECT_NEAR(one[static_cast<std::size_t>(r)], t.col(r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BandFixedU, RadiusFormulaAndShape) {
    const FunctionalSeries s = model_a(300, 6, 10);
    const BootstrapConfig cfg = small_config();
    const ConfidenceBand band = band_fixed_u(s, 0.5, cfg, WidthMode::Constant);
    EXPECT_EQ(band.axis, FixedAxis::U);
    EXPECT_EQ(band.points.size(), 6u);
    const LocalWindow w = local_window(300, 0.5, cfg.b_n);
    const double count = static_cast<double>(w.size() - 6 + 1);
    const double r = std::sqrt(2.0) * band.tuning.quantile_value / (std::sqrt(300 * cfg.b_n) * std::sqrt(count));
    for (Index k = 0; k < 6; ++k) EXPECT_NEAR(band.radius(k), r, 1e-14);
    EvalGrid grid{{0.5}, {0, 1, 2, 3, 4, 5}};
    const Matrix center = nw_estimate(s, cfg.b_n, grid);
    for (Index k = 0; k < 6; ++k) EXPECT_EQ(band.center(k), center(0, k));
}

TEST(BandFixedU, VaryingWidthScalesWithSigmaAtFixedU) {
    const FunctionalSeries s = model_a(300, 6, 11);
    const BootstrapConfig cfg = small_config();
    const ConfidenceBand band = band_fixed_u(s, 0.4, cfg, WidthMode::Varying);
    const LrvEstimator est(s, default_lrv_params(300));
    const double ratio = band.radius(0) / std::sqrt(est.estimate(0.4, 0));
    for (Index k = 1; k < 6; ++k) EXPECT_NEAR(band.radius(k) / std::sqrt(est.estimate(0.4, k)), ratio, 1e-12 * ratio);
}

TEST(BandFixedU, ZeroResidualsAreNumericalError) {
    Matrix x(100, 3);
    for (Index i = 0; i < 100; ++i) x.row(i).setConstant(2.0 - (i + 1) / 100.0);
    EXPECT_THROW(band_fixed_u(FunctionalSeries(x), 0.5, small_config(), WidthMode::Constant), NumericalError);
}

TEST(BandFixedU, RejectsExteriorU) {
    const FunctionalSeries s = model_a(100, 3, 12);
    EXPECT_THROW(band_fixed_u(s, 0.1, small_config(), WidthMode::Constant), ParameterError);
}
