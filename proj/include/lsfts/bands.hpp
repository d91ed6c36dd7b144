#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lsfts/bootstrap.hpp"

namespace lsfts {

/// Fixed-t band along u at column `t_index` (0-based).
///
/// Runs the surface pipeline on the single residual column, so it coincides
/// with the surface of the one-column series. `u_points` defaults to the
/// interior design points.
inline ConfidenceBand band_fixed_t(const FunctionalSeries& series, Index t_index, const BootstrapConfig& cfg,
                                   WidthMode mode, std::optional<LrvParams> lrv = std::nullopt,
                                   std::optional<std::vector<double>> u_points = std::nullopt) {
    if (t_index < 0 || t_index >= series.p()) {
        throw ParameterError("fixed-t column index out of range (1.." + std::to_string(series.p()) + ")");
    }
    const FunctionalSeries column = series.column(t_index);
    EvalGrid grid = EvalGrid::theory(series.n(), 1, cfg.b_n);
    if (u_points) grid.u_values = *u_points;

    ConfidenceSurface surface;
    if (mode == WidthMode::Constant) {
        surface = surface_constant(column, cfg, grid);
    } else {
        surface = surface_varying(column, cfg, lrv.value_or(default_lrv_params(series.n())), grid);
    }

    ConfidenceBand band;
    band.axis = FixedAxis::T;
    band.fixed_value = series.t_value(t_index);
    band.points = grid.u_values;
    band.center = surface.center.col(0);
    band.lower = surface.lower.col(0);
    band.upper = surface.upper.col(0);
    band.radius = surface.radius.col(0);
    band.alpha = cfg.alpha;
    band.width_mode = mode;
    band.tuning = surface.tuning;
    return band;
}

/// Index window I(u) = [ceil(n u - n b_n), floor(n u + n b_n)] (1-based), clipped to [1, n].
struct LocalWindow {
    Index first = 1;
    Index last = 1;

    Index size() const { return last - first + 1; }
};

inline LocalWindow local_window(Index n, double u, double b_n) {
    const double nu = static_cast<double>(n) * u;
    const double nb = static_cast<double>(n) * b_n;
    LocalWindow w{std::max<Index>(1, ceil_snapped(nu - nb)), std::min<Index>(n, floor_snapped(nu + nb))};
    if (w.last < w.first) throw ParameterError("empty local window at u=" + std::to_string(u));
    return w;
}

/// Block sums S_j(u) for a fixed u, stored as p x J.
///
/// Z_i(u) = K((i/n - u)/b_n) e_i / sigma, i in I(u), and
/// S_j = (1/sqrt m') (sum_{r=j}^{j+h-1} - sum_{r=j+h}^{j+m'-1}) Z_r for
/// j = first .. last - m' + 1, i.e. J = |I(u)| - m' + 1 terms. This J
/// equals floor(nu+nb) - ceil(nu-nb) - m' + 2, the count used in the radius.
struct FixedUBlocks {
    LocalWindow window;
    int m_prime = 2;
    Matrix blocks;  // p x J

    Index count() const { return blocks.cols(); }
};

/// `scale` holds one divisor per column (all ones for constant width).
inline FixedUBlocks fixed_u_blocks(const Matrix& residuals, double u, double b_n, int m_n, const Vector& scale) {
    const Index n = residuals.rows();
    const Index p = residuals.cols();
    if (m_n < 2) throw ParameterError("window m_n must be >= 2");
    FixedUBlocks out;
    out.window = local_window(n, u, b_n);
    out.m_prime = 2 * (m_n / 2);
    const Index h = out.m_prime / 2;
    if (out.window.size() < out.m_prime + 2) {
        throw ParameterError("local window |I(u)|=" + std::to_string(out.window.size()) +
                             " too short for m'=" + std::to_string(out.m_prime) + " (need m'+2)");
    }
    const Index len = out.window.size();
    Matrix z(p, len);
    for (Index r = 0; r < len; ++r) {
        const Index i = out.window.first + r;  // 1-based
        const double kw = kernel_k((static_cast<double>(i) / static_cast<double>(n) - u) / b_n);
        for (Index s = 0; s < p; ++s) z(s, r) = kw * residuals(i - 1, s) / scale(s);
    }
    const Index count = len - out.m_prime + 1;
    const double inv = 1.0 / std::sqrt(static_cast<double>(out.m_prime));
    out.blocks.resize(p, count);
    for (Index j = 0; j < count; ++j) {
        for (Index s = 0; s < p; ++s) {
            double first = 0.0, second = 0.0;
            for (Index q = 0; q < h; ++q) first += z(s, j + q);
            for (Index q = h; q < out.m_prime; ++q) second += z(s, j + q);
            out.blocks(s, j) = inv * (first - second);
        }
    }
    return out;
}

/// B maxima |sum_j S_j R_j|_inf with an independent multiplier per j (no shifting).
inline std::vector<double> fixed_u_maxima(const FixedUBlocks& blocks, int B, std::uint64_t seed,
                                          unsigned threads = 1) {
    constexpr Index kChunk = 64;
    const Index chunks = (B + kChunk - 1) / kChunk;
    std::vector<double> out(static_cast<std::size_t>(B));
    parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
        const Index first = static_cast<Index>(c) * kChunk;
        const Index count = std::min<Index>(kChunk, B - first);
        const Matrix mult = multiplier_matrix(blocks.count(), first, count, seed);
        const Matrix t = blocks.blocks * mult;
        for (Index r = 0; r < count; ++r) out[static_cast<std::size_t>(first + r)] = t.col(r).cwiseAbs().maxCoeff();
    });
    return out;
}

/// Fixed-u band along t at rescaled time u_star.
///
/// Varying width normalises by sigma(u_star, t_k) (the fixed first argument)
/// and scales the radius by the same values.
inline ConfidenceBand band_fixed_u(const FunctionalSeries& series, double u_star, const BootstrapConfig& cfg,
                                   WidthMode mode, std::optional<LrvParams> lrv = std::nullopt) {
    const Index n = series.n();
    const Index p = series.p();
    interior_interval(n, cfg.b_n);
    if (!(cfg.d_n > 0.0) || !(cfg.d_n < 0.5)) throw ParameterError("residual bandwidth d_n must lie in (0, 1/2)");
    if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
    if (cfg.B < 10) throw ParameterError("B must be >= 10");
    if (!in_interior(u_star, cfg.b_n)) throw ParameterError("fixed u must lie in [b_n, 1-b_n]");

    const LocalLinearFit fit = local_linear_fit(series, cfg.d_n);
    require_nondegenerate_residuals(series, fit.residuals);
    Vector sigma = Vector::Ones(p);
    double floor = 0.0;
    Index floor_hits = 0;
    TuningRecord tuning = cfg.record();
    if (mode == WidthMode::Varying) {
        const LrvParams params = lrv.value_or(default_lrv_params(n));
        const LrvEstimator estimator(series, params);
        for (Index k = 0; k < p; ++k) sigma(k) = std::sqrt(std::max(0.0, estimator.estimate(u_star, k)));
        const double med = median(std::span<const double>(sigma.data(), static_cast<std::size_t>(p)));
        if (!(med > 0.0)) throw NumericalError("long-run variance estimate is identically zero at fixed u");
        floor = kSigmaFloorRatio * med;
        for (Index k = 0; k < p; ++k) {
            if (sigma(k) < floor) {
                sigma(k) = floor;
                ++floor_hits;
            }
        }
        tuning.lrv_w = params.w;
        tuning.lrv_tau = params.tau;
    }
    const FixedUBlocks blocks = fixed_u_blocks(fit.residuals, u_star, cfg.b_n, cfg.m_n, sigma);
    const BootstrapDraws draws(fixed_u_maxima(blocks, cfg.B, cfg.seed, cfg.threads), cfg.alpha);
    tuning.quantile_value = draws.quantile();
    tuning.quantile_index = draws.index;
    tuning.sigma_floor_hits = floor_hits;
    if (!(draws.quantile() > 0.0)) {
        throw NumericalError("bootstrap quantile is zero (residuals vanish); the band would have zero width");
    }
    const double scale = draws.quantile() * radius_scale(n, cfg.b_n, blocks.count());

    EvalGrid grid;
    grid.u_values = {u_star};
    for (Index k = 0; k < p; ++k) grid.t_columns.push_back(k);
    const Matrix center = nw_estimate(series, cfg.b_n, grid);

    ConfidenceBand band;
    band.axis = FixedAxis::U;
    band.fixed_value = u_star;
    band.points = series.t_values();
    band.center = center.row(0).transpose();
    band.radius = sigma * scale;
    band.lower = band.center - band.radius;
    band.upper = band.center + band.radius;
    band.alpha = cfg.alpha;
    band.width_mode = mode;
    band.tuning = tuning;
    return band;
}

}  // namespace lsfts
