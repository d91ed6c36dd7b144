#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lsfts/bands.hpp"
#include "lsfts/bootstrap.hpp"
#include "lsfts/lrv.hpp"
#include "lsfts/smoothing.hpp"

namespace lsfts {

/// Candidate residual bandwidths, strictly increasing in (0, 1/2).
struct BandwidthGrid {
    std::vector<double> candidates;

    /// 12 log-spaced values in [max(4/n, n^-0.45), 0.35].
    static BandwidthGrid default_for(Index n) {
        const double nd = static_cast<double>(n);
        const double lo = std::max(4.0 / nd, std::pow(nd, -0.45));
        const double hi = 0.35;
        BandwidthGrid g;
        constexpr int count = 12;
        for (int i = 0; i < count; ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(count - 1);
            g.candidates.push_back(std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo))));
        }
        return g;
    }

    void validate() const {
        if (candidates.empty()) throw ParameterError("bandwidth grid is empty");
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!(candidates[i] > 0.0) || !(candidates[i] < 0.5)) throw ParameterError("bandwidth candidates must lie in (0, 1/2)");
            if (i > 0 && !(candidates[i] > candidates[i - 1])) throw ParameterError("bandwidth candidates must increase");
        }
    }
};

struct MgcvPoint {
    double bandwidth = 0.0;
    double score = std::numeric_limits<double>::quiet_NaN();
    double trace = std::numeric_limits<double>::quiet_NaN();
    bool skipped = false;
    std::string reason;
};

struct MgcvResult {
    double selected = 0.0;
    std::vector<MgcvPoint> curve;
};

namespace detail {

// Scores closer than this (relative to the data's sum of squares) count as
// ties; exact fits give RSS at rounding level for every candidate.
inline constexpr double kMgcvTieTolerance = 1e-20;

inline MgcvResult pick_mgcv(std::vector<MgcvPoint> curve, double data_scale) {
    MgcvResult out;
    const double tol = kMgcvTieTolerance * data_scale;
    bool found = false;
    double best = 0.0;
    for (const auto& pt : curve) {
        if (pt.skipped) continue;
        if (!found || pt.score < best - tol) {
            best = pt.score;
            out.selected = pt.bandwidth;
            found = true;
        }
    }
    if (!found) throw NumericalError("MGCV: every bandwidth candidate was skipped");
    out.curve = std::move(curve);
    return out;
}

inline MgcvPoint mgcv_point(const Matrix& x, double b, Index first, Index last, double trace_norm) {
    MgcvPoint pt;
    pt.bandwidth = b;
    try {
        const LocalLinearSmoother smoother(x.rows(), b, first, last);
        pt.trace = smoother.trace();
        const double denom = 1.0 - pt.trace / trace_norm;
        if (!(pt.trace < trace_norm)) {
            pt.skipped = true;
            pt.reason = "trace >= normaliser";
            return pt;
        }
        const Matrix resid = smoother.fit(x) - x.middleRows(first, last - first + 1);
        const double worst = resid.colwise().squaredNorm().maxCoeff();
        pt.score = worst / (denom * denom);
    } catch (const NumericalError& e) {
        pt.skipped = true;
        pt.reason = e.what();
    }
    return pt;
}

inline double column_scale(const Matrix& x) { return x.colwise().squaredNorm().maxCoeff(); }

}  // namespace detail

/// Residual bandwidth minimising
///   MGCV(b) = max_s sum_i (m_b(i/n, t_s) - X_i(t_s))^2 / (1 - tr Q(b) / n)^2,
/// Q(b) the local-linear hat matrix (column independent). Ties go to the
/// smallest candidate; candidates with tr Q >= n or a singular fit are skipped.
inline MgcvResult mgcv_bandwidth(const FunctionalSeries& series, const BandwidthGrid& grid) {
    grid.validate();
    std::vector<MgcvPoint> curve;
    for (double b : grid.candidates) {
        curve.push_back(detail::mgcv_point(series.values(), b, 0, series.n() - 1, static_cast<double>(series.n())));
    }
    return detail::pick_mgcv(std::move(curve), detail::column_scale(series.values()));
}

/// MGCV restricted to the window [ceil(nu - nb), floor(nu + nb)] of each
/// candidate b, the local fit using the window's data only and the trace
/// normalised by 2 n b.
inline MgcvResult mgcv_bandwidth_local(const FunctionalSeries& series, double u, const BandwidthGrid& grid) {
    grid.validate();
    if (!(u > 0.0) || !(u < 1.0)) throw ParameterError("fixed u must lie in (0,1)");
    std::vector<MgcvPoint> curve;
    for (double b : grid.candidates) {
        const LocalWindow w = local_window(series.n(), u, b);
        const double norm = 2.0 * static_cast<double>(series.n()) * b;
        curve.push_back(detail::mgcv_point(series.values(), b, w.first - 1, w.last - 1, norm));
    }
    return detail::pick_mgcv(std::move(curve), detail::column_scale(series.values()));
}

/// b_n = 1.2 d_n.
inline double surface_bandwidth(double d_n) {
    const double b = 1.2 * d_n;
    if (!(d_n > 0.0) || !(b < 0.5)) throw ParameterError("surface bandwidth 1.2*d_n must lie in (0, 1/2)");
    return b;
}

/// Candidate bootstrap windows, even and strictly increasing, at least five.
struct WindowGrid {
    std::vector<int> candidates;

    static constexpr std::size_t kMaxCandidates = 20;

    /// Even integers 4, 6, ... up to ceil(n b_n), at most 20 of them.
    static WindowGrid default_for(Index n, double b_n) {
        const Index c = window_half_width(n, b_n);
        WindowGrid g;
        for (Index m = 4; m <= c && g.candidates.size() < kMaxCandidates; m += 2) g.candidates.push_back(static_cast<int>(m));
        return g;
    }

    void validate(Index limit) const {
        if (candidates.size() < 5) throw ParameterError("window grid needs at least 5 candidates");
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const int m = candidates[i];
            if (m < 2 || m % 2 != 0) throw ParameterError("window candidates must be even and >= 2");
            if (i > 0 && m <= candidates[i - 1]) throw ParameterError("window candidates must increase");
            if (m >= limit) {
                throw ParameterError("window candidate " + std::to_string(m) + " violates m < " + std::to_string(limit));
            }
        }
    }
};

struct MvResult {
    int selected = 0;
    std::vector<int> windows;
    std::vector<double> volatility;  // MV(k); NaN outside k = 3..M-2 (1-based)
};

/// Cap on the number of flat coordinates averaged in MV(k).
inline constexpr Index kMaxVolatilityCoordinates = 20000;

/// Minimal-volatility choice given, for each candidate window, the vector of
/// mean squared block sums per coordinate (same length for every window).
///
/// se_r(k) is the standard deviation (divisor 4) of the five values at
/// windows k-2..k+2, MV(k) its mean over coordinates, minimised over
/// k = 3..M-2 with ties to the smallest k.
inline MvResult select_min_volatility(const WindowGrid& grid,
                                      const std::function<std::vector<double>(int)>& mean_square_blocks) {
    const std::size_t M = grid.candidates.size();
    if (M < 5) throw ParameterError("window grid needs at least 5 candidates");
    std::vector<std::vector<double>> diag(M);
    for (std::size_t s = 0; s < M; ++s) {
        diag[s] = mean_square_blocks(grid.candidates[s]);
        if (s > 0 && diag[s].size() != diag[0].size()) throw ParameterError("inconsistent coordinate count across windows");
    }
    bool any = false;
    for (const auto& d : diag) {
        for (double v : d) any = any || v > 0.0;
    }
    if (!any) throw NumericalError("minimal volatility: all block sums vanish (degenerate residuals)");

    MvResult out;
    out.windows = grid.candidates;
    out.volatility.assign(M, std::numeric_limits<double>::quiet_NaN());
    const std::size_t coords = diag[0].size();
    double best = 0.0;
    bool found = false;
    for (std::size_t k = 2; k + 2 < M; ++k) {  // 0-based k for 1-based 3..M-2
        double total = 0.0;
        for (std::size_t r = 0; r < coords; ++r) {
            double mean = 0.0;
            for (std::size_t s = k - 2; s <= k + 2; ++s) mean += diag[s][r];
            mean /= 5.0;
            double ss = 0.0;
            for (std::size_t s = k - 2; s <= k + 2; ++s) ss += (diag[s][r] - mean) * (diag[s][r] - mean);
            total += std::sqrt(ss / 4.0);
        }
        const double mv = total / static_cast<double>(coords);
        out.volatility[k] = mv;
        if (!found || mv < best) {
            best = mv;
            out.selected = grid.candidates[k];
            found = true;
        }
    }
    return out;
}

/// Mean squared block sums (1/J) sum_j block(j, r)^2 for every flat
/// coordinate r = k p + s, subsampled with a fixed stride to at most
/// kMaxVolatilityCoordinates values.
inline std::vector<double> mean_square_blocks(const BlockSumAccessor& acc) {
    const Index total = acc.num_k() * acc.p();
    const Index stride = (total + kMaxVolatilityCoordinates - 1) / kMaxVolatilityCoordinates;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>((total + stride - 1) / stride));
    std::vector<double> row(static_cast<std::size_t>(acc.num_j()));
    for (Index r = 0; r < total; r += stride) {
        acc.fill_blocks(r / acc.p(), r % acc.p(), row);
        double ss = 0.0;
        for (double v : row) ss += v * v;
        out.push_back(ss / static_cast<double>(acc.num_j()));
    }
    return out;
}

/// sigma-normalised residuals used by the varying-width surface (and by window selection).
inline NormalizedResiduals normalized_design_residuals(const FunctionalSeries& series, double b_n, double d_n,
                                                       const LrvParams& lrv) {
    const LocalLinearFit fit = local_linear_fit(series, d_n);
    const Matrix sigma = LrvEstimator(series, lrv).design_field().cwiseMax(0.0).cwiseSqrt();
    return normalize_residuals(fit.residuals, sigma, sigma_floor(sigma, b_n));
}

/// Window m'_n by minimal volatility of the sigma-normalised surface block sums.
inline MvResult minimal_volatility_window(const FunctionalSeries& series, double b_n, double d_n,
                                          const LrvParams& lrv, const WindowGrid& grid) {
    const Index c = window_half_width(series.n(), b_n);
    grid.validate(2 * c);
    const NormalizedResiduals normed = normalized_design_residuals(series, b_n, d_n, lrv);
    const KernelWeights weights = kernel_weights(series.n(), b_n);
    return select_min_volatility(grid, [&](int m) {
        return mean_square_blocks(BlockSumAccessor(normed.values, weights, m));
    });
}

/// Window selection for the fixed-u band, using sigma(u, t_k)-normalised local blocks.
inline MvResult minimal_volatility_window_fixed_u(const FunctionalSeries& series, double u, double b_n, double d_n,
                                                  const LrvParams& lrv, const WindowGrid& grid) {
    const LocalWindow w = local_window(series.n(), u, b_n);
    grid.validate(w.size() - 1);
    const LocalLinearFit fit = local_linear_fit(series, d_n);
    const LrvEstimator estimator(series, lrv);
    Vector sigma(series.p());
    for (Index k = 0; k < series.p(); ++k) sigma(k) = std::sqrt(std::max(0.0, estimator.estimate(u, k)));
    const double med = median(std::span<const double>(sigma.data(), static_cast<std::size_t>(sigma.size())));
    if (!(med > 0.0)) throw NumericalError("long-run variance estimate is identically zero at fixed u");
    sigma = sigma.cwiseMax(kSigmaFloorRatio * med);
    return select_min_volatility(grid, [&](int m) {
        const FixedUBlocks blocks = fixed_u_blocks(fit.residuals, u, b_n, m, sigma);
        std::vector<double> out(static_cast<std::size_t>(series.p()));
        for (Index s = 0; s < series.p(); ++s) {
            out[static_cast<std::size_t>(s)] = blocks.blocks.row(s).squaredNorm() / static_cast<double>(blocks.count());
        }
        return out;
    });
}

/// Data-driven tuning of one pipeline.
struct AutoTuneResult {
    double d_n = 0.0;
    double b_n = 0.0;
    int m_n = 0;
    LrvParams lrv;
    MgcvResult mgcv;
    MvResult mv;
};

/// Which object the tuning is for; the fixed-t column and fixed-u value apply to the band variants.
struct TuneTarget {
    enum class Kind { Surface, FixedT, FixedU } kind = Kind::Surface;
    Index t_index = 0;
    double u = 0.5;
};

/// Optional manual values; any that is set replaces the data-driven choice.
struct TuneOverrides {
    std::optional<double> d_n;
    std::optional<double> b_n;
    std::optional<int> m_n;
    std::optional<LrvParams> lrv;
};

inline AutoTuneResult auto_tune(const FunctionalSeries& series, const TuneTarget& target,
                                const TuneOverrides& overrides = {},
                                std::optional<BandwidthGrid> bandwidths = std::nullopt,
                                std::optional<WindowGrid> windows = std::nullopt) {
    AutoTuneResult out;
    const BandwidthGrid bgrid = bandwidths.value_or(BandwidthGrid::default_for(series.n()));
    out.lrv = overrides.lrv.value_or(default_lrv_params(series.n()));
    if (overrides.d_n) {
        out.d_n = *overrides.d_n;
    } else {
        out.mgcv = target.kind == TuneTarget::Kind::FixedU ? mgcv_bandwidth_local(series, target.u, bgrid)
                                                           : mgcv_bandwidth(series, bgrid);
        out.d_n = out.mgcv.selected;
    }
    out.b_n = overrides.b_n.value_or(surface_bandwidth(out.d_n));
    interior_interval(series.n(), out.b_n);
    if (overrides.m_n) {
        out.m_n = *overrides.m_n;
        return out;
    }
    const WindowGrid wgrid = windows.value_or(WindowGrid::default_for(series.n(), out.b_n));
    switch (target.kind) {
        case TuneTarget::Kind::Surface:
            out.mv = minimal_volatility_window(series, out.b_n, out.d_n, out.lrv, wgrid);
            break;
        case TuneTarget::Kind::FixedT:
            out.mv = minimal_volatility_window(series.column(target.t_index), out.b_n, out.d_n, out.lrv, wgrid);
            break;
        case TuneTarget::Kind::FixedU:
            out.mv = minimal_volatility_window_fixed_u(series, target.u, out.b_n, out.d_n, out.lrv, wgrid);
            break;
    }
    out.m_n = out.mv.selected;
    return out;
}

}  // namespace lsfts
