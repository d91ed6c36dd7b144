#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsfts/core.hpp"
#include "lsfts/kernels.hpp"
#include "lsfts/lrv.hpp"
#include "lsfts/parallel.hpp"
#include "lsfts/rng.hpp"
#include "lsfts/smoothing.hpp"

namespace lsfts {

/// Kernel factors A(r) = K((r - c) / (n b_n)), r = 1 .. 2c - 1, c = ceil(n b_n).
/// Stored 0-based: weights[r - 1] = A(r).
struct KernelWeights {
    std::vector<double> weights;
    Index half_width = 0;  // c

    Index size() const { return static_cast<Index>(weights.size()); }
};

inline KernelWeights kernel_weights(Index n, double b_n) {
    interior_interval(n, b_n);
    KernelWeights out;
    out.half_width = window_half_width(n, b_n);
    const double nb = static_cast<double>(n) * b_n;
    out.weights.resize(static_cast<std::size_t>(2 * out.half_width - 1));
    for (Index r = 1; r <= 2 * out.half_width - 1; ++r) {
        out.weights[static_cast<std::size_t>(r - 1)] = kernel_k(static_cast<double>(r - out.half_width) / nb);
    }
    return out;
}

/// Lazy view of the bootstrap block sums of the rearranged residual vectors.
///
/// With h = floor(m/2), m' = 2h and c = ceil(n b_n), for 1-based indices
///
///   block(j, k, s) = (1/sqrt m') ( sum_{r=j}^{j+h-1} - sum_{r=j+h}^{j+m'-1} ) A(r) E[r+k-1, s],
///
/// j = 1..2c-m', k = 1..n-2c+1, s = 1..p. The public accessors are 0-based.
/// The rearranged vectors themselves are never stored; rows of blocks are
/// produced on demand from prefix sums over r.
class BlockSumAccessor {
public:
    BlockSumAccessor(Matrix residuals, KernelWeights weights, int window)
        : residuals_(std::move(residuals)), weights_(std::move(weights)) {
        if (window < 2) throw ParameterError("bootstrap window m_n must be >= 2");
        half_ = window / 2;
        m_prime_ = 2 * half_;
        const Index n = residuals_.rows();
        const Index c = weights_.half_width;
        if (m_prime_ > weights_.size()) {
            throw ParameterError("bootstrap window m'=" + std::to_string(m_prime_) +
                                 " longer than the kernel weight vector (" + std::to_string(weights_.size()) + ")");
        }
        num_j_ = 2 * c - m_prime_;
        num_k_ = n - 2 * c + 1;
        if (num_j_ < 1) throw ParameterError("2*ceil(n*b_n) - m' must be positive; retune m_n or b_n");
        if (num_k_ < 1) throw ParameterError("bandwidth too large: n - 2*ceil(n*b_n) + 1 < 1");
        scale_ = 1.0 / std::sqrt(static_cast<double>(m_prime_));
    }

    Index n() const { return residuals_.rows(); }
    Index p() const { return residuals_.cols(); }
    Index num_j() const { return num_j_; }
    Index num_k() const { return num_k_; }
    Index half() const { return half_; }
    int m_prime() const { return static_cast<int>(m_prime_); }
    /// Number of multipliers per replicate, n - m'.
    Index multiplier_count() const { return n() - m_prime_; }
    const KernelWeights& weights() const { return weights_; }
    const Matrix& residuals() const { return residuals_; }

    /// Direct evaluation of one block sum (0-based j, k, s).
    double block(Index j, Index k, Index s) const {
        if (j < 0 || j >= num_j_ || k < 0 || k >= num_k_ || s < 0 || s >= p()) {
            throw ParameterError("block index out of range");
        }
        double first = 0.0, second = 0.0;
        for (Index q = 0; q < half_; ++q) {
            const Index r = j + q;
            first += weights_.weights[static_cast<std::size_t>(r)] * residuals_(r + k, s);
        }
        for (Index q = half_; q < m_prime_; ++q) {
            const Index r = j + q;
            second += weights_.weights[static_cast<std::size_t>(r)] * residuals_(r + k, s);
        }
        return scale_ * (first - second);
    }

    /// out[j] = block(j, k, s) for all j, via prefix sums.
    void fill_blocks(Index k, Index s, std::span<double> out) const {
        if (static_cast<Index>(out.size()) != num_j_) throw ParameterError("block buffer has wrong length");
        const Index len = weights_.size();
        prefix_.resize(static_cast<std::size_t>(len + 1));
        prefix_[0] = 0.0;
        for (Index r = 0; r < len; ++r) {
            prefix_[static_cast<std::size_t>(r + 1)] =
                prefix_[static_cast<std::size_t>(r)] + weights_.weights[static_cast<std::size_t>(r)] * residuals_(r + k, s);
        }
        for (Index j = 0; j < num_j_; ++j) {
            const double a = prefix_[static_cast<std::size_t>(j)];
            const double b = prefix_[static_cast<std::size_t>(j + half_)];
            const double c = prefix_[static_cast<std::size_t>(j + m_prime_)];
            out[static_cast<std::size_t>(j)] = scale_ * ((b - a) - (c - b));
        }
    }

    /// p x num_j matrix of blocks for one k (row s, column j).
    Matrix blocks_for(Index k) const {
        Matrix out(p(), num_j_);
        std::vector<double> row(static_cast<std::size_t>(num_j_));
        for (Index s = 0; s < p(); ++s) {
            fill_blocks(k, s, row);
            for (Index j = 0; j < num_j_; ++j) out(s, j) = row[static_cast<std::size_t>(j)];
        }
        return out;
    }

private:
    Matrix residuals_;
    KernelWeights weights_;
    Index half_ = 1;
    Index m_prime_ = 2;
    Index num_j_ = 0;
    Index num_k_ = 0;
    double scale_ = 1.0;
    mutable std::vector<double> prefix_;  // scratch; accessor copies are per-thread
};

/// Components T_k[s] = sum_j block(j,k,s) R_{k+j-1} (0-based: R[k+j]), as a num_k x p matrix.
inline Matrix draw_T_components(const BlockSumAccessor& acc, std::span<const double> multipliers) {
    if (static_cast<Index>(multipliers.size()) != acc.multiplier_count()) {
        throw ParameterError("multiplier vector must have length n - m' = " + std::to_string(acc.multiplier_count()));
    }
    Matrix out(acc.num_k(), acc.p());
    const Eigen::Map<const Vector> r(multipliers.data(), static_cast<Index>(multipliers.size()));
    for (Index k = 0; k < acc.num_k(); ++k) {
        out.row(k) = (acc.blocks_for(k) * r.segment(k, acc.num_j())).transpose();
    }
    return out;
}

/// T = max_{k,s} |T_k[s]| for one multiplier vector.
inline double draw_T(const BlockSumAccessor& acc, std::span<const double> multipliers) {
    return draw_T_components(acc, multipliers).cwiseAbs().maxCoeff();
}

/// Standard-normal multipliers for replicates first..first+count-1, one column each.
inline Matrix multiplier_matrix(Index length, Index first, Index count, std::uint64_t seed) {
    Matrix out(length, count);
    for (Index c = 0; c < count; ++c) {
        RandomStream rng(seed, stream_id(StreamTag::BootstrapMultipliers, static_cast<std::uint64_t>(first + c)));
        for (Index i = 0; i < length; ++i) out(i, c) = rng.next_normal();
    }
    return out;
}

/// B bootstrap maxima in replicate order.
///
/// Replicate r draws its multipliers from stream (seed, r). Work is split
/// into fixed tiles of k, each evaluated with identical arithmetic whatever
/// the thread count, and combined with max (exact), so the output is
/// bit-identical for any `threads`.
inline std::vector<double> bootstrap_maxima(const BlockSumAccessor& acc, int B, std::uint64_t seed,
                                            unsigned threads = 1) {
    if (B < 1) throw ParameterError("bootstrap replicate count must be positive");
    const Matrix mult = multiplier_matrix(acc.multiplier_count(), 0, B, seed);
    constexpr Index kTile = 32;
    const Index tiles = (acc.num_k() + kTile - 1) / kTile;
    std::vector<Vector> tile_max(static_cast<std::size_t>(tiles));
    parallel_for(static_cast<std::size_t>(tiles), threads, [&](std::size_t t) {
        const BlockSumAccessor local = acc;
        Vector best = Vector::Zero(B);
        const Index k0 = static_cast<Index>(t) * kTile;
        const Index k1 = std::min(acc.num_k(), k0 + kTile);
        Matrix comps;
        for (Index k = k0; k < k1; ++k) {
            comps.noalias() = local.blocks_for(k) * mult.middleRows(k, acc.num_j());
            best = best.cwiseMax(comps.cwiseAbs().colwise().maxCoeff().transpose());
        }
        tile_max[t] = std::move(best);
    });
    Vector best = Vector::Zero(B);
    for (const auto& v : tile_max) best = best.cwiseMax(v);
    return std::vector<double>(best.data(), best.data() + B);
}

/// 1-based order-statistic index floor((1 - alpha) B), clamped to [1, B].
inline Index quantile_index(Index B, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
    const Index idx = floor_snapped((1.0 - alpha) * static_cast<double>(B));
    return std::clamp<Index>(idx, 1, B);
}

/// Sorted bootstrap sample with its selected order statistic.
struct BootstrapDraws {
    std::vector<double> sorted;
    double alpha = 0.05;
    Index index = 1;  // 1-based

    BootstrapDraws(std::vector<double> draws, double alpha_level)
        : sorted(std::move(draws)), alpha(alpha_level) {
        if (sorted.empty()) throw ParameterError("bootstrap sample is empty");
        std::sort(sorted.begin(), sorted.end());
        index = quantile_index(static_cast<Index>(sorted.size()), alpha);
    }

    double quantile() const { return sorted[static_cast<std::size_t>(index - 1)]; }
};

inline double bootstrap_quantile(std::vector<double> draws, double alpha) {
    return BootstrapDraws(std::move(draws), alpha).quantile();
}

/// sqrt(2) / (sqrt(n b_n) sqrt(count)): converts a bootstrap quantile into a radius.
inline double radius_scale(Index n, double b_n, Index count) {
    return std::sqrt(2.0) / (std::sqrt(static_cast<double>(n) * b_n) * std::sqrt(static_cast<double>(count)));
}

/// Tuning and resampling settings shared by surfaces and bands.
struct BootstrapConfig {
    double b_n = 0.1;
    double d_n = 0.1;
    int m_n = 4;
    double alpha = 0.05;
    int B = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate(Index n) const {
        interior_interval(n, b_n);
        if (!(d_n > 0.0) || !(d_n < 0.5)) throw ParameterError("residual bandwidth d_n must lie in (0, 1/2)");
        if (m_n < 2) throw ParameterError("window m_n must be >= 2");
        if (!(alpha > 0.0) || !(alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
        if (B < 10) throw ParameterError("B must be >= 10");
        const Index c = window_half_width(n, b_n);
        const int m_prime = 2 * (m_n / 2);
        if (m_prime >= 2 * c) {
            throw ParameterError("window m'=" + std::to_string(m_prime) + " must be < 2*ceil(n*b_n)=" +
                                 std::to_string(2 * c) + "; retune");
        }
    }

    TuningRecord record() const {
        TuningRecord t;
        t.b_n = b_n;
        t.d_n = d_n;
        t.m_n = m_n;
        t.m_prime = 2 * (m_n / 2);
        t.B = B;
        t.seed = seed;
        return t;
    }
};

/// Residuals divided by a floored standard deviation.
struct NormalizedResiduals {
    Matrix values;
    double floor = 0.0;
    Index floor_hits = 0;
};

/// Relative size of the sigma floor against the median interior sigma.
inline constexpr double kSigmaFloorRatio = 1e-6;

/// Floor max(sigma, 1e-6 * median sigma over rows with i/n in [b_n, 1-b_n]).
inline double sigma_floor(const Matrix& sigma_rows, double b_n) {
    const Index n = sigma_rows.rows();
    std::vector<double> interior;
    for (Index i = 0; i < n; ++i) {
        const double u = static_cast<double>(i + 1) / static_cast<double>(n);
        if (!in_interior(u, b_n)) continue;
        for (Index k = 0; k < sigma_rows.cols(); ++k) interior.push_back(sigma_rows(i, k));
    }
    if (interior.empty()) interior.assign(sigma_rows.data(), sigma_rows.data() + sigma_rows.size());
    const double med = median(interior);
    if (!(med > 0.0)) throw NumericalError("long-run variance estimate is identically zero; varying width undefined");
    return kSigmaFloorRatio * med;
}

/// E[i,k] / max(sigma[i,k], floor) with sigma given at the same (row, column) positions.
inline NormalizedResiduals normalize_residuals(const Matrix& residuals, const Matrix& sigma, double floor) {
    NormalizedResiduals out;
    out.floor = floor;
    out.values.resize(residuals.rows(), residuals.cols());
    for (Index k = 0; k < residuals.cols(); ++k) {
        for (Index i = 0; i < residuals.rows(); ++i) {
            double s = sigma(i, k);
            if (s < floor) {
                s = floor;
                ++out.floor_hits;
            }
            out.values(i, k) = residuals(i, k) / s;
        }
    }
    return out;
}

/// Residuals no larger than this fraction of the data are rounding noise.
inline constexpr double kResidualRoundingRatio = 1e-10;

/// Throws when the detrending residuals vanish up to rounding (e.g. exactly
/// affine, noiseless data): the bootstrap would return a zero-width envelope.
inline void require_nondegenerate_residuals(const FunctionalSeries& series, const Matrix& residuals) {
    const double data = series.values().cwiseAbs().maxCoeff();
    const double resid = residuals.cwiseAbs().maxCoeff();
    if (!(resid > kResidualRoundingRatio * data)) {
        throw NumericalError("residuals vanish (data is reproduced by the local-linear fit); the envelope would have zero width");
    }
}

namespace detail {

inline double checked_quantile(const BlockSumAccessor& acc, const BootstrapConfig& cfg, TuningRecord& tuning) {
    const BootstrapDraws draws(bootstrap_maxima(acc, cfg.B, cfg.seed, cfg.threads), cfg.alpha);
    tuning.quantile_value = draws.quantile();
    tuning.quantile_index = draws.index;
    if (!(draws.quantile() > 0.0)) {
        throw NumericalError("bootstrap quantile is zero (residuals vanish); the envelope would have zero width");
    }
    return draws.quantile();
}

inline ConfidenceSurface make_surface(const FunctionalSeries& series, const EvalGrid& grid, Matrix center,
                                      Matrix radius, const BootstrapConfig& cfg, WidthMode mode,
                                      TuningRecord tuning) {
    ConfidenceSurface s;
    s.grid = grid;
    for (Index k : grid.t_columns) s.t_values.push_back(series.t_value(k));
    s.lower = center - radius;
    s.upper = center + radius;
    s.center = std::move(center);
    s.radius = std::move(radius);
    s.alpha = cfg.alpha;
    s.width_mode = mode;
    s.tuning = tuning;
    return s;
}

}  // namespace detail

/// Confidence surface with constant width.
///
/// Residuals come from a local-linear fit with bandwidth d_n; the radius is
/// sqrt(2) T_q / (sqrt(n b_n) sqrt(2 ceil(n b_n) - m')).
inline ConfidenceSurface surface_constant(const FunctionalSeries& series, const BootstrapConfig& cfg,
                                          const EvalGrid& grid) {
    cfg.validate(series.n());
    grid.validate(series.p(), cfg.b_n);
    const LocalLinearFit fit = local_linear_fit(series, cfg.d_n);
    require_nondegenerate_residuals(series, fit.residuals);
    const BlockSumAccessor acc(fit.residuals, kernel_weights(series.n(), cfg.b_n), cfg.m_n);
    TuningRecord tuning = cfg.record();
    const double tq = detail::checked_quantile(acc, cfg, tuning);
    const double r1 = tq * radius_scale(series.n(), cfg.b_n, acc.num_j());
    Matrix center = nw_estimate(series, cfg.b_n, grid);
    Matrix radius = Matrix::Constant(center.rows(), center.cols(), r1);
    return detail::make_surface(series, grid, std::move(center), std::move(radius), cfg, WidthMode::Constant, tuning);
}

/// sigma(u, column) supplier for the varying-width construction.
using SigmaFunction = std::function<double(double u, Index column)>;

/// Varying-width surface with a caller-supplied standard deviation field.
///
/// Residuals are normalised by max(sigma(i/n, t_k), floor) and the radius at
/// (u, t) is max(sigma(u, t), floor) sqrt(2) T_q / (sqrt(n b_n) sqrt(2c - m')).
inline ConfidenceSurface surface_varying_with_sigma(const FunctionalSeries& series, const BootstrapConfig& cfg,
                                                    const EvalGrid& grid, const SigmaFunction& sigma) {
    cfg.validate(series.n());
    grid.validate(series.p(), cfg.b_n);
    const Index n = series.n();
    const LocalLinearFit fit = local_linear_fit(series, cfg.d_n);
    require_nondegenerate_residuals(series, fit.residuals);

    Matrix sigma_rows(n, series.p());
    for (Index k = 0; k < series.p(); ++k) {
        for (Index i = 0; i < n; ++i) sigma_rows(i, k) = sigma(series.design_point(i), k);
    }
    const double floor = sigma_floor(sigma_rows, cfg.b_n);
    NormalizedResiduals normed = normalize_residuals(fit.residuals, sigma_rows, floor);

    const BlockSumAccessor acc(std::move(normed.values), kernel_weights(n, cfg.b_n), cfg.m_n);
    TuningRecord tuning = cfg.record();
    tuning.sigma_floor_hits = normed.floor_hits;
    const double tq = detail::checked_quantile(acc, cfg, tuning);
    const double scale = tq * radius_scale(n, cfg.b_n, acc.num_j());

    Matrix center = nw_estimate(series, cfg.b_n, grid);
    Matrix radius(center.rows(), center.cols());
    for (std::size_t a = 0; a < grid.u_size(); ++a) {
        for (std::size_t c = 0; c < grid.t_size(); ++c) {
            const double s = std::max(sigma(grid.u_values[a], grid.t_columns[c]), floor);
            radius(static_cast<Index>(a), static_cast<Index>(c)) = s * scale;
        }
    }
    return detail::make_surface(series, grid, std::move(center), std::move(radius), cfg, WidthMode::Varying, tuning);
}

/// Varying-width surface using the long-run variance estimate of the raw data.
inline ConfidenceSurface surface_varying(const FunctionalSeries& series, const BootstrapConfig& cfg,
                                         const LrvParams& lrv, const EvalGrid& grid) {
    const LrvEstimator estimator(series, lrv);
    // The estimator is evaluated at the n design points and the grid points;
    // cache the design points since they dominate.
    const Matrix design = estimator.design_field().cwiseMax(0.0).cwiseSqrt();
    const Index n = series.n();
    const SigmaFunction sigma = [&](double u, Index column) {
        const double pos = u * static_cast<double>(n);
        const Index i = static_cast<Index>(std::lround(pos));
        if (i >= 1 && i <= n && std::abs(pos - static_cast<double>(i)) < 1e-9) return design(i - 1, column);
        return std::sqrt(std::max(0.0, estimator.estimate(u, column)));
    };
    ConfidenceSurface s = surface_varying_with_sigma(series, cfg, grid, sigma);
    s.tuning.lrv_w = lrv.w;
    s.tuning.lrv_tau = lrv.tau;
    return s;
}

}  // namespace lsfts
