#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lsfts/core.hpp"
#include "lsfts/kernels.hpp"

namespace lsfts {

/// Block length w and smoothing bandwidth tau of the long-run variance estimator.
struct LrvParams {
    int w = 2;
    double tau = 0.5;
};

/// w = floor(n^{2/7}), tau = n^{-1/7}.
inline LrvParams default_lrv_params(Index n) {
    if (n < 27) throw ParameterError("default LRV parameters need n >= 27");
    const double nd = static_cast<double>(n);
    return LrvParams{static_cast<int>(floor_snapped(std::pow(nd, 2.0 / 7.0))), std::pow(nd, -1.0 / 7.0)};
}

/// Long-run variance field sigma^2(u, t_k) from differences of adjacent
/// block sums of the raw data:
///
///   Delta_j = (sum_{i=j-w+1}^{j} X_i - sum_{i=j+1}^{j+w} X_i) / w,
///   sigma^2(u) = sum_{j=w}^{n-w} (w Delta_j^2 / 2) H((j/n - u)/tau) / sum_j H(...)
///
/// u is clamped to [w/n, 1 - w/n]. The squared differences are computed once
/// at construction; evaluation is read-only.
class LrvEstimator {
public:
    /// Weight sums below this are treated as empty.
    static constexpr double kMinWeightSum = 1e-300;

    LrvEstimator(const FunctionalSeries& series, LrvParams params)
        : n_(series.n()), p_(series.p()), params_(params) {
        const Index w = params.w;
        if (w < 2) throw ParameterError("LRV block length w must be >= 2");
        if (3 * w > n_) throw ParameterError("LRV block length w must satisfy w <= n/3");
        if (!(params.tau > 0.0) || !(params.tau < 1.0)) throw ParameterError("LRV bandwidth tau must lie in (0,1)");

        // Valid 1-based j: w..n-w; row r of scaled_sq_ corresponds to j = w + r.
        const Index count = n_ - 2 * w + 1;
        scaled_sq_.resize(count, p_);
        const Matrix& x = series.values();
        const double wd = static_cast<double>(w);
        for (Index k = 0; k < p_; ++k) {
            for (Index r = 0; r < count; ++r) {
                const Index j = w + r;  // 1-based
                double left = 0.0, right = 0.0;
                for (Index i = j - w + 1; i <= j; ++i) left += x(i - 1, k);
                for (Index i = j + 1; i <= j + w; ++i) right += x(i - 1, k);
                const double delta = (left - right) / wd;
                scaled_sq_(r, k) = wd * delta * delta / 2.0;
            }
        }
    }

    const LrvParams& params() const { return params_; }
    Index n() const { return n_; }
    Index p() const { return p_; }

    /// u after the constant extension outside [w/n, 1 - w/n].
    double clamp_u(double u) const {
        const double edge = static_cast<double>(params_.w) / static_cast<double>(n_);
        if (u < edge) return edge;
        if (u > 1.0 - edge) return 1.0 - edge;
        return u;
    }

    /// Normalised weights over the valid index set, in row order of the cache.
    Vector weights(double u) const {
        const double uc = clamp_u(u);
        const Index count = scaled_sq_.rows();
        Vector wts(count);
        double total = 0.0;
        for (Index r = 0; r < count; ++r) {
            const double j = static_cast<double>(params_.w + r);
            wts(r) = kernel_h((j / static_cast<double>(n_) - uc) / params_.tau);
            total += wts(r);
        }
        if (!(total >= kMinWeightSum)) {
            throw ParameterError("LRV weights vanish at u=" + std::to_string(u) + " (tau too small)");
        }
        return wts / total;
    }

    double estimate(double u, Index column) const {
        if (column < 0 || column >= p_) throw ParameterError("LRV column out of range");
        return weights(u).dot(scaled_sq_.col(column));
    }

    /// sigma^2 at every (u, column) pair of the given lists.
    Matrix field(const std::vector<double>& u_values, const std::vector<Index>& columns) const {
        Matrix out(static_cast<Index>(u_values.size()), static_cast<Index>(columns.size()));
        for (std::size_t a = 0; a < u_values.size(); ++a) {
            const Vector wts = weights(u_values[a]);
            for (std::size_t c = 0; c < columns.size(); ++c) {
                out(static_cast<Index>(a), static_cast<Index>(c)) = wts.dot(scaled_sq_.col(columns[c]));
            }
        }
        return out;
    }

    /// sigma^2 at every design point i/n (rows) and every column.
    Matrix design_field() const {
        std::vector<double> u(static_cast<std::size_t>(n_));
        for (Index i = 0; i < n_; ++i) u[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) / static_cast<double>(n_);
        std::vector<Index> cols(static_cast<std::size_t>(p_));
        for (Index k = 0; k < p_; ++k) cols[static_cast<std::size_t>(k)] = k;
        return field(u, cols);
    }

private:
    Index n_;
    Index p_;
    LrvParams params_;
    Matrix scaled_sq_;  // (n - 2w + 1) x p, entries w Delta_j^2 / 2
};

inline double lrv_estimate(const FunctionalSeries& series, LrvParams params, double u, Index column) {
    return LrvEstimator(series, params).estimate(u, column);
}

inline Matrix lrv_field(const FunctionalSeries& series, LrvParams params, const EvalGrid& grid) {
    return LrvEstimator(series, params).field(grid.u_values, grid.t_columns);
}

}  // namespace lsfts
