#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lsfts/core.hpp"
#include "lsfts/kernels.hpp"

namespace lsfts {

/// Surface estimate m_hat(u, t_k) = (1 / (n b_n)) sum_i X_i(t_k) K((i/n - u) / b_n).
///
/// The sum is divided by n b_n, not by the sum of the weights. Returns a
/// u_size x t_size matrix.
inline Matrix nw_estimate(const FunctionalSeries& series, double b_n, const EvalGrid& grid) {
    const Index n = series.n();
    grid.validate(series.p(), b_n);
    const Index half = window_half_width(n, b_n);
    if (2 * half < 4) throw ParameterError("bandwidth too small: need 2*ceil(n*b_n) >= 4");

    const double nb = static_cast<double>(n) * b_n;
    const Matrix& x = series.values();
    Matrix out(static_cast<Index>(grid.u_size()), static_cast<Index>(grid.t_size()));
    std::vector<double> weights;
    for (std::size_t a = 0; a < grid.u_size(); ++a) {
        const double u = grid.u_values[a];
        // rows i (0-based) with |(i+1)/n - u| < b_n
        const Index centre = static_cast<Index>(std::lround(u * static_cast<double>(n))) - 1;
        const Index lo = std::max<Index>(0, centre - half - 1);
        const Index hi = std::min<Index>(n - 1, centre + half + 1);
        weights.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
        for (Index i = lo; i <= hi; ++i) {
            weights[static_cast<std::size_t>(i - lo)] = kernel_k((series.design_point(i) - u) / b_n);
        }
        for (std::size_t c = 0; c < grid.t_size(); ++c) {
            const Index k = grid.t_columns[c];
            double acc = 0.0;
            for (Index i = lo; i <= hi; ++i) acc += weights[static_cast<std::size_t>(i - lo)] * x(i, k);
            out(static_cast<Index>(a), static_cast<Index>(c)) = acc / nb;
        }
    }
    return out;
}

/// Local-linear smoother with the Epanechnikov kernel, evaluated at the design
/// points of a contiguous range of rows using only the data in that range.
///
/// The weights depend on the design and the bandwidth only, so one smoother
/// serves every column.
class LocalLinearSmoother {
public:
    /// Relative determinant below which the 2x2 weighted normal system is singular.
    static constexpr double kSingularTolerance = 1e-12;

    LocalLinearSmoother(Index n, double d_n) : LocalLinearSmoother(n, d_n, 0, n - 1) {}

    /// Rows first..last (0-based, inclusive) of an n-row series.
    LocalLinearSmoother(Index n, double d_n, Index first, Index last)
        : n_(n), d_n_(d_n), first_(first), last_(last) {
        if (!(d_n > 0.0)) throw ParameterError("local-linear bandwidth must be positive");
        if (first < 0 || last >= n || first > last) throw ParameterError("invalid smoothing row range");
        const Index half = window_half_width(n, d_n) + 1;
        const double nd = static_cast<double>(n);
        rows_.reserve(static_cast<std::size_t>(last - first + 1));
        for (Index i = first; i <= last; ++i) {
            const Index lo = std::max(first, i - half);
            const Index hi = std::min(last, i + half);
            double s0 = 0.0, s1 = 0.0, s2 = 0.0;
            std::vector<double> h(static_cast<std::size_t>(hi - lo + 1));
            for (Index j = lo; j <= hi; ++j) {
                const double x = static_cast<double>(j - i) / nd;
                const double w = kernel_h(x / d_n);
                h[static_cast<std::size_t>(j - lo)] = w;
                s0 += w;
                s1 += w * x;
                s2 += w * x * x;
            }
            const double det = s0 * s2 - s1 * s1;
            if (!(s0 > 0.0) || !(s2 > 0.0) || !(det > kSingularTolerance * s0 * s2)) {
                throw NumericalError("local-linear bandwidth too small: singular system at design point " +
                                     std::to_string(i + 1) + " (d_n=" + std::to_string(d_n) + ")");
            }
            Row row{lo, std::vector<double>(h.size())};
            for (Index j = lo; j <= hi; ++j) {
                const double x = static_cast<double>(j - i) / nd;
                row.weights[static_cast<std::size_t>(j - lo)] = h[static_cast<std::size_t>(j - lo)] * (s2 - x * s1) / det;
            }
            rows_.push_back(std::move(row));
        }
    }

    Index n() const { return n_; }
    double bandwidth() const { return d_n_; }
    Index first() const { return first_; }
    Index last() const { return last_; }
    Index size() const { return last_ - first_ + 1; }

    /// Hat-matrix entry Q(i, j) for rows i, j in the range (0-based absolute indices).
    double hat(Index i, Index j) const {
        const Row& row = rows_[static_cast<std::size_t>(i - first_)];
        const Index off = j - row.start;
        if (off < 0 || off >= static_cast<Index>(row.weights.size())) return 0.0;
        return row.weights[static_cast<std::size_t>(off)];
    }

    /// tr(Q) over the range.
    double trace() const {
        double tr = 0.0;
        for (Index i = first_; i <= last_; ++i) tr += hat(i, i);
        return tr;
    }

    /// Fitted values at rows first..last for every column of x (x has n rows).
    Matrix fit(const Matrix& x) const {
        Matrix out(size(), x.cols());
        for (Index i = first_; i <= last_; ++i) {
            const Row& row = rows_[static_cast<std::size_t>(i - first_)];
            const Index len = static_cast<Index>(row.weights.size());
            const Eigen::Map<const Vector> w(row.weights.data(), len);
            out.row(i - first_).noalias() = w.transpose() * x.middleRows(row.start, len);
        }
        return out;
    }

private:
    struct Row {
        Index start;
        std::vector<double> weights;
    };

    Index n_;
    double d_n_;
    Index first_;
    Index last_;
    std::vector<Row> rows_;
};

struct LocalLinearFit {
    Matrix fitted;     // n x p
    Matrix residuals;  // n x p, X - fitted
    double d_n = 0.0;
};

/// Local-linear detrending of every column at the design points u = i/n.
inline LocalLinearFit local_linear_fit(const FunctionalSeries& series, double d_n) {
    const LocalLinearSmoother smoother(series.n(), d_n);
    LocalLinearFit out;
    out.fitted = smoother.fit(series.values());
    out.residuals = series.values() - out.fitted;
    out.d_n = d_n;
    return out;
}

}  // namespace lsfts
