#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsfts/error.hpp"
#include "lsfts/numeric.hpp"

namespace lsfts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Closed spatial domain [lo, hi]. Grid points are t_k = lo + (hi - lo) k / p, k = 1..p.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// n observations of a curve sampled on a uniform grid of p points.
///
/// Row i (0-based) is the observation at rescaled time (i + 1) / n; column k
/// (0-based) is the grid point t_{k+1}. Immutable once constructed.
class FunctionalSeries {
public:
    static constexpr Index kMinObservations = 8;

    explicit FunctionalSeries(Matrix values, Interval domain = {})
        : values_(std::move(values)), domain_(domain) {
        if (values_.rows() < kMinObservations) {
            throw DataError("functional series needs at least " +
                            std::to_string(kMinObservations) + " observations, got " +
                            std::to_string(values_.rows()));
        }
        if (values_.cols() < 1) throw DataError("functional series needs at least one grid point");
        if (!(domain_.lo < domain_.hi) || !std::isfinite(domain_.lo) || !std::isfinite(domain_.hi)) {
            throw ParameterError("space domain must satisfy lo < hi");
        }
        for (Index k = 0; k < values_.cols(); ++k) {
            for (Index i = 0; i < values_.rows(); ++i) {
                if (!std::isfinite(values_(i, k))) {
                    throw DataError("non-finite value at row " + std::to_string(i + 1) +
                                    ", column " + std::to_string(k + 1));
                }
            }
        }
    }

    Index n() const { return values_.rows(); }
    Index p() const { return values_.cols(); }
    const Matrix& values() const { return values_; }
    const Interval& domain() const { return domain_; }

    /// Rescaled time of row i (0-based): (i + 1) / n.
    double design_point(Index i) const { return static_cast<double>(i + 1) / static_cast<double>(n()); }

    /// Spatial grid value of column k (0-based).
    double t_value(Index k) const {
        return domain_.lo + (domain_.hi - domain_.lo) * static_cast<double>(k + 1) / static_cast<double>(p());
    }

    std::vector<double> t_values() const {
        std::vector<double> t(static_cast<std::size_t>(p()));
        for (Index k = 0; k < p(); ++k) t[static_cast<std::size_t>(k)] = t_value(k);
        return t;
    }

    /// Single-column series holding column k, same rescaled time axis.
    FunctionalSeries column(Index k) const {
        if (k < 0 || k >= p()) throw ParameterError("column index out of range");
        const double t = t_value(k);
        const double width = (domain_.hi - domain_.lo) / static_cast<double>(p());
        return FunctionalSeries(values_.col(k), Interval{t - width, t});
    }

private:
    Matrix values_;
    Interval domain_;
};

/// Admissible evaluation interval [b_n, 1 - b_n] for rescaled time.
inline std::pair<double, double> interior_interval(Index n, double b_n) {
    if (n < 1) throw ParameterError("sample size must be positive");
    if (!(b_n > 0.0) || !(b_n < 0.5)) {
        throw ParameterError("bandwidth b_n must lie in (0, 1/2), got " + std::to_string(b_n));
    }
    return {b_n, 1.0 - b_n};
}

inline bool in_interior(double u, double b_n) {
    constexpr double slack = 1e-12;
    return u >= b_n - slack && u <= 1.0 - b_n + slack;
}

/// Evaluation points: rescaled times and spatial grid columns.
///
/// Spatial points are restricted to the columns of the series grid (the
/// estimators are not interpolated in t).
struct EvalGrid {
    std::vector<double> u_values;
    std::vector<Index> t_columns;

    /// The grid {l/n : b_n <= l/n <= 1 - b_n} x {all columns}.
    static EvalGrid theory(Index n, Index p, double b_n) {
        interior_interval(n, b_n);
        EvalGrid grid;
        for (Index l = 1; l <= n; ++l) {
            const double u = static_cast<double>(l) / static_cast<double>(n);
            if (in_interior(u, b_n)) grid.u_values.push_back(u);
        }
        grid.t_columns.resize(static_cast<std::size_t>(p));
        for (Index k = 0; k < p; ++k) grid.t_columns[static_cast<std::size_t>(k)] = k;
        return grid;
    }

    std::size_t u_size() const { return u_values.size(); }
    std::size_t t_size() const { return t_columns.size(); }

    /// Throws if a u-point lies outside [b_n, 1 - b_n] or a column is out of range.
    void validate(Index p, double b_n) const {
        interior_interval(1, b_n);
        if (u_values.empty() || t_columns.empty()) throw ParameterError("evaluation grid is empty");
        for (std::size_t i = 0; i < u_values.size(); ++i) {
            if (!in_interior(u_values[i], b_n)) {
                throw ParameterError("evaluation point u=" + std::to_string(u_values[i]) +
                                     " outside [b_n, 1-b_n]");
            }
            if (i > 0 && !(u_values[i] > u_values[i - 1])) {
                throw ParameterError("evaluation u-values must be strictly increasing");
            }
        }
        for (std::size_t k = 0; k < t_columns.size(); ++k) {
            if (t_columns[k] < 0 || t_columns[k] >= p) throw ParameterError("evaluation column out of range");
            if (k > 0 && !(t_columns[k] > t_columns[k - 1])) {
                throw ParameterError("evaluation columns must be strictly increasing");
            }
        }
    }
};

enum class WidthMode { Constant, Varying };

inline const char* to_string(WidthMode mode) {
    return mode == WidthMode::Constant ? "constant" : "varying";
}

/// Every tuning value that went into a confidence object.
struct TuningRecord {
    double b_n = 0.0;
    double d_n = 0.0;
    int m_n = 0;
    int m_prime = 0;  // 2 * floor(m_n / 2)
    std::optional<int> lrv_w;
    std::optional<double> lrv_tau;
    int B = 0;
    std::uint64_t seed = 0;
    double quantile_value = 0.0;  // T at order statistic floor((1 - alpha) B)
    Index quantile_index = 0;     // 1-based
    Index sigma_floor_hits = 0;   // normalisation points raised to the sigma floor
};

/// Envelope over a (u, t) grid: lower = center - radius, upper = center + radius.
struct ConfidenceSurface {
    EvalGrid grid;
    std::vector<double> t_values;  // spatial value of each grid column
    Matrix center;                 // u_size x t_size
    Matrix lower;
    Matrix upper;
    Matrix radius;
    double alpha = 0.05;
    WidthMode width_mode = WidthMode::Constant;
    TuningRecord tuning;
};

enum class FixedAxis { U, T };

/// One-dimensional envelope along u (t fixed) or along t (u fixed).
struct ConfidenceBand {
    FixedAxis axis = FixedAxis::T;
    double fixed_value = 0.0;
    std::vector<double> points;  // varying coordinate
    Vector center;
    Vector lower;
    Vector upper;
    Vector radius;
    double alpha = 0.05;
    WidthMode width_mode = WidthMode::Constant;
    TuningRecord tuning;
};

}  // namespace lsfts
