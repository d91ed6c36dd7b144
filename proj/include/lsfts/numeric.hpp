#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace lsfts {

using Index = std::int64_t;

namespace detail {

// Products such as n*b_n land a few ulps off an integer (500*0.12 =
// 60.000000000000007); rounding those to the integer keeps ceil/floor
// from jumping by one.
inline constexpr double kSnapTolerance = 1e-9;

inline double snap(double x) {
    const double r = std::round(x);
    return std::abs(x - r) <= kSnapTolerance * std::max(1.0, std::abs(x)) ? r : x;
}

}  // namespace detail

inline Index ceil_snapped(double x) { return static_cast<Index>(std::ceil(detail::snap(x))); }
inline Index floor_snapped(double x) { return static_cast<Index>(std::floor(detail::snap(x))); }

/// ceil(n * b), the half-width of the kernel window in design points.
inline Index window_half_width(Index n, double b) {
    return ceil_snapped(static_cast<double>(n) * b);
}

/// Median of a copy of the values (mean of the two middle elements for even sizes).
inline double median(std::span<const double> values) {
    if (values.empty()) return 0.0;
    std::vector<double> v(values.begin(), values.end());
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace lsfts
