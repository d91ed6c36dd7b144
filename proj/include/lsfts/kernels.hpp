#pragma once

#include <cmath>

namespace lsfts {

/// Fourth-order kernel used by the surface estimator:
/// K(x) = (45 - 150 x^2 + 105 x^4) / 32 on |x| < 1, zero elsewhere.
/// Integrates to one and has vanishing second moment.
inline double kernel_k(double x) {
    if (!(std::abs(x) < 1.0)) return 0.0;
    const double x2 = x * x;
    return (45.0 - 150.0 * x2 + 105.0 * x2 * x2) / 32.0;
}

/// Epanechnikov kernel H(x) = 0.75 (1 - x^2) on |x| < 1.
inline double kernel_h(double x) {
    if (!(std::abs(x) < 1.0)) return 0.0;
    return 0.75 * (1.0 - x * x);
}

}  // namespace lsfts
