#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "lsfts/core.hpp"
#include "lsfts/rng.hpp"

namespace lsfts::sim {

/// m1(u,t) = (1+u)(6(t-0.5)^2 + 1)
inline double mean_m1(double u, double t) { return (1.0 + u) * (6.0 * (t - 0.5) * (t - 0.5) + 1.0); }

/// m2(u,t) = (1+u^2)(6(t-0.5)^2 (1 + 1{t > 0.3}) + 1), discontinuous at t = 0.3.
inline double mean_m2(double u, double t) {
    const double jump = t > 0.3 ? 2.0 : 1.0;
    return (1.0 + u * u) * (6.0 * (t - 0.5) * (t - 0.5) * jump + 1.0);
}

inline double coef_a(double u) { return 0.5 * std::cos(std::numbers::pi * u / 3.0); }
inline double coef_b(double u) { return 0.4 * u; }
inline double coef_c(double u) { return 0.3 * u * u; }

inline double scale_d1(double t) { return 1.0 + 0.5 * std::sin(std::numbers::pi * t); }
inline double scale_d21(double t) { return 2.0 * t - 1.0; }
inline double scale_d22(double t) { return 6.0 * t * t - 6.0 * t + 1.0; }

/// MA truncation lag; |a| <= 0.5 and |b| <= 0.4 put the tail below 2^-60.
inline constexpr int kTruncation = 60;

/// Locally stationary AR(1): G1(u_i) = sum_{j=0}^{J} a(u_i)^j e_{i-j}.
///
/// innovations[J + i] holds e_i for i = 0..n-1; the first J entries are the
/// pre-sample values.
inline std::vector<double> gen_g1(std::span<const double> u_path, std::span<const double> innovations,
                                  int truncation = kTruncation) {
    const std::size_t n = u_path.size();
    const auto J = static_cast<std::size_t>(truncation);
    if (innovations.size() < n + J) throw ParameterError("gen_g1: innovation stream too short");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = coef_a(u_path[i]);
        double acc = 0.0, w = 1.0;
        for (std::size_t j = 0; j <= J; ++j) {
            acc += w * innovations[J + i - j];
            w *= a;
        }
        out[i] = acc;
    }
    return out;
}

/// Locally stationary ARMA(1,1) with psi_0 = 1, psi_j = b^{j-1}(b - c), truncated at J.
inline std::vector<double> gen_g2(std::span<const double> u_path, std::span<const double> innovations,
                                  int truncation = kTruncation) {
    const std::size_t n = u_path.size();
    const auto J = static_cast<std::size_t>(truncation);
    if (innovations.size() < n + J) throw ParameterError("gen_g2: innovation stream too short");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = coef_b(u_path[i]);
        const double c = coef_c(u_path[i]);
        double acc = innovations[J + i];
        double psi = b - c;
        for (std::size_t j = 1; j <= J; ++j) {
            acc += psi * innovations[J + i - j];
            psi *= b;
        }
        out[i] = acc;
    }
    return out;
}

/// Stationary variance of G1 at fixed u: 1 / (1 - a(u)^2).
inline double g1_variance(double u) {
    const double a = coef_a(u);
    return 1.0 / (1.0 - a * a);
}

/// Stationary variance of G2 at fixed u with t(8) innovations (variance 4/3).
inline double g2_variance(double u) {
    const double b = coef_b(u);
    const double c = coef_c(u);
    return (8.0 / 6.0) * (1.0 + (b - c) * (b - c) / (1.0 - b * b));
}

enum class Model { A, B, C, D };

inline Model parse_model(const std::string& s) {
    if (s == "a" || s == "A") return Model::A;
    if (s == "b" || s == "B") return Model::B;
    if (s == "c" || s == "C") return Model::C;
    if (s == "d" || s == "D") return Model::D;
    throw ParameterError("unknown model '" + s + "' (expected a, b, c or d)");
}

inline char model_letter(Model m) {
    switch (m) {
        case Model::A: return 'a';
        case Model::B: return 'b';
        case Model::C: return 'c';
        case Model::D: return 'd';
    }
    return '?';
}

struct ModelSpec {
    Model model = Model::A;
    Index n = 500;
    Index p = 23;
    std::uint64_t seed = 0;
    /// Test hook: drop the error process and return the mean surface.
    bool zero_noise = false;

    void validate() const {
        if (n < 50) throw ParameterError("simulation needs n >= 50");
        if (p < 2) throw ParameterError("simulation needs p >= 2");
    }
};

inline double true_mean(Model model, double u, double t) {
    return (model == Model::A || model == Model::B) ? mean_m1(u, t) : mean_m2(u, t);
}

inline bool has_second_component(Model model) { return model == Model::B || model == Model::D; }

/// Error variance of the model at (u, t).
inline double error_variance(Model model, double u, double t) {
    if (has_second_component(model)) {
        const double d21 = scale_d21(t), d22 = scale_d22(t);
        return g1_variance(u) * d21 * d21 / 4.0 + g2_variance(u) * d22 * d22 / 4.0;
    }
    const double d1 = scale_d1(t);
    return g1_variance(u) * d1 * d1 / 9.0;
}

/// Innovation draws for one simulated series: n + J Gaussian and n + J t(8) values.
struct Innovations {
    std::vector<double> gaussian;
    std::vector<double> student;
};

inline Innovations draw_innovations(std::uint64_t seed, Index n, int truncation = kTruncation) {
    const auto len = static_cast<std::size_t>(n + truncation);
    Innovations out;
    out.gaussian.resize(len);
    out.student.resize(len);
    RandomStream g(seed, stream_id(StreamTag::GaussianInnovations, 0));
    RandomStream s(seed, stream_id(StreamTag::StudentInnovations, 0));
    for (auto& v : out.gaussian) v = g.next_normal();
    for (auto& v : out.student) v = s.next_student_t(8);
    return out;
}

/// Both error processes along u_i = i/n.
struct ErrorPaths {
    std::vector<double> g1;
    std::vector<double> g2;
};

inline ErrorPaths error_paths(const Innovations& innov, Index n, int truncation = kTruncation) {
    std::vector<double> u(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) / static_cast<double>(n);
    return {gen_g1(u, innov.gaussian, truncation), gen_g2(u, innov.student, truncation)};
}

/// X_i(t_k) for models (a)-(d) on the n x p grid t_k = k/p.
inline FunctionalSeries simulate_model(const ModelSpec& spec) {
    spec.validate();
    const Index n = spec.n, p = spec.p;
    Matrix x(n, p);
    ErrorPaths paths;
    if (!spec.zero_noise) paths = error_paths(draw_innovations(spec.seed, n), n);
    for (Index k = 0; k < p; ++k) {
        const double t = static_cast<double>(k + 1) / static_cast<double>(p);
        for (Index i = 0; i < n; ++i) {
            const double u = static_cast<double>(i + 1) / static_cast<double>(n);
            double v = true_mean(spec.model, u, t);
            if (!spec.zero_noise) {
                const auto ii = static_cast<std::size_t>(i);
                if (has_second_component(spec.model)) {
                    v += paths.g1[ii] * scale_d21(t) / 2.0 + paths.g2[ii] * scale_d22(t) / 2.0;
                } else {
                    v += paths.g1[ii] * scale_d1(t) / 3.0;
                }
            }
            x(i, k) = v;
        }
    }
    return FunctionalSeries(std::move(x));
}

}  // namespace lsfts::sim
