#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lsfts/core.hpp"

namespace lsfts {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Parses a full token as a double (accepts "nan"/"inf" so they can be reported as data errors).
inline bool parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    if (token.front() == '+') token.remove_prefix(1);
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

inline std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace detail

/// How the first row of a series file is interpreted.
enum class HeaderMode {
    Auto,     // header iff the first row equals the grid t-values (within 1e-9)
    Present,  // first row must be the grid t-values
    Absent,
};

inline constexpr double kHeaderTolerance = 1e-9;

/// Series from CSV text: optional header of p t-values, then n rows of p numbers.
inline FunctionalSeries read_series_csv(std::istream& in, Interval domain = {}, HeaderMode header = HeaderMode::Auto) {
    const std::vector<std::string> lines = detail::read_lines(in);
    if (lines.empty()) throw ParseError("empty input");

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<std::string_view>> tokens;
    tokens.reserve(lines.size());
    for (const auto& l : lines) tokens.push_back(detail::split_commas(l));
    const std::size_t p = tokens[0].size();

    std::size_t first_data = 0;
    if (header != HeaderMode::Absent) {
        std::vector<double> head(p);
        bool numeric = true;
        for (std::size_t k = 0; k < p; ++k) numeric = numeric && detail::parse_double(tokens[0][k], head[k]);
        bool matches = numeric && lines.size() > 1;
        if (numeric) {
            for (std::size_t k = 0; k < p; ++k) {
                const double t = domain.lo + (domain.hi - domain.lo) * static_cast<double>(k + 1) / static_cast<double>(p);
                matches = matches && std::abs(head[k] - t) <= kHeaderTolerance;
            }
        }
        if (header == HeaderMode::Present) {
            if (!numeric) throw GridError("header row must contain numeric t-values");
            if (!matches) throw GridError("header t-values do not match the uniform grid t_k = a + (b-a)k/p");
            first_data = 1;
        } else if (matches) {
            first_data = 1;
        }
    }

    const std::size_t n = lines.size() - first_data;
    Matrix values(static_cast<Index>(n), static_cast<Index>(p));
    for (std::size_t r = first_data; r < lines.size(); ++r) {
        const auto& row = tokens[r];
        if (row.size() != p) {
            throw ParseError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(p));
        }
        for (std::size_t k = 0; k < p; ++k) {
            double v = 0.0;
            if (!detail::parse_double(row[k], v)) {
                throw ParseError("row " + std::to_string(r + 1) + ", column " + std::to_string(k + 1) +
                                 ": cannot parse '" + std::string(row[k]) + "'");
            }
            if (!std::isfinite(v)) {
                throw DataError("non-finite value '" + std::string(row[k]) + "' at row " + std::to_string(r + 1) +
                                ", column " + std::to_string(k + 1));
            }
            values(static_cast<Index>(r - first_data), static_cast<Index>(k)) = v;
        }
    }
    return FunctionalSeries(std::move(values), domain);
}

inline FunctionalSeries load_csv(const std::string& path, Interval domain = {}, HeaderMode header = HeaderMode::Auto) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_series_csv(in, domain, header);
}

/// Header of grid t-values, then one row per observation.
inline void write_series_csv(std::ostream& out, const FunctionalSeries& series) {
    for (Index k = 0; k < series.p(); ++k) out << (k ? "," : "") << format_double(series.t_value(k));
    out << '\n';
    for (Index i = 0; i < series.n(); ++i) {
        for (Index k = 0; k < series.p(); ++k) out << (k ? "," : "") << format_double(series.values()(i, k));
        out << '\n';
    }
}

inline void save_series_csv(const FunctionalSeries& series, const std::string& path) {
    auto out = detail::open_output(path);
    write_series_csv(out, series);
    detail::finish_output(out, path);
}

inline constexpr const char* kEnvelopeHeader = "u,t,center,lower,upper";

/// Long format, u outer and t inner.
inline void write_surface_csv(std::ostream& out, const ConfidenceSurface& s) {
    out << kEnvelopeHeader << '\n';
    for (std::size_t a = 0; a < s.grid.u_size(); ++a) {
        for (std::size_t c = 0; c < s.grid.t_size(); ++c) {
            const auto i = static_cast<Index>(a), j = static_cast<Index>(c);
            out << format_double(s.grid.u_values[a]) << ',' << format_double(s.t_values[c]) << ','
                << format_double(s.center(i, j)) << ',' << format_double(s.lower(i, j)) << ','
                << format_double(s.upper(i, j)) << '\n';
        }
    }
}

inline void save_surface_csv(const ConfidenceSurface& surface, const std::string& path) {
    auto out = detail::open_output(path);
    write_surface_csv(out, surface);
    detail::finish_output(out, path);
}

inline void write_band_csv(std::ostream& out, const ConfidenceBand& b) {
    out << kEnvelopeHeader << '\n';
    for (std::size_t a = 0; a < b.points.size(); ++a) {
        const double u = b.axis == FixedAxis::T ? b.points[a] : b.fixed_value;
        const double t = b.axis == FixedAxis::T ? b.fixed_value : b.points[a];
        const auto i = static_cast<Index>(a);
        out << format_double(u) << ',' << format_double(t) << ',' << format_double(b.center(i)) << ','
            << format_double(b.lower(i)) << ',' << format_double(b.upper(i)) << '\n';
    }
}

inline void save_band_csv(const ConfidenceBand& band, const std::string& path) {
    auto out = detail::open_output(path);
    write_band_csv(out, band);
    detail::finish_output(out, path);
}

/// One row of an envelope file.
struct EnvelopeRow {
    double u = 0.0, t = 0.0, center = 0.0, lower = 0.0, upper = 0.0;

    friend bool operator==(const EnvelopeRow&, const EnvelopeRow&) = default;
};

inline std::vector<EnvelopeRow> read_envelope_csv(std::istream& in) {
    const std::vector<std::string> lines = detail::read_lines(in);
    if (lines.empty() || detail::trim(lines[0]) != kEnvelopeHeader) {
        throw ParseError(std::string("envelope file must start with header '") + kEnvelopeHeader + "'");
    }
    std::vector<EnvelopeRow> rows;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto tok = detail::split_commas(lines[r]);
        if (tok.size() != 5) throw ParseError("row " + std::to_string(r + 1) + " must have 5 fields");
        std::array<double, 5> v{};
        for (std::size_t c = 0; c < 5; ++c) {
            if (!detail::parse_double(tok[c], v[c])) {
                throw ParseError("row " + std::to_string(r + 1) + ": cannot parse '" + std::string(tok[c]) + "'");
            }
        }
        rows.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    return rows;
}

inline std::vector<EnvelopeRow> load_envelope_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_envelope_csv(in);
}

/// Rows "u,t,sigma2" of a long-run variance field.
inline void write_lrv_csv(std::ostream& out, const std::vector<double>& u, const std::vector<double>& t,
                          const Matrix& field) {
    out << "u,t,sigma2\n";
    for (std::size_t a = 0; a < u.size(); ++a) {
        for (std::size_t c = 0; c < t.size(); ++c) {
            out << format_double(u[a]) << ',' << format_double(t[c]) << ','
                << format_double(field(static_cast<Index>(a), static_cast<Index>(c))) << '\n';
        }
    }
}

}  // namespace lsfts
