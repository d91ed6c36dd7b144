#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsfts/lsfts.hpp"

namespace {

using namespace lsfts;

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::string report;
    std::string header = "auto";
    double t_lo = 0.0;
    double t_hi = 1.0;
    double alpha = 0.05;
    int B = 1000;
    std::string width = "constant";
    std::optional<double> fix_u;
    std::optional<double> fix_t;
    std::optional<double> b_n;
    std::optional<double> d_n;
    std::optional<int> m_n;
    std::optional<int> lrv_w;
    std::optional<double> lrv_tau;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    // tune
    std::string target = "surface";
    // simulate / coverage
    std::string model = "a";
    Index n = 500;
    Index p = 23;
    Index runs = 200;
    std::string pipeline = "surface-constant";
    bool long_run = false;
};

// ---------------------------------------------------------------- report

class Report {
public:
    template <class T>
    void add(const std::string& key, const T& value) {
        std::ostringstream s;
        s << value;
        lines_.emplace_back(key, s.str());
    }
    void add(const std::string& key, double value) { lines_.emplace_back(key, format_double(value)); }
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void add(const std::string& key, const char* value) { lines_.emplace_back(key, value); }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        for (const auto& [k, v] : lines_) out << k << '=' << v << '\n';
        if (!out) throw IoError("failed writing '" + path + "'");
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

template <class T>
std::string opt_text(const std::optional<T>& v) {
    if (!v) return "auto";
    if constexpr (std::is_floating_point_v<T>) return format_double(*v);
    else return std::to_string(*v);
}

void add_config(Report& r, const RunConfig& c) {
    r.add("config.command", c.command);
    r.add("config.input", c.input);
    r.add("config.output", c.output);
    r.add("config.header", c.header);
    r.add("config.t_lo", c.t_lo);
    r.add("config.t_hi", c.t_hi);
    r.add("config.alpha", c.alpha);
    r.add("config.B", c.B);
    r.add("config.width", c.width);
    r.add("config.fix_u", c.fix_u ? format_double(*c.fix_u) : std::string("none"));
    r.add("config.fix_t", c.fix_t ? format_double(*c.fix_t) : std::string("none"));
    r.add("config.b_n", opt_text(c.b_n));
    r.add("config.d_n", opt_text(c.d_n));
    r.add("config.m_n", opt_text(c.m_n));
    r.add("config.lrv_w", opt_text(c.lrv_w));
    r.add("config.lrv_tau", opt_text(c.lrv_tau));
    r.add("config.seed", c.seed);
    r.add("config.target", c.target);
    r.add("config.model", c.model);
    r.add("config.n", c.n);
    r.add("config.p", c.p);
    r.add("config.runs", c.runs);
    r.add("config.pipeline", c.pipeline);
    r.add("config.long_run", c.long_run ? "1" : "0");
}

std::map<std::string, std::string> read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("report line without '=': " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("report value " + key + "='" + s + "' is not a number");
    return v;
}

long long to_integer(const std::string& key, const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("report value " + key + "='" + s + "' is not an integer");
    return v;
}

RunConfig config_from_report(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find("config." + key);
        if (it == kv.end()) throw ParseError("report lacks config." + key);
        return it->second;
    };
    auto opt_d = [&](const std::string& key) -> std::optional<double> {
        const std::string& v = get(key);
        if (v == "auto" || v == "none") return std::nullopt;
        return to_double(key, v);
    };
    auto opt_i = [&](const std::string& key) -> std::optional<int> {
        const std::string& v = get(key);
        if (v == "auto") return std::nullopt;
        return static_cast<int>(to_integer(key, v));
    };
    RunConfig c;
    c.command = get("command");
    c.input = get("input");
    c.output = get("output");
    c.header = get("header");
    c.t_lo = to_double("t_lo", get("t_lo"));
    c.t_hi = to_double("t_hi", get("t_hi"));
    c.alpha = to_double("alpha", get("alpha"));
    c.B = static_cast<int>(to_integer("B", get("B")));
    c.width = get("width");
    c.fix_u = opt_d("fix_u");
    c.fix_t = opt_d("fix_t");
    c.b_n = opt_d("b_n");
    c.d_n = opt_d("d_n");
    c.m_n = opt_i("m_n");
    c.lrv_w = opt_i("lrv_w");
    c.lrv_tau = opt_d("lrv_tau");
    c.seed = std::stoull(get("seed"));
    c.target = get("target");
    c.model = get("model");
    c.n = to_integer("n", get("n"));
    c.p = to_integer("p", get("p"));
    c.runs = to_integer("runs", get("runs"));
    c.pipeline = get("pipeline");
    c.long_run = get("long_run") == "1";
    return c;
}

// ---------------------------------------------------------------- helpers

HeaderMode parse_header(const std::string& s) {
    if (s == "auto") return HeaderMode::Auto;
    if (s == "present") return HeaderMode::Present;
    if (s == "absent") return HeaderMode::Absent;
    throw ParameterError("header mode must be auto, present or absent");
}

WidthMode parse_width(const std::string& s) {
    if (s == "constant") return WidthMode::Constant;
    if (s == "varying") return WidthMode::Varying;
    throw ParameterError("width must be constant or varying");
}

void check_common(const RunConfig& c) {
    if (!(c.alpha > 0.0) || !(c.alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
    if (c.B < 10) throw ParameterError("B must be >= 10");
    if (c.m_n && *c.m_n < 2) throw ParameterError("m_n must be >= 2");
    if (c.lrv_w && *c.lrv_w < 2) throw ParameterError("lrv w must be >= 2");
    if (c.lrv_tau && !(*c.lrv_tau > 0.0)) throw ParameterError("lrv tau must be positive");
    parse_width(c.width);
    parse_header(c.header);
}

FunctionalSeries load_input(const RunConfig& c) {
    if (c.input.empty()) throw ParameterError("--input is required");
    return load_csv(c.input, Interval{c.t_lo, c.t_hi}, parse_header(c.header));
}

std::string report_path(const RunConfig& c) { return c.report.empty() ? c.output + ".report" : c.report; }

TuneOverrides overrides_of(const RunConfig& c, Index n) {
    TuneOverrides o;
    o.d_n = c.d_n;
    o.b_n = c.b_n;
    o.m_n = c.m_n;
    if (c.lrv_w || c.lrv_tau) {
        LrvParams lp = default_lrv_params(n);
        if (c.lrv_w) lp.w = *c.lrv_w;
        if (c.lrv_tau) lp.tau = *c.lrv_tau;
        o.lrv = lp;
    }
    return o;
}

void add_tuning(Report& r, const RunConfig& c, const TuningRecord& t, const AutoTuneResult& tuned, bool uses_lrv) {
    auto src = [](bool overridden) { return overridden ? "override" : "auto"; };
    r.add("b_n", t.b_n);
    r.add("b_n.source", c.b_n ? "override" : (c.d_n ? "derived-from-override" : "auto"));
    r.add("d_n", t.d_n);
    r.add("d_n.source", src(c.d_n.has_value()));
    r.add("m_n", t.m_n);
    r.add("m_n.source", src(c.m_n.has_value()));
    r.add("m_prime", t.m_prime);
    if (uses_lrv) {
        r.add("lrv.w", tuned.lrv.w);
        r.add("lrv.w.source", src(c.lrv_w.has_value()));
        r.add("lrv.tau", tuned.lrv.tau);
        r.add("lrv.tau.source", src(c.lrv_tau.has_value()));
    }
    r.add("B", t.B);
    r.add("quantile.T_q", t.quantile_value);
    r.add("quantile.index", t.quantile_index);
    r.add("sigma_floor_hits", t.sigma_floor_hits);
}

void add_footer(Report& r, std::chrono::steady_clock::time_point start) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.add("rng", kRngName);
    r.add("version", kVersion);
    r.add("wall_time_seconds", secs);
}

BootstrapConfig bootstrap_config(const RunConfig& c, const AutoTuneResult& tuned) {
    BootstrapConfig bc;
    bc.b_n = tuned.b_n;
    bc.d_n = tuned.d_n;
    bc.m_n = tuned.m_n;
    bc.alpha = c.alpha;
    bc.B = c.B;
    bc.seed = c.seed;
    bc.threads = c.threads;
    return bc;
}

// Maps a spatial value to its column using the normalised grid t_k = k / p.
Index column_for(const FunctionalSeries& s, double t) {
    const Interval d = s.domain();
    if (t < d.lo || t > d.hi) throw ParameterError("--fix-t value outside the spatial domain");
    return sim::nearest_column(s.p(), (t - d.lo) / (d.hi - d.lo));
}

// ---------------------------------------------------------------- commands

// Every command returns the list of artifact files it wrote (report excluded).
std::vector<std::string> run_surface(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    check_common(c);
    const FunctionalSeries s = load_input(c);
    const WidthMode mode = parse_width(c.width);
    const AutoTuneResult tuned = auto_tune(s, TuneTarget{}, overrides_of(c, s.n()));
    const BootstrapConfig bc = bootstrap_config(c, tuned);
    const EvalGrid grid = EvalGrid::theory(s.n(), s.p(), bc.b_n);
    const ConfidenceSurface surf = mode == WidthMode::Constant ? surface_constant(s, bc, grid)
                                                               : surface_varying(s, bc, tuned.lrv, grid);
    save_surface_csv(surf, c.output);

    Report r;
    add_config(r, c);
    r.add("n", s.n());
    r.add("p", s.p());
    add_tuning(r, c, surf.tuning, tuned, mode == WidthMode::Varying);
    r.add("grid.u_points", grid.u_size());
    r.add("grid.t_points", grid.t_size());
    r.add("seed", c.seed);
    r.add("threads", c.threads);
    add_footer(r, start);
    r.write(report_path(c));
    return {c.output};
}

std::vector<std::string> run_band(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    check_common(c);
    if (c.fix_u.has_value() == c.fix_t.has_value()) throw ParameterError("band needs exactly one of --fix-u or --fix-t");
    const FunctionalSeries s = load_input(c);
    const WidthMode mode = parse_width(c.width);
    TuneTarget target;
    if (c.fix_t) {
        target.kind = TuneTarget::Kind::FixedT;
        target.t_index = column_for(s, *c.fix_t);
    } else {
        target.kind = TuneTarget::Kind::FixedU;
        target.u = *c.fix_u;
    }
    const AutoTuneResult tuned = auto_tune(s, target, overrides_of(c, s.n()));
    const BootstrapConfig bc = bootstrap_config(c, tuned);
    const ConfidenceBand band = c.fix_t ? band_fixed_t(s, target.t_index, bc, mode, tuned.lrv)
                                        : band_fixed_u(s, target.u, bc, mode, tuned.lrv);
    save_band_csv(band, c.output);

    Report r;
    add_config(r, c);
    r.add("n", s.n());
    r.add("p", s.p());
    r.add("axis", c.fix_t ? "t" : "u");
    if (c.fix_t) {
        r.add("fixed.column", target.t_index + 1);
        r.add("fixed.t", s.t_value(target.t_index));
    } else {
        r.add("fixed.u", target.u);
    }
    add_tuning(r, c, band.tuning, tuned, mode == WidthMode::Varying);
    r.add("points", band.points.size());
    r.add("seed", c.seed);
    r.add("threads", c.threads);
    add_footer(r, start);
    r.write(report_path(c));
    return {c.output};
}

std::vector<std::string> run_tune(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    check_common(c);
    const FunctionalSeries s = load_input(c);
    TuneTarget target;
    if (c.target == "fix-t") {
        if (!c.fix_t) throw ParameterError("--target fix-t needs --fix-t");
        target.kind = TuneTarget::Kind::FixedT;
        target.t_index = column_for(s, *c.fix_t);
    } else if (c.target == "fix-u") {
        if (!c.fix_u) throw ParameterError("--target fix-u needs --fix-u");
        target.kind = TuneTarget::Kind::FixedU;
        target.u = *c.fix_u;
    } else if (c.target != "surface") {
        throw ParameterError("--target must be surface, fix-t or fix-u");
    }
    const AutoTuneResult tuned = auto_tune(s, target, overrides_of(c, s.n()));

    {
        std::ofstream out(c.output, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + c.output + "' for writing");
        out << "criterion,candidate,value\n";
        for (const MgcvPoint& pt : tuned.mgcv.curve) {
            out << "mgcv," << format_double(pt.bandwidth) << ',' << (pt.skipped ? std::string("skipped") : format_double(pt.score)) << '\n';
        }
        for (std::size_t i = 0; i < tuned.mv.windows.size(); ++i) {
            out << "mv," << tuned.mv.windows[i] << ',' << format_double(tuned.mv.volatility[i]) << '\n';
        }
        if (!out) throw IoError("failed writing '" + c.output + "'");
    }

    std::cout << "d_n=" << format_double(tuned.d_n) << '\n'
              << "b_n=" << format_double(tuned.b_n) << '\n'
              << "m_n=" << tuned.m_n << '\n';

    Report r;
    add_config(r, c);
    r.add("n", s.n());
    r.add("p", s.p());
    r.add("d_n", tuned.d_n);
    r.add("d_n.source", c.d_n ? "override" : "auto");
    r.add("b_n", tuned.b_n);
    r.add("b_n.source", c.b_n ? "override" : (c.d_n ? "derived-from-override" : "auto"));
    r.add("m_n", tuned.m_n);
    r.add("m_n.source", c.m_n ? "override" : "auto");
    r.add("lrv.w", tuned.lrv.w);
    r.add("lrv.tau", tuned.lrv.tau);
    add_footer(r, start);
    r.write(report_path(c));
    return {c.output};
}

std::vector<std::string> run_lrv(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    check_common(c);
    const FunctionalSeries s = load_input(c);
    LrvParams lp = default_lrv_params(s.n());
    if (c.lrv_w) lp.w = *c.lrv_w;
    if (c.lrv_tau) lp.tau = *c.lrv_tau;
    const LrvEstimator est(s, lp);
    const Matrix field = est.design_field();
    std::vector<double> u(static_cast<std::size_t>(s.n()));
    for (Index i = 0; i < s.n(); ++i) u[static_cast<std::size_t>(i)] = s.design_point(i);
    {
        std::ofstream out(c.output, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + c.output + "' for writing");
        write_lrv_csv(out, u, s.t_values(), field);
        if (!out) throw IoError("failed writing '" + c.output + "'");
    }
    Report r;
    add_config(r, c);
    r.add("n", s.n());
    r.add("p", s.p());
    r.add("lrv.w", lp.w);
    r.add("lrv.w.source", c.lrv_w ? "override" : "auto");
    r.add("lrv.tau", lp.tau);
    r.add("lrv.tau.source", c.lrv_tau ? "override" : "auto");
    add_footer(r, start);
    r.write(report_path(c));
    return {c.output};
}

std::vector<std::string> run_simulate(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    sim::ModelSpec spec;
    spec.model = sim::parse_model(c.model);
    spec.n = c.n;
    spec.p = c.p;
    spec.seed = c.seed;
    const FunctionalSeries s = sim::simulate_model(spec);
    save_series_csv(s, c.output);
    Report r;
    add_config(r, c);
    r.add("model", std::string(1, sim::model_letter(spec.model)));
    r.add("n", spec.n);
    r.add("p", spec.p);
    r.add("seed", c.seed);
    add_footer(r, start);
    r.write(report_path(c));
    return {c.output};
}

std::vector<std::string> run_coverage(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    check_common(c);
    sim::ModelSpec spec;
    spec.model = sim::parse_model(c.model);
    spec.n = c.n;
    spec.p = c.p;
    spec.seed = c.seed;
    sim::PipelineConfig pc;
    pc.pipeline = sim::parse_pipeline(c.pipeline);
    pc.alpha = c.alpha;
    pc.B = c.long_run ? 1000 : c.B;
    if (c.fix_t) pc.fixed_t = *c.fix_t;
    if (c.fix_u) pc.fixed_u = *c.fix_u;
    pc.overrides = overrides_of(c, c.n);
    const Index runs = c.long_run ? 1000 : c.runs;
    const sim::CoverageReport rep = sim::coverage_experiment(spec, runs, sim::standard_pipeline(pc), c.threads);

    {
        std::ofstream out(c.output, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + c.output + "' for writing");
        out << "run,series_seed,bootstrap_seed,hit,b_n,d_n,m_n,T_q\n";
        for (const sim::RunRecord& rec : rep.per_run) {
            out << rec.run << ',' << rec.series_seed << ',' << rec.bootstrap_seed << ',' << (rec.hit ? 1 : 0) << ','
                << format_double(rec.tuning.b_n) << ',' << format_double(rec.tuning.d_n) << ',' << rec.tuning.m_n
                << ',' << format_double(rec.tuning.quantile_value) << '\n';
        }
        if (!out) throw IoError("failed writing '" + c.output + "'");
    }

    Report r;
    add_config(r, c);
    r.add("pipeline", sim::to_string(pc.pipeline));
    r.add("model", std::string(1, sim::model_letter(spec.model)));
    r.add("n", spec.n);
    r.add("p", spec.p);
    r.add("alpha", pc.alpha);
    r.add("B", pc.B);
    r.add("runs", rep.runs);
    r.add("hits", rep.hits);
    r.add("coverage", rep.coverage);
    r.add("standard_error", rep.standard_error);
    r.add("seed", c.seed);
    r.add("threads", c.threads);
    add_footer(r, start);
    r.write(report_path(c));
    std::cout << "coverage=" << format_double(rep.coverage) << " (" << rep.hits << '/' << rep.runs << ")\n";
    return {c.output};
}

// Input rows hold "t_1,x_1,t_2,x_2,..." with strictly increasing t; each row is
// interpolated linearly onto t_k = lo + (hi - lo) k / p and held constant beyond
// its first and last observation.
std::vector<std::string> run_resample(const RunConfig& c, std::chrono::steady_clock::time_point start) {
    if (c.p < 1) throw ParameterError("--p must be positive");
    if (!(c.t_lo < c.t_hi)) throw ParameterError("--t-lo must be below --t-hi");
    std::ifstream in(c.input, std::ios::binary);
    if (!in) throw IoError("cannot open '" + c.input + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<double> vals;
        for (std::string_view tok : detail::split_commas(line)) {
            if (tok.empty()) continue;  // ragged rows may carry trailing commas
            double v = 0.0;
            if (!detail::parse_double(tok, v)) throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
            vals.push_back(v);
        }
        if (vals.empty() || vals.size() % 2 != 0) throw ParseError("line " + std::to_string(line_no) + ": expected t,x pairs");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw DataError("no observations in '" + c.input + "'");

    Matrix out(static_cast<Index>(rows.size()), c.p);
    const Interval dom{c.t_lo, c.t_hi};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::vector<double>& r = rows[i];
        const std::size_t m = r.size() / 2;
        for (std::size_t j = 1; j < m; ++j) {
            if (!(r[2 * j] > r[2 * j - 2])) throw DataError("row " + std::to_string(i + 1) + ": t-values must increase");
        }
        for (Index k = 0; k < c.p; ++k) {
            const double t = dom.lo + (dom.hi - dom.lo) * static_cast<double>(k + 1) / static_cast<double>(c.p);
            double v;
            if (t <= r[0]) {
                v = r[1];
            } else if (t >= r[2 * (m - 1)]) {
                v = r[2 * m - 1];
            } else {
                std::size_t j = 1;
                while (r[2 * j] < t) ++j;
                const double t0 = r[2 * j - 2], t1 = r[2 * j];
                const double w = (t - t0) / (t1 - t0);
                v = (1.0 - w) * r[2 * j - 1] + w * r[2 * j + 1];
            }
            out(static_cast<Index>(i), k) = v;
        }
    }
    save_series_csv(FunctionalSeries(out, dom), c.output);
    Report r;
    add_config(r, c);
    r.add("rows", rows.size());
    r.add("p", c.p);
    add_footer(r, start);
    r.write(report_path(c));
    return {c.output};
}

std::vector<std::string> dispatch(const RunConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    if (c.output.empty()) throw ParameterError("--output is required");
    if (c.command == "surface") return run_surface(c, start);
    if (c.command == "band") return run_band(c, start);
    if (c.command == "tune") return run_tune(c, start);
    if (c.command == "lrv") return run_lrv(c, start);
    if (c.command == "simulate") return run_simulate(c, start);
    if (c.command == "coverage") return run_coverage(c, start);
    if (c.command == "resample") return run_resample(c, start);
    throw ParameterError("unknown command '" + c.command + "'");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Re-executes the run recorded in a report, writing to "<output>.replay", and
// compares the artifacts byte for byte.
int run_replay(const std::string& report, unsigned threads) {
    RunConfig c = config_from_report(read_report(report));
    c.threads = threads;
    const std::string original = c.output;
    c.output = original + ".replay";
    c.report = c.output + ".report";
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    std::vector<std::string> produced;
    try {
        produced = dispatch(c);
    } catch (...) {
        std::cout.rdbuf(old);
        throw;
    }
    std::cout.rdbuf(old);
    const bool same = slurp(original) == slurp(c.output);
    std::filesystem::remove(c.output);
    std::filesystem::remove(c.report);
    std::cout << (same ? "replay: identical " : "replay: MISMATCH ") << original << '\n';
    return same ? kExitOk : kExitMismatch;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parameter: return kExitConfig;
        case ErrorKind::Numerical: return kExitNumerical;
        case ErrorKind::Parse:
        case ErrorKind::Data:
        case ErrorKind::Grid:
        case ErrorKind::Io: return kExitData;
    }
    return kExitData;
}

void add_estimation_flags(CLI::App* sub, RunConfig& c) {
    sub->add_option("--alpha", c.alpha, "Significance level");
    sub->add_option("-B,--bootstrap", c.B, "Bootstrap replicates");
    sub->add_option("--width", c.width, "constant or varying")->check(CLI::IsMember({"constant", "varying"}));
    sub->add_option("--b-n", c.b_n, "Estimation bandwidth (overrides tuning)");
    sub->add_option("--d-n", c.d_n, "Residual bandwidth (overrides tuning)");
    sub->add_option("--m-n", c.m_n, "Bootstrap window (overrides tuning)");
    sub->add_option("--lrv-w", c.lrv_w, "Long-run variance block length");
    sub->add_option("--lrv-tau", c.lrv_tau, "Long-run variance smoothing bandwidth");
    sub->add_option("--seed", c.seed, "Bootstrap seed");
}

void add_input_flags(CLI::App* sub, RunConfig& c) {
    sub->add_option("-i,--input", c.input, "Series CSV")->required();
    sub->add_option("--header", c.header, "auto, present or absent")->check(CLI::IsMember({"auto", "present", "absent"}));
    sub->add_option("--t-lo", c.t_lo, "Lower end of the spatial domain");
    sub->add_option("--t-hi", c.t_hi, "Upper end of the spatial domain");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    c.threads = default_threads();
    std::string replay_report;

    CLI::App app{"Simultaneous confidence surfaces and bands for functional time series"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");

    std::vector<CLI::App*> subs;
    auto* surface = app.add_subcommand("surface", "Confidence surface over the interior grid");
    auto* band = app.add_subcommand("band", "Confidence band with u or t fixed");
    auto* tune = app.add_subcommand("tune", "Select d_n, b_n and m_n and write the criterion curves");
    auto* lrv = app.add_subcommand("lrv", "Long-run variance field at the design points");
    auto* simulate = app.add_subcommand("simulate", "Simulate a series from a benchmark model");
    auto* coverage = app.add_subcommand("coverage", "Monte-Carlo coverage experiment");
    auto* resample = app.add_subcommand("resample", "Interpolate irregular rows onto the uniform grid");
    auto* replay = app.add_subcommand("replay", "Re-run from a report and compare artifacts");

    for (CLI::App* s : {surface, band, tune, lrv, simulate, coverage, resample}) {
        s->add_option("-o,--output", c.output, "Output CSV")->required();
        s->add_option("--report", c.report, "Run report path (default: <output>.report)");
    }
    for (CLI::App* s : {surface, band, tune, lrv}) add_input_flags(s, c);
    for (CLI::App* s : {surface, band, tune, coverage}) add_estimation_flags(s, c);
    lrv->add_option("--lrv-w", c.lrv_w, "Block length");
    lrv->add_option("--lrv-tau", c.lrv_tau, "Smoothing bandwidth");

    for (CLI::App* s : {band, tune, coverage}) {
        s->add_option("--fix-u", c.fix_u, "Fixed rescaled time");
        s->add_option("--fix-t", c.fix_t, "Fixed spatial point");
    }
    tune->add_option("--target", c.target, "surface, fix-t or fix-u")->check(CLI::IsMember({"surface", "fix-t", "fix-u"}));

    for (CLI::App* s : {simulate, coverage}) {
        s->add_option("--model", c.model, "Benchmark model a, b, c or d");
        s->add_option("--n", c.n, "Number of observations");
        s->add_option("--p", c.p, "Grid points per observation");
    }
    simulate->add_option("--seed", c.seed, "Simulation seed");
    coverage->add_option("--runs", c.runs, "Monte-Carlo runs");
    coverage->add_option("--pipeline", c.pipeline, "surface-constant, surface-varying, band-t or band-u");
    coverage->add_flag("--long-run", c.long_run, "Full scale: 1000 runs with B = 1000");

    resample->add_option("-i,--input", c.input, "Rows of t,x pairs")->required();
    resample->add_option("--p", c.p, "Grid points")->required();
    resample->add_option("--t-lo", c.t_lo, "Lower end of the spatial domain");
    resample->add_option("--t-hi", c.t_hi, "Upper end of the spatial domain");

    replay->add_option("report", replay_report, "Run report")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (replay->parsed()) return run_replay(replay_report, c.threads);
        for (CLI::App* s : app.get_subcommands()) c.command = s->get_name();
        dispatch(c);
        return kExitOk;
    } catch (const lsfts::Error& e) {
        std::cerr << "lsfts: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "lsfts: internal error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
