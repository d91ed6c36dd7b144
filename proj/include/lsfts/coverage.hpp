#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "lsfts/bands.hpp"
#include "lsfts/bootstrap.hpp"
#include "lsfts/parallel.hpp"
#include "lsfts/simgen.hpp"
#include "lsfts/tuning.hpp"

namespace lsfts::sim {

using ConfidenceObject = std::variant<ConfidenceSurface, ConfidenceBand>;
using TruthFunction = std::function<double(double u, double t)>;

/// True iff lower <= m <= upper at every cell of the surface grid.
inline bool contains_truth(const ConfidenceSurface& s, const TruthFunction& truth) {
    for (std::size_t a = 0; a < s.grid.u_size(); ++a) {
        for (std::size_t c = 0; c < s.grid.t_size(); ++c) {
            const double m = truth(s.grid.u_values[a], s.t_values[c]);
            const auto i = static_cast<Index>(a), j = static_cast<Index>(c);
            if (!(s.lower(i, j) <= m && m <= s.upper(i, j))) return false;
        }
    }
    return true;
}

inline bool contains_truth(const ConfidenceBand& b, const TruthFunction& truth) {
    for (std::size_t a = 0; a < b.points.size(); ++a) {
        const double m = b.axis == FixedAxis::T ? truth(b.points[a], b.fixed_value) : truth(b.fixed_value, b.points[a]);
        const auto i = static_cast<Index>(a);
        if (!(b.lower(i) <= m && m <= b.upper(i))) return false;
    }
    return true;
}

inline bool contains_truth(const ConfidenceObject& obj, const TruthFunction& truth) {
    return std::visit([&](const auto& o) { return contains_truth(o, truth); }, obj);
}

inline const TuningRecord& tuning_of(const ConfidenceObject& obj) {
    return std::visit([](const auto& o) -> const TuningRecord& { return o.tuning; }, obj);
}

/// Builds the confidence object for one simulated series; the seed is for the bootstrap.
using PipelineFn = std::function<ConfidenceObject(const FunctionalSeries&, std::uint64_t bootstrap_seed)>;

enum class Pipeline { SurfaceConstant, SurfaceVarying, BandFixedT, BandFixedU };

inline Pipeline parse_pipeline(const std::string& s) {
    if (s == "surface-constant") return Pipeline::SurfaceConstant;
    if (s == "surface-varying") return Pipeline::SurfaceVarying;
    if (s == "band-t") return Pipeline::BandFixedT;
    if (s == "band-u") return Pipeline::BandFixedU;
    throw ParameterError("unknown pipeline '" + s + "' (surface-constant, surface-varying, band-t, band-u)");
}

inline const char* to_string(Pipeline p) {
    switch (p) {
        case Pipeline::SurfaceConstant: return "surface-constant";
        case Pipeline::SurfaceVarying: return "surface-varying";
        case Pipeline::BandFixedT: return "band-t";
        case Pipeline::BandFixedU: return "band-u";
    }
    return "?";
}

/// Column whose grid value t_k = (k+1)/p is nearest to t (lower column on ties).
inline Index nearest_column(Index p, double t) {
    Index best = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < p; ++k) {
        const double d = std::abs(static_cast<double>(k + 1) / static_cast<double>(p) - t);
        if (d < gap - 1e-12) {
            gap = d;
            best = k;
        }
    }
    return best;
}

struct PipelineConfig {
    Pipeline pipeline = Pipeline::SurfaceConstant;
    double alpha = 0.05;
    int B = 500;
    double fixed_t = 0.5;
    double fixed_u = 0.5;
    TuneOverrides overrides;
};

/// Tune, then build the configured confidence object on the interior theory grid.
inline PipelineFn standard_pipeline(const PipelineConfig& cfg) {
    return [cfg](const FunctionalSeries& series, std::uint64_t seed) -> ConfidenceObject {
        TuneTarget target;
        if (cfg.pipeline == Pipeline::BandFixedT) {
            target.kind = TuneTarget::Kind::FixedT;
            target.t_index = nearest_column(series.p(), cfg.fixed_t);
        } else if (cfg.pipeline == Pipeline::BandFixedU) {
            target.kind = TuneTarget::Kind::FixedU;
            target.u = cfg.fixed_u;
        }
        const AutoTuneResult tuned = auto_tune(series, target, cfg.overrides);
        BootstrapConfig bc;
        bc.b_n = tuned.b_n;
        bc.d_n = tuned.d_n;
        bc.m_n = tuned.m_n;
        bc.alpha = cfg.alpha;
        bc.B = cfg.B;
        bc.seed = seed;
        bc.threads = 1;
        switch (cfg.pipeline) {
            case Pipeline::SurfaceConstant:
                return surface_constant(series, bc, EvalGrid::theory(series.n(), series.p(), bc.b_n));
            case Pipeline::SurfaceVarying:
                return surface_varying(series, bc, tuned.lrv, EvalGrid::theory(series.n(), series.p(), bc.b_n));
            case Pipeline::BandFixedT:
                return band_fixed_t(series, target.t_index, bc, WidthMode::Constant);
            case Pipeline::BandFixedU:
                return band_fixed_u(series, cfg.fixed_u, bc, WidthMode::Constant);
        }
        throw ParameterError("unknown pipeline");
    };
}

struct RunRecord {
    Index run = 0;
    std::uint64_t series_seed = 0;
    std::uint64_t bootstrap_seed = 0;
    bool hit = false;
    TuningRecord tuning;
};

struct CoverageReport {
    Index runs = 0;
    Index hits = 0;
    double coverage = 0.0;
    double standard_error = 0.0;  // sqrt(c (1 - c) / runs)
    std::vector<RunRecord> per_run;
};

/// Monte-Carlo coverage: run r simulates with seed derive_seed(master, 2r),
/// bootstraps with derive_seed(master, 2r + 1), and scores a hit iff the true
/// mean lies inside the envelope at every grid point. Runs execute on up to
/// `threads` workers; the report does not depend on the worker count.
inline CoverageReport coverage_experiment(const ModelSpec& base, Index runs, const PipelineFn& pipeline,
                                          unsigned threads = 1) {
    if (runs < 20) throw ParameterError("coverage experiment needs at least 20 runs");
    base.validate();
    CoverageReport report;
    report.runs = runs;
    report.per_run.resize(static_cast<std::size_t>(runs));
    const Model model = base.model;
    const TruthFunction truth = [model](double u, double t) { return true_mean(model, u, t); };
    parallel_for(static_cast<std::size_t>(runs), threads, [&](std::size_t r) {
        RunRecord rec;
        rec.run = static_cast<Index>(r);
        rec.series_seed = derive_seed(base.seed, 2 * r);
        rec.bootstrap_seed = derive_seed(base.seed, 2 * r + 1);
        ModelSpec spec = base;
        spec.seed = rec.series_seed;
        try {
            const ConfidenceObject obj = pipeline(simulate_model(spec), rec.bootstrap_seed);
            rec.hit = contains_truth(obj, truth);
            rec.tuning = tuning_of(obj);
        } catch (const Error& e) {
            throw Error(e.kind(), "coverage run " + std::to_string(r) + ": " + e.what());
        }
        report.per_run[r] = rec;
    });
    for (const auto& rec : report.per_run) report.hits += rec.hit ? 1 : 0;
    report.coverage = static_cast<double>(report.hits) / static_cast<double>(runs);
    report.standard_error = std::sqrt(report.coverage * (1.0 - report.coverage) / static_cast<double>(runs));
    return report;
}

}  // namespace lsfts::sim
