#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "irts/config.hpp"
#include "irts/core.hpp"
#include "irts/eval.hpp"
#include "irts/io.hpp"
#include "irts/pipeline.hpp"

namespace irts::cli {

enum ExitCode : int { ok = 0, config_error = 1, data_error = 2, all_cells_failed = 3 };

/// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::filesystem::path> output;
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<Variant> variant;
    std::optional<std::filesystem::path> external_features;
};

inline void apply(RunConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.apply_seed(*o.seed);
    if (o.external_features) cfg.external_features = *o.external_features;
    if (o.variant) cfg.apply_variant(*o.variant);
    cfg.pipeline.jobs = resolve_jobs(o.jobs.value_or(0));
}

/// Load, split date columns and impute, as configured.
inline EntityDataset prepare_dataset(const RunConfig& cfg) {
    auto ds = load_csv(cfg.data_path, cfg.columns);
    ds = split_date_components(ds, cfg.split_dates);
    return impute_input_missing(ds, cfg.missing);
}

inline std::optional<ExternalFeatures> load_external(const RunConfig& cfg) {
    if (!cfg.external_features) return std::nullopt;
    return load_external_features(*cfg.external_features);
}

inline std::filesystem::path require_output(const std::optional<std::filesystem::path>& configured,
                                            const Overrides& o, const char* what) {
    if (o.output) return *o.output;
    if (configured) return *configured;
    throw ConfigError(std::string("no output path for ") + what + " (use --output or [output])");
}

/// Append external columns to every row (merged variant).
inline void attach_external(FeatureDataset& table, const ExternalFeatures& ext) {
    const auto lag_free = table.feature_names;
    Design probe = assemble_variant(table.rows, table.lag, lag_free, Variant::merged, &ext);
    const auto offset = static_cast<Eigen::Index>(table.lag + lag_free.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        for (Eigen::Index c = offset; c < probe.X.cols(); ++c)
            table.rows[i].features.push_back(probe.X(static_cast<Eigen::Index>(i), c));
    table.feature_names.insert(table.feature_names.end(), ext.names.begin(), ext.names.end());
}

inline int extract(RunConfig cfg, const Overrides& o, std::ostream& out) {
    apply(cfg, o);
    cfg.check();
    const auto path = require_output(cfg.features_out, o, "the feature matrix");
    const auto ext = load_external(cfg);
    const auto ds = prepare_dataset(cfg);
    auto table = build_feature_dataset(ds, cfg.pipeline);
    if (cfg.pipeline.variant == Variant::merged) attach_external(table, *ext);
    io::write_atomic(path, feature_matrix_csv(table));
    for (const auto& w : ds.warnings) out << "warning: " << w << "\n";
    out << "rows=" << table.rows.size() << " entities=" << table.entities_used.size()
        << " discarded=" << table.entities_discarded.size() << " lag=" << table.lag << " -> " << path.string()
        << "\n";
    return ok;
}

inline int forecast(RunConfig cfg, const Overrides& o, std::ostream& out) {
    apply(cfg, o);
    cfg.check();
    const auto path = require_output(cfg.forecast_out, o, "the forecast");
    const auto ext = load_external(cfg);
    const auto ds = prepare_dataset(cfg);
    const auto result = forecast_dataset(ds, cfg.pipeline, ext ? &*ext : nullptr);

    const bool calendar = cfg.columns.timestamp_format == TimestampFormat::iso8601;
    std::string csv = "entity_id,target_time,prediction\n";
    for (const auto& f : result.forecasts)
        csv += f.entity_id + "," + (calendar ? format_iso8601(f.target_time) : io::format_number(f.target_time)) +
               "," + io::format_number(f.prediction) + "\n";
    io::write_atomic(path, csv);
    out << "forecasts=" << result.forecasts.size() << " discarded=" << result.entities_discarded.size() << " -> "
        << path.string() << "\n";
    return ok;
}

inline std::filesystem::path wins_path_for(const std::filesystem::path& report) {
    auto p = report;
    p.replace_filename(report.stem().string() + "_wins" + report.extension().string());
    return p;
}

inline int sweep(RunConfig cfg, const Overrides& o, std::ostream& out) {
    apply(cfg, o);
    cfg.check();
    const auto report_path = require_output(cfg.report_out, o, "the sweep report");
    const auto wins_path = o.output || !cfg.wins_out ? wins_path_for(report_path) : *cfg.wins_out;
    const auto ext = load_external(cfg);
    const auto ds = prepare_dataset(cfg);

    const auto report = run_sweep(ds, cfg.pipeline, cfg.grid, ext ? &*ext : nullptr, cfg.pipeline.jobs);
    const auto wins = summarize_wins(report);
    io::write_atomic(report_path, report_csv(report));
    io::write_atomic(wins_path, wins_csv(wins));

    std::size_t good = 0;
    for (const auto& c : report.cells) good += c.ok();
    out << "cells=" << report.cells.size() << " ok=" << good << " -> " << report_path.string() << ", "
        << wins_path.string() << "\n";
    for (const auto& t : wins.totals)
        if (t.metric == "mae")
            out << "  " << t.learner << " " << to_string(t.variant) << ": lowest MAE in "
                << io::format_number(t.wins) << "/" << t.contests << "\n";
    return good == 0 ? all_cells_failed : ok;
}

inline int validate_data(RunConfig cfg, const Overrides& o, std::ostream& out) {
    apply(cfg, o);
    cfg.check();
    const auto ds = load_csv(cfg.data_path, cfg.columns);
    std::string csv = "entity_id,count,duplicate_timestamps,min_timestamp,max_timestamp,monotonic\n";
    for (const auto& [id, s] : ds.entities) {
        const auto r = validate(s);
        csv += id + "," + std::to_string(r.count) + "," + std::to_string(r.duplicate_timestamps) + "," +
               io::format_number(r.min_timestamp) + "," + io::format_number(r.max_timestamp) + "," +
               (r.monotonic ? "true" : "false") + "\n";
    }
    if (o.output) {
        io::write_atomic(*o.output, csv);
        out << "entities=" << ds.entities.size() << " -> " << o.output->string() << "\n";
    } else {
        out << csv;
    }
    return ok;
}

}  // namespace irts::cli
