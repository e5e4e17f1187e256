#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "irts/core.hpp"
#include "irts/embed.hpp"
#include "irts/features.hpp"
#include "irts/learners.hpp"
#include "irts/parallel.hpp"
#include "irts/resample.hpp"

namespace irts {

enum class Variant { baseline, autofits, merged };

inline Variant parse_variant(std::string_view s) {
    if (s == "baseline") return Variant::baseline;
    if (s == "autofits") return Variant::autofits;
    if (s == "merged") return Variant::merged;
    throw ConfigError("unknown variant '" + std::string(s) + "' (baseline|autofits|merged)");
}

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::autofits: return "autofits";
        case Variant::merged: return "merged";
    }
    return "";
}

/// Maps a frequency to a lag size: rule `{from, to, lag}` applies when `from <= f < to`.
struct LagSchedule {
    struct Rule {
        double from = 0.0;
        double to = std::numeric_limits<double>::infinity();
        std::size_t lag = 1;
    };
    std::vector<Rule> rules;

    static LagSchedule fixed(std::size_t lag) { return {{{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), lag}}}; }

    std::size_t lag_for(double f) const {
        for (const auto& r : rules)
            if (f >= r.from && f < r.to) return r.lag;
        throw ConfigError("lag schedule does not cover frequency " + io::format_number(f));
    }

    void check() const {
        if (rules.empty()) throw ConfigError("lag schedule is empty");
        auto sorted = rules;
        std::sort(sorted.begin(), sorted.end(), [](const Rule& a, const Rule& b) { return a.from < b.from; });
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i].lag < 1) throw ConfigError("lag sizes must be >= 1");
            if (!(sorted[i].from < sorted[i].to)) throw ConfigError("lag schedule range is empty");
            if (i > 0 && sorted[i].from < sorted[i - 1].to) throw ConfigError("lag schedule ranges overlap");
        }
    }
};

struct PipelineConfig {
    ResampleConfig resample;
    LagSchedule lags = LagSchedule::fixed(7);
    FeatureConfig features;
    Variant variant = Variant::autofits;
    LearnerSpec learner;
    double holdout = 0.10;
    std::size_t jobs = 1;
    /// Domain time units per configured frequency unit (86400 for days over epoch seconds).
    double frequency_unit = 1.0;

    std::size_t lag() const { return lags.lag_for(resample.frequency / frequency_unit); }

    /// The catalog actually computed: empty for the baseline variant.
    FeatureConfig effective_features() const {
        return variant == Variant::baseline ? FeatureConfig::none() : features;
    }

    void check() const {
        resample.check();
        lags.check();
        features.check();
        if (!(frequency_unit > 0.0)) throw ConfigError("frequency unit must be > 0");
        if (!(holdout > 0.0 && holdout < 1.0)) throw ConfigError("holdout fraction must be in (0, 1)");
    }
};

struct EntityResult {
    std::string entity_id;
    std::vector<FeatureRow> rows;
    bool discarded = false;
    std::string reason;
};

/// Resample, embed and featurize one entity. Entities without a complete embedding row are discarded.
inline EntityResult run_entity(const IrregularSeries& series, const PipelineConfig& cfg) {
    EntityResult r;
    r.entity_id = series.entity_id;
    const auto reg = resample(series, cfg.resample);
    const auto emb = build_embedding(reg, cfg.lag());
    if (emb.empty()) {
        r.discarded = true;
        r.reason = "insufficient observations: " + std::to_string(reg.size()) + " bins for lag " +
                   std::to_string(cfg.lag());
        return r;
    }
    r.rows = compute_feature_matrix(emb, series, cfg.effective_features()).rows;
    return r;
}

/// Rows of every entity merged in one table, ordered by (entity_id, target_time).
struct FeatureDataset {
    std::size_t lag = 0;
    std::vector<std::string> feature_names;
    std::vector<FeatureRow> rows;
    std::vector<std::string> entities_used;
    std::vector<std::string> entities_discarded;
};

inline FeatureDataset merge_entities(const std::map<std::string, EntityResult>& results) {
    FeatureDataset out;
    for (const auto& [id, r] : results) {
        if (r.discarded) {
            out.entities_discarded.push_back(id);
            continue;
        }
        out.entities_used.push_back(id);
        out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
        if (a.entity_id != b.entity_id) return a.entity_id < b.entity_id;
        return a.target_time < b.target_time;
    });
    return out;
}

/// Run every entity (in parallel across `cfg.jobs`) and merge.
inline FeatureDataset build_feature_dataset(const EntityDataset& ds, const PipelineConfig& cfg) {
    cfg.check();
    std::vector<const IrregularSeries*> series;
    for (const auto& [id, s] : ds.entities) series.push_back(&s);
    std::vector<EntityResult> results(series.size());
    parallel_for(series.size(), cfg.jobs, [&](std::size_t i) { results[i] = run_entity(*series[i], cfg); });

    std::map<std::string, EntityResult> keyed;
    for (auto& r : results) keyed.emplace(r.entity_id, std::move(r));
    auto out = merge_entities(keyed);
    out.lag = cfg.lag();
    out.feature_names = feature_names(cfg.effective_features());
    return out;
}

struct SplitDataset {
    struct EntitySplit {
        std::string entity_id;
        std::size_t n_train = 0;
        std::size_t n_test = 0;
    };
    std::vector<FeatureRow> train;
    std::vector<FeatureRow> test;
    std::vector<EntitySplit> entities;
};

/// Test-set size for an entity with `n` rows: ceil(fraction * n), keeping at least one training row.
inline std::size_t holdout_size(std::size_t n, double fraction) {
    if (n <= 1) return 0;
    const auto t = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(t, 1, n - 1);
}

/// Per entity, the latest `holdout_size` rows become the test set.
inline SplitDataset holdout_split(const std::vector<FeatureRow>& rows, double fraction) {
    if (rows.empty()) throw DataError("cannot split an empty feature table");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must be in (0, 1)");
    SplitDataset out;
    std::size_t start = 0;
    while (start < rows.size()) {
        std::size_t end = start + 1;
        while (end < rows.size() && rows[end].entity_id == rows[start].entity_id) {
            if (rows[end].target_time < rows[end - 1].target_time)
                throw DataError("feature rows are not time-ordered within entity '" + rows[start].entity_id + "'");
            ++end;
        }
        if (!out.entities.empty() && out.entities.back().entity_id >= rows[start].entity_id)
            throw DataError("feature rows are not grouped by entity");
        const std::size_t n = end - start;
        const std::size_t n_test = holdout_size(n, fraction);
        const std::size_t cut = end - n_test;
        out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(start),
                         rows.begin() + static_cast<std::ptrdiff_t>(cut));
        out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(cut),
                        rows.begin() + static_cast<std::ptrdiff_t>(end));
        out.entities.push_back({rows[start].entity_id, n - n_test, n_test});
        start = end;
    }
    return out;
}

/// Externally computed feature columns keyed by (entity_id, target_time).
struct ExternalFeatures {
    std::vector<std::string> names;
    std::map<std::pair<std::string, double>, std::vector<double>> values;
};

/// Read `entity_id,target_time,<feature...>`.
inline ExternalFeatures parse_external_features(std::string_view text) {
    ExternalFeatures ext;
    std::vector<std::string_view> lines;
    std::size_t at = 0;
    while (at <= text.size()) {
        auto e = text.find('\n', at);
        if (e == std::string_view::npos) e = text.size();
        if (!io::trim(text.substr(at, e - at)).empty()) lines.push_back(text.substr(at, e - at));
        at = e + 1;
    }
    if (lines.empty()) throw DataError("external feature file is empty");
    const auto header = io::split_csv_line(lines[0]);
    if (header.size() < 2 || io::trim(header[0]) != "entity_id" || io::trim(header[1]) != "target_time")
        throw DataError("external feature file must start with columns entity_id,target_time");
    for (std::size_t i = 2; i < header.size(); ++i) ext.names.emplace_back(io::trim(header[i]));
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = io::split_csv_line(lines[li]);
        if (f.size() != header.size()) throw ParseError(li + 1, "wrong field count in external features");
        const auto t = io::parse_number(f[1]);
        if (!t || !std::isfinite(*t)) throw ParseError(li + 1, "unparseable target_time '" + f[1] + "'");
        std::vector<double> vals;
        for (std::size_t i = 2; i < f.size(); ++i) {
            const auto v = io::parse_number(f[i]);
            if (!v) throw ParseError(li + 1, "unparseable value '" + f[i] + "'");
            vals.push_back(std::isfinite(*v) ? *v : 0.0);
        }
        ext.values[{std::string(io::trim(f[0])), *t}] = std::move(vals);
    }
    return ext;
}

inline ExternalFeatures load_external_features(const std::filesystem::path& path) {
    return parse_external_features(io::read_file(path));
}

struct Design {
    Matrix X;
    Vector y;
    std::vector<std::string> columns;
};

inline std::vector<std::string> lag_column_names(std::size_t lag) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= lag; ++j) out.push_back("lag_" + std::to_string(j));
    return out;
}

/**
 * Design matrix for a variant: lags only (baseline), lags plus the catalog
 * (autofits), or that plus the external columns (merged). Timestamps never
 * enter the matrix.
 */
inline Design assemble_variant(const std::vector<FeatureRow>& rows, std::size_t lag,
                               const std::vector<std::string>& feature_names, Variant variant,
                               const ExternalFeatures* external = nullptr) {
    if (variant == Variant::merged && external == nullptr)
        throw ConfigError("the merged variant needs an external feature bundle");
    Design d;
    d.columns = lag_column_names(lag);
    const bool with_catalog = variant != Variant::baseline;
    if (with_catalog) d.columns.insert(d.columns.end(), feature_names.begin(), feature_names.end());
    if (variant == Variant::merged) d.columns.insert(d.columns.end(), external->names.begin(), external->names.end());

    std::vector<std::string> missing;
    const auto n = static_cast<Eigen::Index>(rows.size());
    d.X.resize(n, static_cast<Eigen::Index>(d.columns.size()));
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (r.lags.size() != lag) throw DataError("feature row has the wrong number of lags");
        Eigen::Index c = 0;
        for (double v : r.lags) d.X(i, c++) = v;
        if (with_catalog) {
            if (r.features.size() != feature_names.size()) throw DataError("feature row does not match the catalog");
            for (double v : r.features) d.X(i, c++) = v;
        }
        if (variant == Variant::merged) {
            const auto it = external->values.find({r.entity_id, r.target_time});
            if (it == external->values.end()) {
                missing.push_back(r.entity_id + "@" + io::format_number(r.target_time));
                continue;
            }
            for (double v : it->second) d.X(i, c++) = v;
        }
        d.y(i) = r.target;
    }
    if (!missing.empty()) {
        std::string msg = "external features missing for " + std::to_string(missing.size()) + " rows:";
        for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 10); ++k) msg += " " + missing[k];
        if (missing.size() > 10) msg += " ...";
        throw DataError(msg);
    }
    return d;
}

struct Forecast {
    std::string entity_id;
    double target_time = 0.0;
    double prediction = 0.0;
};

struct ForecastResult {
    std::vector<Forecast> forecasts;
    std::vector<std::string> entities_discarded;
};

/**
 * Train one model on the rows of every retained entity, then predict for each
 * entity the bin that follows its last one, from the feature row over its
 * final `lag` bins.
 */
inline ForecastResult forecast_dataset(const EntityDataset& ds, const PipelineConfig& cfg,
                                       const ExternalFeatures* external = nullptr) {
    const auto table = build_feature_dataset(ds, cfg);
    ForecastResult out;
    out.entities_discarded = table.entities_discarded;
    if (table.rows.empty()) throw DataError("insufficient observations: every entity was discarded");

    const auto train = assemble_variant(table.rows, table.lag, table.feature_names, cfg.variant, external);
    const auto model = fit(cfg.learner, train.X, train.y);

    std::vector<FeatureRow> query;
    for (const auto& id : table.entities_used) {
        const auto& series = ds.entities.at(id);
        const auto reg = resample(series, cfg.resample);
        auto row = compute_feature_row(forecast_row(reg, table.lag), series, cfg.effective_features());
        row.target = 0.0;
        query.push_back(std::move(row));
    }
    const auto design = assemble_variant(query, table.lag, table.feature_names, cfg.variant, external);
    const Vector pred = predict(model, design.X);
    for (std::size_t i = 0; i < query.size(); ++i)
        out.forecasts.push_back({query[i].entity_id, query[i].target_time, pred(static_cast<Eigen::Index>(i))});
    return out;
}

/// Single-series forecast of the value of the bin after the last one.
inline Forecast forecast_next(const IrregularSeries& series, const PipelineConfig& cfg,
                              const ExternalFeatures* external = nullptr) {
    EntityDataset ds;
    ds.entities.emplace(series.entity_id, series);
    const auto r = forecast_dataset(ds, cfg, external);
    return r.forecasts.front();
}

/// Feature-matrix CSV: entity_id, window_start, window_end, target_time, lag_1..lag_l, features, target.
inline std::string feature_matrix_csv(const FeatureDataset& table) {
    std::string out = "entity_id,window_start,window_end,target_time";
    for (const auto& c : lag_column_names(table.lag)) out += "," + c;
    for (const auto& c : table.feature_names) out += "," + c;
    out += ",target\n";
    for (const auto& r : table.rows) {
        out += r.entity_id + "," + io::format_number(r.window_start) + "," + io::format_number(r.window_end) +
               "," + io::format_number(r.target_time);
        for (double v : r.lags) out += "," + io::format_number(v);
        for (double v : r.features) out += "," + io::format_number(v);
        out += "," + io::format_number(r.target) + "\n";
    }
    return out;
}

}  // namespace irts
