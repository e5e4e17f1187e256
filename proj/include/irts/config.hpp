#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "irts/core.hpp"
#include "irts/eval.hpp"
#include "irts/io.hpp"
#include "irts/pipeline.hpp"

namespace irts {

/// Everything a CLI command needs, parsed from an INI-style file.
struct RunConfig {
    std::filesystem::path data_path;
    ColumnSpec columns;
    std::vector<std::string> split_dates;
    MissingStrategy missing = MissingStrategy::drop_row;
    std::optional<std::filesystem::path> external_features;

    PipelineConfig pipeline;
    SweepGrid grid;
    std::uint64_t seed = 42;

    std::optional<std::filesystem::path> features_out;
    std::optional<std::filesystem::path> forecast_out;
    std::optional<std::filesystem::path> report_out;
    std::optional<std::filesystem::path> wins_out;

    /// Propagate the seed to every stochastic component.
    void apply_seed(std::uint64_t s) {
        seed = s;
        pipeline.learner.forest.seed = s;
        for (auto& l : grid.learners) l.forest.seed = s;
    }

    void apply_variant(Variant v) {
        pipeline.variant = v;
        if (v == Variant::merged &&
            std::find(grid.variants.begin(), grid.variants.end(), Variant::merged) == grid.variants.end())
            grid.variants.push_back(Variant::merged);
    }

    /// Range checks plus input-path existence; called before any data is read.
    void check() const {
        pipeline.check();
        if (data_path.empty()) throw ConfigError("[data] path is required");
        if (!std::filesystem::exists(data_path)) throw ConfigError("data file not found: " + data_path.string());
        if (external_features && !std::filesystem::exists(*external_features))
            throw ConfigError("external feature file not found: " + external_features->string());
        if (pipeline.variant == Variant::merged && !external_features)
            throw ConfigError("variant 'merged' needs external features (--external-features)");
        for (auto v : grid.variants)
            if (v == Variant::merged && !external_features)
                throw ConfigError("sweep variant 'merged' needs external features");
        for (double f : grid.frequencies) {
            if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("sweep frequencies must be > 0");
            pipeline.lags.lag_for(f);
        }
        for (const auto& l : grid.learners) {
            if (!(l.lasso_lambda >= 0.0)) throw ConfigError("lasso_lambda must be >= 0");
            if (l.forest.n_trees < 1) throw ConfigError("forest_trees must be >= 1");
            if (!(l.forest.max_features > 0.0 && l.forest.max_features <= 1.0))
                throw ConfigError("forest_max_features must be in (0, 1]");
        }
    }
};

namespace detail {

/// Drop a `; ...` or `# ...` comment that starts the value or follows whitespace.
inline std::string_view strip_inline_comment(std::string_view v) {
    v = io::trim(v);
    if (!v.empty() && (v.front() == ';' || v.front() == '#')) return {};
    for (std::size_t i = 1; i < v.size(); ++i)
        if ((v[i] == ';' || v[i] == '#') && (v[i - 1] == ' ' || v[i - 1] == '\t')) return v.substr(0, i);
    return v;
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    std::size_t at = 0;
    while (at <= s.size()) {
        auto e = s.find(sep, at);
        if (e == std::string_view::npos) e = s.size();
        const auto item = io::trim(s.substr(at, e - at));
        if (!item.empty()) out.emplace_back(item);
        at = e + 1;
    }
    return out;
}

inline double to_number(const std::string& key, std::string_view text) {
    const auto v = io::parse_number(text);
    if (!v || std::isnan(*v)) throw ConfigError("'" + key + "' is not a number: '" + std::string(text) + "'");
    return *v;
}

inline std::size_t to_count(const std::string& key, std::string_view text) {
    const double v = to_number(key, text);
    if (v < 0 || v != std::floor(v)) throw ConfigError("'" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline double frequency_unit_seconds(std::string_view unit) {
    static const std::map<std::string_view, double> units = {
        {"raw", 1.0}, {"second", 1.0}, {"minute", 60.0}, {"hour", 3600.0}, {"day", 86400.0}, {"week", 604800.0}};
    if (auto it = units.find(unit); it != units.end()) return it->second;
    return to_number("resample.frequency_unit", unit);
}

/// `start:stop:step` (inclusive) or a comma-separated list.
inline std::vector<double> parse_frequency_grid(std::string_view text) {
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split_list(text, ':');
        if (parts.size() != 3) throw ConfigError("frequency range must be start:stop:step");
        const double a = to_number("sweep.frequencies", parts[0]);
        const double b = to_number("sweep.frequencies", parts[1]);
        const double step = to_number("sweep.frequencies", parts[2]);
        if (!(step > 0.0) || b < a) throw ConfigError("invalid frequency range");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    } else {
        for (const auto& item : split_list(text)) out.push_back(to_number("sweep.frequencies", item));
    }
    if (out.empty()) throw ConfigError("empty frequency grid");
    return out;
}

/// `from-to:lag` rules separated by commas; an empty bound is unbounded.
inline LagSchedule parse_lag_schedule(std::string_view text) {
    LagSchedule s;
    for (const auto& rule : split_list(text)) {
        const auto colon = rule.find(':');
        const auto dash = rule.find('-', 1);
        if (colon == std::string::npos || dash == std::string::npos || dash > colon)
            throw ConfigError("lag schedule rule must be from-to:lag, got '" + rule + "'");
        LagSchedule::Rule r;
        const auto from = io::trim(std::string_view(rule).substr(0, dash));
        const auto to = io::trim(std::string_view(rule).substr(dash + 1, colon - dash - 1));
        r.from = from.empty() ? -std::numeric_limits<double>::infinity() : to_number("embedding.lag_schedule", from);
        r.to = to.empty() ? std::numeric_limits<double>::infinity() : to_number("embedding.lag_schedule", to);
        r.lag = to_count("embedding.lag_schedule", std::string_view(rule).substr(colon + 1));
        s.rules.push_back(r);
    }
    s.check();
    return s;
}

}  // namespace detail

/// Parse config text; relative paths are resolved against `base_dir`.
inline RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> known = {
        {"data", {"path", "entity", "timestamp", "value", "timestamp_format", "date_columns", "split_dates",
                  "drop_columns", "missing", "external_features"}},
        {"resample", {"frequency", "frequency_unit", "aggregator", "imputer"}},
        {"embedding", {"lag", "lag_schedule"}},
        {"features", {"mov_avg_window", "entropy_bins", "reg_mod_lambda", "enabled"}},
        {"model", {"learner", "variant", "lasso_lambda", "forest_trees", "forest_max_features", "holdout", "seed"}},
        {"sweep", {"frequencies", "learners", "variants"}},
        {"output", {"features", "forecast", "report", "wins"}},
    };
    for (const auto& [section, body] : tree) {
        const auto it = known.find(section);
        if (it == known.end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("unknown config key " + section + "." + key);
    }

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(key)) {
            const auto t = io::trim(detail::strip_inline_comment(*v));
            if (!t.empty()) return std::string(t);
        }
        return std::nullopt;
    };
    auto path_of = [&](const std::string& key) -> std::optional<std::filesystem::path> {
        if (auto v = get(key)) {
            std::filesystem::path p(*v);
            return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        }
        return std::nullopt;
    };

    RunConfig c;
    if (auto p = path_of("data.path")) c.data_path = *p;
    c.columns.timestamp = get("data.timestamp").value_or("");
    c.columns.value = get("data.value").value_or("");
    if (c.columns.timestamp.empty() || c.columns.value.empty())
        throw ConfigError("[data] timestamp and value column names are required");
    c.columns.entity = get("data.entity");
    if (auto v = get("data.timestamp_format")) c.columns.timestamp_format = parse_timestamp_format(*v);
    if (auto v = get("data.date_columns")) c.columns.date_columns = detail::split_list(*v);
    if (auto v = get("data.drop_columns")) c.columns.drop_columns = detail::split_list(*v);
    if (auto v = get("data.split_dates")) c.split_dates = detail::split_list(*v);
    if (auto v = get("data.missing")) c.missing = parse_missing_strategy(*v);
    c.external_features = path_of("data.external_features");

    auto& p = c.pipeline;
    if (auto v = get("resample.frequency_unit")) p.frequency_unit = detail::frequency_unit_seconds(*v);
    if (auto v = get("resample.frequency")) p.resample.frequency = detail::to_number("resample.frequency", *v) * p.frequency_unit;
    else p.resample.frequency = p.frequency_unit;
    if (auto v = get("resample.aggregator")) p.resample.aggregator = parse_aggregator(*v);
    if (auto v = get("resample.imputer")) p.resample.imputer = parse_imputer(*v);

    const auto lag = get("embedding.lag");
    const auto schedule = get("embedding.lag_schedule");
    if (lag && schedule) throw ConfigError("set either embedding.lag or embedding.lag_schedule, not both");
    if (lag) p.lags = LagSchedule::fixed(detail::to_count("embedding.lag", *lag));
    if (schedule) p.lags = detail::parse_lag_schedule(*schedule);

    if (auto v = get("features.mov_avg_window")) p.features.mov_avg_window = detail::to_count("features.mov_avg_window", *v);
    if (auto v = get("features.entropy_bins")) p.features.entropy_bins = detail::to_count("features.entropy_bins", *v);
    if (auto v = get("features.reg_mod_lambda")) p.features.reg_mod_lambda = detail::to_number("features.reg_mod_lambda", *v);
    if (auto v = get("features.enabled"); v && *v != "all") {
        p.features.enabled.clear();
        if (*v != "none")
            for (const auto& name : detail::split_list(*v)) p.features.enabled.push_back(parse_feature(name));
    }

    if (auto v = get("model.learner")) p.learner.kind = parse_learner(*v);
    if (auto v = get("model.variant")) p.variant = parse_variant(*v);
    if (auto v = get("model.lasso_lambda")) p.learner.lasso_lambda = detail::to_number("model.lasso_lambda", *v);
    if (auto v = get("model.forest_trees"))
        p.learner.forest.n_trees = static_cast<int>(detail::to_count("model.forest_trees", *v));
    if (auto v = get("model.forest_max_features"))
        p.learner.forest.max_features = detail::to_number("model.forest_max_features", *v);
    if (auto v = get("model.holdout")) p.holdout = detail::to_number("model.holdout", *v);

    if (auto v = get("sweep.frequencies")) c.grid.frequencies = detail::parse_frequency_grid(*v);
    else c.grid.frequencies = {p.resample.frequency / p.frequency_unit};
    std::vector<LearnerKind> kinds{p.learner.kind};
    if (auto v = get("sweep.learners")) {
        kinds.clear();
        for (const auto& k : detail::split_list(*v)) kinds.push_back(parse_learner(k));
    }
    for (auto k : kinds) {
        LearnerSpec spec = p.learner;
        spec.kind = k;
        c.grid.learners.push_back(spec);
    }
    if (auto v = get("sweep.variants")) {
        for (const auto& name : detail::split_list(*v)) c.grid.variants.push_back(parse_variant(name));
    } else {
        c.grid.variants = {Variant::baseline, Variant::autofits};
    }

    const auto seed = get("model.seed");
    c.apply_seed(seed ? detail::to_count("model.seed", *seed) : 42);

    c.features_out = path_of("output.features");
    c.forecast_out = path_of("output.forecast");
    c.report_out = path_of("output.report");
    c.wins_out = path_of("output.wins");
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(text, path.parent_path());
}

}  // namespace irts
