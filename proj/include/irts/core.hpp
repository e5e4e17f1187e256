#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irts/calendar.hpp"
#include "irts/error.hpp"
#include "irts/io.hpp"

namespace irts {

/// One timestamped measurement. `aux` is aligned with the owning dataset's `aux_names`.
struct Observation {
    double timestamp = 0.0;
    double value = 0.0;
    std::vector<double> aux;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Observations of one entity, sorted by nondecreasing timestamp. Ties are allowed.
struct IrregularSeries {
    std::string entity_id;  // empty for the anonymous entity
    std::vector<Observation> observations;

    std::size_t size() const noexcept { return observations.size(); }
    bool empty() const noexcept { return observations.empty(); }

    std::vector<double> timestamps() const {
        std::vector<double> out;
        out.reserve(observations.size());
        for (const auto& o : observations) out.push_back(o.timestamp);
        return out;
    }

    std::vector<double> values() const {
        std::vector<double> out;
        out.reserve(observations.size());
        for (const auto& o : observations) out.push_back(o.value);
        return out;
    }

    friend bool operator==(const IrregularSeries&, const IrregularSeries&) = default;
};

/// Build a series from parallel timestamp/value arrays (sorted stably by time).
inline IrregularSeries make_series(const std::vector<double>& ts, const std::vector<double>& ys,
                                   std::string entity_id = {}) {
    if (ts.size() != ys.size()) throw DataError("timestamp/value length mismatch");
    IrregularSeries s;
    s.entity_id = std::move(entity_id);
    s.observations.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) s.observations.push_back({ts[i], ys[i], {}});
    std::stable_sort(s.observations.begin(), s.observations.end(),
                     [](const Observation& a, const Observation& b) { return a.timestamp < b.timestamp; });
    return s;
}

enum class TimestampFormat { numeric, iso8601 };

/// Column mapping for CSV ingestion.
struct ColumnSpec {
    std::string timestamp;
    std::string value;
    std::optional<std::string> entity;
    TimestampFormat timestamp_format = TimestampFormat::numeric;
    std::vector<std::string> date_columns;  // aux columns holding ISO-8601 text
    std::vector<std::string> drop_columns;
    char separator = ',';
};

struct EntityDataset {
    std::map<std::string, IrregularSeries> entities;
    std::string timestamp_column;
    std::string value_column;
    std::optional<std::string> entity_column;
    std::vector<std::string> aux_names;
    std::vector<std::string> warnings;

    std::size_t observation_count() const {
        std::size_t n = 0;
        for (const auto& [id, s] : entities) n += s.size();
        return n;
    }

    bool same_data(const EntityDataset& o) const {
        return entities == o.entities && aux_names == o.aux_names &&
               timestamp_column == o.timestamp_column && value_column == o.value_column &&
               entity_column == o.entity_column;
    }
};

inline TimestampFormat parse_timestamp_format(std::string_view s) {
    if (s == "numeric") return TimestampFormat::numeric;
    if (s == "iso8601") return TimestampFormat::iso8601;
    throw ConfigError("unknown timestamp format '" + std::string(s) + "' (numeric|iso8601)");
}

/// Parse CSV text (header row + records) into per-entity series.
inline EntityDataset parse_csv(std::string_view text, const ColumnSpec& spec) {
    if (spec.timestamp.empty() || spec.value.empty())
        throw ConfigError("column spec must name a timestamp and a value column");

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    std::size_t header_idx = 0;
    while (header_idx < lines.size() && io::trim(lines[header_idx]).empty()) ++header_idx;
    if (header_idx == lines.size()) throw DataError("empty CSV input");

    const auto header = io::split_csv_line(lines[header_idx], spec.separator);
    auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (io::trim(header[i]) == name) return i;
        return std::nullopt;
    };
    auto require = [&](const std::string& name, const char* role) {
        auto c = column_of(name);
        if (!c) throw ConfigError(std::string("missing required ") + role + " column '" + name + "'");
        return *c;
    };

    const std::size_t ts_col = require(spec.timestamp, "timestamp");
    const std::size_t val_col = require(spec.value, "value");
    std::optional<std::size_t> ent_col;
    if (spec.entity && !spec.entity->empty()) ent_col = require(*spec.entity, "entity");
    for (const auto& d : spec.drop_columns) require(d, "drop");
    for (const auto& d : spec.date_columns) require(d, "date");

    EntityDataset ds;
    ds.timestamp_column = spec.timestamp;
    ds.value_column = spec.value;
    if (ent_col) ds.entity_column = spec.entity;

    std::vector<std::size_t> aux_cols;
    std::vector<bool> aux_is_date;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name(io::trim(header[i]));
        if (i == ts_col || i == val_col || (ent_col && i == *ent_col)) continue;
        if (std::find(spec.drop_columns.begin(), spec.drop_columns.end(), name) !=
            spec.drop_columns.end())
            continue;
        aux_cols.push_back(i);
        aux_is_date.push_back(std::find(spec.date_columns.begin(), spec.date_columns.end(), name) !=
                              spec.date_columns.end());
        ds.aux_names.push_back(name);
    }

    auto parse_time = [&](std::string_view field, std::size_t line) {
        field = io::trim(field);
        std::optional<double> t;
        if (spec.timestamp_format == TimestampFormat::iso8601) {
            t = parse_iso8601(field);
        } else {
            t = io::parse_number(field);
        }
        if (!t || !std::isfinite(*t))
            throw ParseError(line, "unparseable timestamp '" + std::string(field) + "'");
        return *t;
    };

    std::size_t rows = 0;
    for (std::size_t li = header_idx + 1; li < lines.size(); ++li) {
        if (io::trim(lines[li]).empty()) continue;
        const std::size_t line_no = li + 1;
        const auto fields = io::split_csv_line(lines[li], spec.separator);
        if (fields.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
        Observation obs;
        obs.timestamp = parse_time(fields[ts_col], line_no);
        auto v = io::parse_number(fields[val_col]);
        if (!v) throw ParseError(line_no, "unparseable value '" + fields[val_col] + "'");
        obs.value = *v;
        obs.aux.reserve(aux_cols.size());
        for (std::size_t a = 0; a < aux_cols.size(); ++a) {
            const auto& field = fields[aux_cols[a]];
            std::optional<double> x;
            if (aux_is_date[a]) {
                const auto trimmed = io::trim(field);
                x = trimmed.empty() ? std::optional<double>(std::nan("")) : parse_iso8601(trimmed);
            } else {
                x = io::parse_number(field);
            }
            if (!x)
                throw ParseError(line_no, "unparseable value '" + field + "' in column '" +
                                              ds.aux_names[a] + "'");
            obs.aux.push_back(*x);
        }
        std::string id = ent_col ? std::string(io::trim(fields[*ent_col])) : std::string();
        auto& series = ds.entities[id];
        series.entity_id = id;
        series.observations.push_back(std::move(obs));
        ++rows;
    }
    if (rows == 0) throw DataError("CSV input has a header but no data rows");

    for (auto& [id, s] : ds.entities)
        std::stable_sort(s.observations.begin(), s.observations.end(),
                         [](const Observation& a, const Observation& b) { return a.timestamp < b.timestamp; });
    return ds;
}

inline EntityDataset load_csv(const std::filesystem::path& path, const ColumnSpec& spec) {
    if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
    return parse_csv(io::read_file(path), spec);
}

/// Serialize with numeric timestamps; parse_csv with numeric mode reads it back exactly.
inline std::string to_csv(const EntityDataset& ds) {
    std::string out;
    if (ds.entity_column) out += *ds.entity_column + ",";
    out += ds.timestamp_column + "," + ds.value_column;
    for (const auto& a : ds.aux_names) out += "," + a;
    out += "\n";
    for (const auto& [id, s] : ds.entities) {
        for (const auto& o : s.observations) {
            if (ds.entity_column) out += id + ",";
            out += io::format_number(o.timestamp) + "," + io::format_number(o.value);
            for (double x : o.aux) out += "," + io::format_number(x);
            out += "\n";
        }
    }
    return out;
}

/// Replace each named aux column by `<name>_year|_month|_day|_weekday|_hour`.
inline EntityDataset split_date_components(const EntityDataset& ds,
                                           const std::vector<std::string>& columns) {
    EntityDataset out = ds;
    for (const auto& name : columns) {
        if (name == ds.timestamp_column)
            throw ConfigError("the primary timestamp column '" + name + "' is never split");
        const auto it = std::find(out.aux_names.begin(), out.aux_names.end(), name);
        if (it == out.aux_names.end()) throw ConfigError("no aux column named '" + name + "'");
        const auto idx = static_cast<std::size_t>(it - out.aux_names.begin());

        static constexpr const char* parts[] = {"_year", "_month", "_day", "_weekday", "_hour"};
        std::vector<std::string> names(out.aux_names.begin(), out.aux_names.begin() + idx);
        for (const char* p : parts) names.push_back(name + p);
        names.insert(names.end(), out.aux_names.begin() + idx + 1, out.aux_names.end());
        out.aux_names = std::move(names);

        for (auto& [id, s] : out.entities) {
            for (auto& o : s.observations) {
                const double x = o.aux[idx];
                std::vector<double> comps(5, std::nan(""));
                if (std::isfinite(x)) {
                    const auto c = date_components(x);
                    comps = {double(c.year), double(c.month), double(c.day), double(c.weekday),
                             double(c.hour)};
                }
                o.aux.erase(o.aux.begin() + static_cast<std::ptrdiff_t>(idx));
                o.aux.insert(o.aux.begin() + static_cast<std::ptrdiff_t>(idx), comps.begin(), comps.end());
            }
        }
    }
    return out;
}

enum class MissingStrategy { drop_row, fill_zero, fill_mean };

inline MissingStrategy parse_missing_strategy(std::string_view s) {
    if (s == "drop_row") return MissingStrategy::drop_row;
    if (s == "fill_zero") return MissingStrategy::fill_zero;
    if (s == "fill_mean") return MissingStrategy::fill_mean;
    throw ConfigError("unknown missing-value strategy '" + std::string(s) +
                      "' (drop_row|fill_zero|fill_mean)");
}

/// Remove non-finite values from value/aux columns. Entities emptied by
/// `drop_row` are removed and noted in `warnings`.
inline EntityDataset impute_input_missing(const EntityDataset& ds, MissingStrategy strategy) {
    EntityDataset out = ds;
    const std::size_t width = ds.aux_names.size() + 1;
    for (auto it = out.entities.begin(); it != out.entities.end();) {
        auto& obs = it->second.observations;
        auto cell = [](Observation& o, std::size_t c) -> double& { return c == 0 ? o.value : o.aux[c - 1]; };

        if (strategy == MissingStrategy::drop_row) {
            std::erase_if(obs, [&](Observation& o) {
                for (std::size_t c = 0; c < width; ++c)
                    if (!std::isfinite(cell(o, c))) return true;
                return false;
            });
        } else {
            for (std::size_t c = 0; c < width; ++c) {
                double fill = 0.0;
                if (strategy == MissingStrategy::fill_mean) {
                    double sum = 0.0;
                    std::size_t n = 0;
                    for (auto& o : obs)
                        if (std::isfinite(cell(o, c))) {
                            sum += cell(o, c);
                            ++n;
                        }
                    fill = n ? sum / static_cast<double>(n) : 0.0;
                }
                for (auto& o : obs)
                    if (!std::isfinite(cell(o, c))) cell(o, c) = fill;
            }
        }

        if (obs.empty()) {
            out.warnings.push_back("entity '" + it->first + "' removed: no rows left after dropping missing values");
            it = out.entities.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

struct ValidationReport {
    std::size_t count = 0;
    std::size_t duplicate_timestamps = 0;
    double min_timestamp = 0.0;
    double max_timestamp = 0.0;
    bool monotonic = true;
};

inline ValidationReport validate(const IrregularSeries& s) {
    ValidationReport r;
    r.count = s.size();
    if (s.empty()) return r;
    r.min_timestamp = r.max_timestamp = s.observations.front().timestamp;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double prev = s.observations[i - 1].timestamp;
        const double cur = s.observations[i].timestamp;
        if (cur == prev) ++r.duplicate_timestamps;
        if (cur < prev) r.monotonic = false;
        r.min_timestamp = std::min(r.min_timestamp, cur);
        r.max_timestamp = std::max(r.max_timestamp, cur);
    }
    return r;
}

}  // namespace irts
