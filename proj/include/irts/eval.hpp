#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "irts/io.hpp"
#include "irts/learners.hpp"
#include "irts/parallel.hpp"
#include "irts/pipeline.hpp"

namespace irts {

inline void check_metric_inputs(const Vector& pred, const Vector& actual, Eigen::Index min_len) {
    if (pred.size() != actual.size()) throw DataError("prediction and target lengths differ");
    if (actual.size() < min_len) throw DataError("too few values for the metric");
}

/// Mean absolute error.
inline double mae(const Vector& pred, const Vector& actual) {
    check_metric_inputs(pred, actual, 1);
    return (pred - actual).cwiseAbs().mean();
}

/// Coefficient of determination, 1 - SS_res / SS_tot. Nullopt when `actual` is constant.
inline std::optional<double> r2(const Vector& pred, const Vector& actual) {
    check_metric_inputs(pred, actual, 2);
    const double m = actual.mean();
    const double ss_tot = (actual.array() - m).square().sum();
    if (!(ss_tot > 0.0)) return std::nullopt;
    const double ss_res = (pred - actual).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

/// 64-bit FNV-1a, stable across platforms.
inline std::uint64_t fingerprint(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct SweepGrid {
    std::vector<double> frequencies;  // in units of `frequency_unit`
    std::vector<LearnerSpec> learners;
    std::vector<Variant> variants;
};

struct SweepCell {
    double frequency = 0.0;
    std::size_t lag = 0;
    std::string learner;
    Variant variant = Variant::baseline;
    double mae = std::nan("");
    std::optional<double> r2;
    std::size_t n_test = 0;
    std::size_t entities_used = 0;
    std::size_t entities_discarded = 0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

struct SweepReport {
    std::vector<SweepCell> cells;
    std::string config_fingerprint;
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;

    const SweepCell* find(double f, std::string_view learner, Variant v) const {
        for (const auto& c : cells)
            if (c.frequency == f && c.learner == learner && c.variant == v) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

inline std::string describe(const PipelineConfig& cfg, const SweepGrid& grid) {
    std::string d = "holdout=" + io::format_number(cfg.holdout) +
                    ";aggregator=" + std::to_string(static_cast<int>(cfg.resample.aggregator)) +
                    ";imputer=" + std::to_string(static_cast<int>(cfg.resample.imputer)) +
                    ";unit=" + io::format_number(cfg.frequency_unit) +
                    ";mov_avg=" + std::to_string(cfg.features.mov_avg_window) +
                    ";bins=" + std::to_string(cfg.features.entropy_bins) +
                    ";reg_mod_lambda=" + io::format_number(cfg.features.reg_mod_lambda) + ";features=";
    for (auto f : cfg.features.enabled) d += std::string(feature_name(f)) + " ";
    d += ";lags=";
    for (const auto& r : cfg.lags.rules)
        d += io::format_number(r.from) + ":" + io::format_number(r.to) + ":" + std::to_string(r.lag) + " ";
    d += ";frequencies=";
    for (double f : grid.frequencies) d += io::format_number(f) + " ";
    d += ";learners=";
    for (const auto& l : grid.learners)
        d += to_string(l.kind) + "/" + io::format_number(l.lasso_lambda) + "/" + std::to_string(l.forest.n_trees) +
             "/" + io::format_number(l.forest.max_features) + "/" + std::to_string(l.forest.seed) + " ";
    d += ";variants=";
    for (auto v : grid.variants) d += to_string(v) + " ";
    return d;
}

}  // namespace detail

/**
 * Evaluate every (frequency, learner, variant) combination with the holdout protocol.
 *
 * Frequencies are processed in parallel over `jobs` workers; each
 * frequency computes the feature table once and derives every variant from
 * it. A cell that cannot be evaluated carries the reason in `status`.
 */
inline SweepReport run_sweep(const EntityDataset& ds, const PipelineConfig& base, const SweepGrid& grid,
                             const ExternalFeatures* external = nullptr, std::size_t jobs = 1) {
    if (grid.frequencies.empty()) throw ConfigError("sweep grid has no frequencies");
    if (grid.learners.empty() || grid.variants.empty()) throw ConfigError("sweep grid needs learners and variants");
    base.lags.check();
    for (double f : grid.frequencies) {
        if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("sweep frequencies must be > 0");
        base.lags.lag_for(f);
    }
    if (std::find(grid.variants.begin(), grid.variants.end(), Variant::merged) != grid.variants.end() && !external)
        throw ConfigError("the merged variant needs an external feature bundle");

    const std::size_t per_freq = grid.learners.size() * grid.variants.size();
    SweepReport report;
    report.cells.resize(grid.frequencies.size() * per_freq);
    report.dataset_fingerprint = hex(fingerprint(to_csv(ds)));
    report.config_fingerprint = hex(fingerprint(detail::describe(base, grid)));
    report.seed = grid.learners.front().forest.seed;

    parallel_for(grid.frequencies.size(), jobs, [&](std::size_t fi) {
        PipelineConfig cfg = base;
        cfg.jobs = 1;
        cfg.resample.frequency = grid.frequencies[fi] * base.frequency_unit;
        const bool needs_catalog = std::any_of(grid.variants.begin(), grid.variants.end(),
                                               [](Variant v) { return v != Variant::baseline; });
        cfg.variant = needs_catalog ? Variant::autofits : Variant::baseline;

        SweepCell proto;
        proto.frequency = grid.frequencies[fi];
        proto.lag = cfg.lag();
        auto fail_all = [&](const std::string& why) {
            for (std::size_t li = 0; li < grid.learners.size(); ++li)
                for (std::size_t vi = 0; vi < grid.variants.size(); ++vi) {
                    auto& c = report.cells[fi * per_freq + li * grid.variants.size() + vi];
                    c = proto;
                    c.learner = to_string(grid.learners[li].kind);
                    c.variant = grid.variants[vi];
                    c.status = "failed: " + detail::one_line(why);
                }
        };

        FeatureDataset table;
        SplitDataset split;
        try {
            table = build_feature_dataset(ds, cfg);
            proto.entities_used = table.entities_used.size();
            proto.entities_discarded = table.entities_discarded.size();
            if (table.rows.empty()) return fail_all("all entities discarded");
            split = holdout_split(table.rows, cfg.holdout);
            if (split.test.empty()) return fail_all("no test rows");
            proto.n_test = split.test.size();
        } catch (const Error& e) {
            return fail_all(e.what());
        }

        for (std::size_t li = 0; li < grid.learners.size(); ++li) {
            for (std::size_t vi = 0; vi < grid.variants.size(); ++vi) {
                auto& c = report.cells[fi * per_freq + li * grid.variants.size() + vi];
                c = proto;
                c.learner = to_string(grid.learners[li].kind);
                c.variant = grid.variants[vi];
                try {
                    const auto tr = assemble_variant(split.train, table.lag, table.feature_names, c.variant, external);
                    const auto te = assemble_variant(split.test, table.lag, table.feature_names, c.variant, external);
                    const auto model = fit(grid.learners[li], tr.X, tr.y);
                    const Vector pred = predict(model, te.X);
                    c.mae = mae(pred, te.y);
                    c.r2 = te.y.size() >= 2 ? r2(pred, te.y) : std::nullopt;
                } catch (const Error& e) {
                    c.status = "failed: " + detail::one_line(e.what());
                }
            }
        }
    });
    return report;
}

/// Report CSV. Metadata goes on leading `#` lines; everything else is the body.
inline std::string report_csv(const SweepReport& r) {
    std::string out = "# config_fingerprint=" + r.config_fingerprint + "\n# dataset_fingerprint=" +
                      r.dataset_fingerprint + "\n# seed=" + std::to_string(r.seed) + "\n";
    out += "frequency,lag,learner,variant,mae,r2,n_test,entities_used,entities_discarded,status\n";
    for (const auto& c : r.cells) {
        out += io::format_number(c.frequency) + "," + std::to_string(c.lag) + "," + c.learner + "," +
               to_string(c.variant) + "," + (c.ok() ? io::format_number(c.mae) : "NA") + "," +
               (c.ok() && c.r2 ? io::format_number(*c.r2) : "NA") + "," + std::to_string(c.n_test) + "," +
               std::to_string(c.entities_used) + "," + std::to_string(c.entities_discarded) + "," + c.status + "\n";
    }
    return out;
}

/// Lines of a report CSV after the metadata block.
inline std::string report_body(std::string_view csv) {
    std::string out;
    std::size_t at = 0;
    while (at < csv.size()) {
        auto e = csv.find('\n', at);
        if (e == std::string_view::npos) e = csv.size();
        const auto line = csv.substr(at, e - at);
        if (line.empty() || line.front() != '#') {
            out.append(line);
            out.push_back('\n');
        }
        at = e + 1;
    }
    return out;
}

struct WinTable {
    /// Winners for one (frequency, learner) contest; ties list every tied variant.
    struct Contest {
        double frequency = 0.0;
        std::string learner;
        std::vector<Variant> mae_winners;
        std::vector<Variant> r2_winners;
    };
    /// Aggregate credit per (learner, metric, variant); a t-way tie credits 1/t each.
    struct Total {
        std::string learner;
        std::string metric;
        Variant variant = Variant::baseline;
        double wins = 0.0;
        std::size_t contests = 0;

        double rate() const { return contests ? wins / static_cast<double>(contests) : 0.0; }
    };
    std::vector<Contest> contests;
    std::vector<Total> totals;

    const Total* total(std::string_view learner, std::string_view metric, Variant v) const {
        for (const auto& t : totals)
            if (t.learner == learner && t.metric == metric && t.variant == v) return &t;
        return nullptr;
    }
};

inline WinTable summarize_wins(const SweepReport& report) {
    std::map<std::pair<std::string, double>, std::vector<const SweepCell*>> groups;
    std::vector<std::pair<std::string, double>> order;
    std::map<std::string, std::vector<Variant>> variants_of;
    for (const auto& c : report.cells) {
        const auto key = std::make_pair(c.learner, c.frequency);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&c);
        auto& vs = variants_of[c.learner];
        if (std::find(vs.begin(), vs.end(), c.variant) == vs.end()) vs.push_back(c.variant);
    }

    WinTable table;
    std::map<std::tuple<std::string, std::string, Variant>, WinTable::Total> totals;
    for (const auto& [learner, vs] : variants_of)
        for (const char* metric : {"mae", "r2"})
            for (auto v : vs) totals[{learner, metric, v}] = {learner, metric, v, 0.0, 0};

    auto credit = [&](const std::string& learner, const char* metric, const std::vector<Variant>& winners) {
        for (auto v : variants_of[learner]) totals[{learner, metric, v}].contests++;
        for (auto v : winners) totals[{learner, metric, v}].wins += 1.0 / static_cast<double>(winners.size());
    };

    for (const auto& key : order) {
        const auto& cells = groups[key];
        WinTable::Contest contest{key.second, key.first, {}, {}};

        double best_mae = std::numeric_limits<double>::infinity();
        for (const auto* c : cells)
            if (c->ok()) best_mae = std::min(best_mae, c->mae);
        for (const auto* c : cells)
            if (c->ok() && c->mae == best_mae) contest.mae_winners.push_back(c->variant);

        double best_r2 = -std::numeric_limits<double>::infinity();
        for (const auto* c : cells)
            if (c->ok() && c->r2) best_r2 = std::max(best_r2, *c->r2);
        for (const auto* c : cells)
            if (c->ok() && c->r2 && *c->r2 == best_r2) contest.r2_winners.push_back(c->variant);

        if (!contest.mae_winners.empty()) credit(key.first, "mae", contest.mae_winners);
        if (!contest.r2_winners.empty()) credit(key.first, "r2", contest.r2_winners);
        table.contests.push_back(std::move(contest));
    }
    for (auto& [k, t] : totals) table.totals.push_back(t);
    return table;
}

inline std::string wins_csv(const WinTable& w) {
    std::string out = "scope,frequency,learner,metric,variant,wins,contests,win_rate\n";
    for (const auto& c : w.contests) {
        for (const auto& [metric, winners] : {std::pair{"mae", &c.mae_winners}, std::pair{"r2", &c.r2_winners}}) {
            for (auto v : *winners) {
                const double share = 1.0 / static_cast<double>(winners->size());
                out += "frequency," + io::format_number(c.frequency) + "," + c.learner + "," + metric + "," +
                       to_string(v) + "," + io::format_number(share) + ",1," + io::format_number(share) + "\n";
            }
        }
    }
    for (const auto& t : w.totals)
        out += "total,," + t.learner + "," + t.metric + "," + to_string(t.variant) + "," + io::format_number(t.wins) +
               "," + std::to_string(t.contests) + "," + io::format_number(t.rate()) + "\n";
    return out;
}

}  // namespace irts
