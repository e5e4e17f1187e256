#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irts/core.hpp"
#include "irts/embed.hpp"
#include "irts/error.hpp"
#include "irts/linear.hpp"
#include "irts/parallel.hpp"

namespace irts {

// ---------------------------------------------------------------------------
// Statistics on plain sequences
// ---------------------------------------------------------------------------

namespace stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population variance (divides by n).
inline double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size());
}

/// Quantile with linear interpolation between order statistics of sorted `x`.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double range(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

}  // namespace stats

// ---------------------------------------------------------------------------
// Individual features
// ---------------------------------------------------------------------------

/// Coefficient of variation: population std / mean. 0 for fewer than two
/// values or a mean within 1e-12 of zero.
inline double rel_disp(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = stats::mean(x);
    if (std::abs(m) < 1e-12) return 0.0;
    return std::sqrt(stats::variance(x)) / m;
}

inline void check_same_length(std::span<const double> ts, std::span<const double> ys) {
    if (ts.size() != ys.size()) throw Error("timestamp and value sequences differ in length");
}

/// Mean of `ts[j] * ys[j]`.
inline double t_y_avg_mul(std::span<const double> ts, std::span<const double> ys) {
    check_same_length(ts, ys);
    if (ts.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < ts.size(); ++j) s += ts[j] * ys[j];
    return s / static_cast<double>(ts.size());
}

/// Mean over consecutive pairs of `(t[j+1]-t[j]) * (y[j+1]-y[j])`.
inline double t_y_avg_dif_mul(std::span<const double> ts, std::span<const double> ys) {
    check_same_length(ts, ys);
    if (ts.size() < 2) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < ts.size(); ++j) s += (ts[j + 1] - ts[j]) * (ys[j + 1] - ys[j]);
    return s / static_cast<double>(ts.size() - 1);
}

/// Area of the bounding box of the (t, y) points.
inline double space_area_2d(std::span<const double> ts, std::span<const double> ys) {
    check_same_length(ts, ys);
    if (ts.size() < 2) return 0.0;
    return stats::range(ts) * stats::range(ys);
}

inline double missing_t_count(const EmbeddingRow& row) {
    return static_cast<double>(std::count(row.lag_imputed.begin(), row.lag_imputed.end(), true));
}

/// Summary of consecutive time differences, in catalog column order.
struct TimeDiffStats {
    double mean = 0, std = 0, var = 0, sum = 0, median = 0, iqr = 0, min = 0, max = 0, rel_disp = 0;

    std::array<double, 9> as_array() const { return {mean, std, var, sum, median, iqr, min, max, rel_disp}; }
};

inline constexpr std::array<std::string_view, 9> time_diff_stat_names = {
    "mean", "std", "var", "sum", "median", "iqr", "min", "max", "rel_disp"};

inline TimeDiffStats t_dif_stats(std::span<const double> ts) {
    TimeDiffStats s;
    if (ts.size() < 2) return s;
    std::vector<double> d(ts.size() - 1);
    for (std::size_t j = 0; j + 1 < ts.size(); ++j) d[j] = ts[j + 1] - ts[j];
    s.mean = stats::mean(d);
    s.var = stats::variance(d);
    s.std = std::sqrt(s.var);
    s.sum = std::accumulate(d.begin(), d.end(), 0.0);
    s.rel_disp = rel_disp(d);
    std::sort(d.begin(), d.end());
    s.min = d.front();
    s.max = d.back();
    s.median = stats::quantile_sorted(d, 0.5);
    s.iqr = stats::quantile_sorted(d, 0.75) - stats::quantile_sorted(d, 0.25);
    return s;
}

/// (newest - oldest, (newest - oldest) / f).
inline std::pair<double, double> min_max_t_dif(std::span<const double> ts, double f) {
    if (!(f > 0.0)) throw ConfigError("frequency must be > 0");
    const double span = stats::range(ts);
    return {span, span / f};
}

/// Per-bin counts of an equal-width histogram over `[min x, max x]`; the max lands in the last bin.
inline std::vector<std::size_t> histogram_counts(std::span<const double> x, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    if (x.empty() || bins == 0) return counts;
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, width = *hi_it - *lo_it;
    if (!(width > 0.0)) {
        counts[0] = x.size();
        return counts;
    }
    for (double v : x) {
        auto b = static_cast<std::size_t>((v - lo) / width * static_cast<double>(bins));
        counts[std::min(b, bins - 1)]++;
    }
    return counts;
}

/// Shannon entropy (natural log) of the equal-width histogram of `x`.
inline double entropy(std::span<const double> x, std::size_t bins) {
    if (bins < 2) throw ConfigError("entropy needs at least 2 bins");
    if (x.size() < 2 || stats::range(x) == 0.0) return 0.0;
    const auto counts = histogram_counts(x, bins);
    const double n = static_cast<double>(x.size());
    double h = 0.0;
    for (auto c : counts)
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
    return h;
}

/// Mean of the last `min(w, lags.size())` values.
inline double mov_avg(std::span<const double> lags, std::size_t w) {
    if (w == 0) throw ConfigError("moving-average window must be >= 1");
    if (lags.empty()) return 0.0;
    const std::size_t m = std::min(w, lags.size());
    return stats::mean(lags.subspan(lags.size() - m));
}

/// Prediction and errors of one in-window regression model.
struct RegModResult {
    double prediction = 0.0;
    double error = 0.0;      // actual - prediction
    double abs_error = 0.0;
};

struct RegModFeatures {
    RegModResult ols;
    RegModResult lasso;
};

/**
 * Fit value-on-timestamp with OLS and LASSO over the first `l-1` lags and
 * score the prediction of the last lag.
 *
 * With fewer than two training points (or a failed fit) the prediction is
 * the mean of the training lags; with no training lags at all every output is 0.
 */
inline RegModFeatures reg_mod_features(std::span<const double> lag_ts, std::span<const double> lags,
                                       double lambda) {
    check_same_length(lag_ts, lags);
    RegModFeatures out;
    if (lags.size() < 2) return out;
    const std::size_t n_train = lags.size() - 1;
    const double actual = lags.back();
    auto finish = [&](double pred) {
        return RegModResult{pred, actual - pred, std::abs(actual - pred)};
    };

    const double fallback = stats::mean(lags.first(n_train));
    if (n_train < 2) {
        out.ols = out.lasso = finish(fallback);
        return out;
    }
    Matrix X(static_cast<Eigen::Index>(n_train), 1);
    Vector y(static_cast<Eigen::Index>(n_train));
    for (std::size_t j = 0; j < n_train; ++j) {
        X(static_cast<Eigen::Index>(j), 0) = lag_ts[j];
        y(static_cast<Eigen::Index>(j)) = lags[j];
    }
    Matrix query(1, 1);
    query(0, 0) = lag_ts.back();

    auto predict_with = [&](const LinearModel& m) {
        const double p = m.predict(query)(0);
        return std::isfinite(p) ? p : fallback;
    };
    try {
        out.ols = finish(predict_with(ols_fit(X, y)));
        out.lasso = finish(predict_with(lasso_fit(X, y, lambda)));
    } catch (const Error&) {
        out.ols = out.lasso = finish(fallback);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Catalog entries, in column order.
enum class Feature {
    rel_disp_t,
    t_y_avg_mul,
    t_y_avg_dif_mul,
    space_area_2d,
    missing_t_count,
    t_dif_stats,
    min_max_t_dif,
    min_max_t_dif_f,
    entropy_t,
    entropy_y,
    rel_disp_y,
    mov_avg,
    reg_mod,
};

inline constexpr std::array<Feature, 13> all_features = {
    Feature::rel_disp_t,    Feature::t_y_avg_mul,   Feature::t_y_avg_dif_mul, Feature::space_area_2d,
    Feature::missing_t_count, Feature::t_dif_stats, Feature::min_max_t_dif,   Feature::min_max_t_dif_f,
    Feature::entropy_t,     Feature::entropy_y,     Feature::rel_disp_y,      Feature::mov_avg,
    Feature::reg_mod};

/// Which data a feature is computed on.
enum class Source { original, resampled, both };

inline std::string_view feature_name(Feature f) {
    switch (f) {
        case Feature::rel_disp_t: return "rel_disp_t";
        case Feature::t_y_avg_mul: return "t_y_avg_mul";
        case Feature::t_y_avg_dif_mul: return "t_y_avg_dif_mul";
        case Feature::space_area_2d: return "2d_space_area";
        case Feature::missing_t_count: return "missing_t_count";
        case Feature::t_dif_stats: return "t_dif_stats";
        case Feature::min_max_t_dif: return "min_max_t_dif";
        case Feature::min_max_t_dif_f: return "min_max_t_dif_f";
        case Feature::entropy_t: return "entropy_t";
        case Feature::entropy_y: return "entropy_y";
        case Feature::rel_disp_y: return "rel_disp_y";
        case Feature::mov_avg: return "mov_avg";
        case Feature::reg_mod: return "reg_mod";
    }
    return "";
}

inline Feature parse_feature(std::string_view s) {
    for (auto f : all_features)
        if (feature_name(f) == s) return f;
    throw ConfigError("unknown feature '" + std::string(s) + "'");
}

inline Source feature_source(Feature f) {
    switch (f) {
        case Feature::missing_t_count:
        case Feature::mov_avg:
        case Feature::reg_mod: return Source::resampled;
        case Feature::t_dif_stats:
        case Feature::min_max_t_dif:
        case Feature::min_max_t_dif_f:
        case Feature::entropy_t: return Source::original;
        default: return Source::both;
    }
}

struct FeatureConfig {
    std::size_t mov_avg_window = 3;
    std::size_t entropy_bins = 10;
    double reg_mod_lambda = 0.1;
    std::vector<Feature> enabled{all_features.begin(), all_features.end()};

    static FeatureConfig none() {
        FeatureConfig c;
        c.enabled.clear();
        return c;
    }

    bool is_enabled(Feature f) const { return std::find(enabled.begin(), enabled.end(), f) != enabled.end(); }

    void check() const {
        if (mov_avg_window < 1) throw ConfigError("mov_avg_window must be >= 1");
        if (entropy_bins < 2) throw ConfigError("entropy_bins must be >= 2");
        if (!(reg_mod_lambda >= 0.0)) throw ConfigError("reg_mod_lambda must be >= 0");
    }
};

namespace detail {

inline std::vector<std::string> columns_of(Feature f) {
    const std::string base(feature_name(f));
    std::vector<std::string> suffixes;
    switch (feature_source(f)) {
        case Source::both: suffixes = {"_orig", "_res"}; break;
        case Source::original: suffixes = {"_orig"}; break;
        case Source::resampled: suffixes = {"_res"}; break;
    }
    std::vector<std::string> out;
    for (const auto& s : suffixes) {
        if (f == Feature::t_dif_stats) {
            for (auto stat : time_diff_stat_names) out.push_back(base + s + "_" + std::string(stat));
        } else if (f == Feature::reg_mod) {
            for (const char* model : {"ols", "lasso"})
                for (const char* stat : {"prediction", "error", "abs_error"})
                    out.push_back(base + s + "_" + model + "_" + stat);
        } else {
            out.push_back(base + s);
        }
    }
    return out;
}

}  // namespace detail

/// Catalog columns produced under `cfg` (lags and target excluded).
inline std::vector<std::string> feature_names(const FeatureConfig& cfg) {
    std::vector<std::string> out;
    for (auto f : all_features)
        if (cfg.is_enabled(f)) {
            auto cols = detail::columns_of(f);
            out.insert(out.end(), cols.begin(), cols.end());
        }
    return out;
}

/// One embedding row with its catalog values; `features` aligns with `feature_names`.
struct FeatureRow {
    std::string entity_id;
    double window_start = 0.0;
    double window_end = 0.0;
    double target_time = 0.0;
    std::vector<double> lags;
    std::vector<double> features;
    double target = 0.0;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureMatrix {
    std::size_t lag = 0;
    std::vector<std::string> feature_names;
    std::vector<FeatureRow> rows;
};

inline FeatureRow compute_feature_row(const EmbeddingRow& row, const IrregularSeries& src,
                                      const FeatureConfig& cfg) {
    const auto window = window_observations(row, src);
    std::vector<double> tw, yw;
    tw.reserve(window.size());
    yw.reserve(window.size());
    for (const auto& o : window) {
        tw.push_back(o.timestamp);
        yw.push_back(o.value);
    }
    const std::span<const double> tl(row.lag_timestamps), yl(row.lags);

    FeatureRow out;
    out.entity_id = src.entity_id;
    out.window_start = row.window_start;
    out.window_end = row.window_end;
    out.target_time = row.target_time;
    out.lags = row.lags;
    out.target = row.target;
    auto& v = out.features;

    auto both = [&](auto&& fn) {
        v.push_back(fn(std::span<const double>(tw), std::span<const double>(yw)));
        v.push_back(fn(tl, yl));
    };

    for (auto f : all_features) {
        if (!cfg.is_enabled(f)) continue;
        switch (f) {
            case Feature::rel_disp_t: both([](auto t, auto) { return rel_disp(t); }); break;
            case Feature::t_y_avg_mul: both([](auto t, auto y) { return t_y_avg_mul(t, y); }); break;
            case Feature::t_y_avg_dif_mul: both([](auto t, auto y) { return t_y_avg_dif_mul(t, y); }); break;
            case Feature::space_area_2d: both([](auto t, auto y) { return space_area_2d(t, y); }); break;
            case Feature::missing_t_count: v.push_back(missing_t_count(row)); break;
            case Feature::t_dif_stats: {
                const auto s = t_dif_stats(tw).as_array();
                v.insert(v.end(), s.begin(), s.end());
                break;
            }
            case Feature::min_max_t_dif: v.push_back(min_max_t_dif(tw, row.frequency).first); break;
            case Feature::min_max_t_dif_f: v.push_back(min_max_t_dif(tw, row.frequency).second); break;
            case Feature::entropy_t: v.push_back(entropy(tw, cfg.entropy_bins)); break;
            case Feature::entropy_y: both([&](auto, auto y) { return entropy(y, cfg.entropy_bins); }); break;
            case Feature::rel_disp_y: both([](auto, auto y) { return rel_disp(y); }); break;
            case Feature::mov_avg: v.push_back(mov_avg(yl, cfg.mov_avg_window)); break;
            case Feature::reg_mod: {
                const auto r = reg_mod_features(tl, yl, cfg.reg_mod_lambda);
                for (const auto& m : {r.ols, r.lasso}) {
                    v.push_back(m.prediction);
                    v.push_back(m.error);
                    v.push_back(m.abs_error);
                }
                break;
            }
        }
    }
    for (auto& x : v)
        if (!std::isfinite(x)) x = 0.0;
    return out;
}

/// One feature row per embedding row, in row order regardless of `jobs`.
inline FeatureMatrix compute_feature_matrix(const EmbeddingMatrix& emb, const IrregularSeries& src,
                                            const FeatureConfig& cfg, std::size_t jobs = 1) {
    cfg.check();
    FeatureMatrix m;
    m.lag = emb.lag;
    m.feature_names = feature_names(cfg);
    m.rows.resize(emb.size());
    parallel_for(emb.size(), jobs, [&](std::size_t i) { m.rows[i] = compute_feature_row(emb.rows[i], src, cfg); });
    return m;
}

}  // namespace irts
