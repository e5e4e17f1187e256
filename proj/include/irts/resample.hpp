#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "irts/core.hpp"
#include "irts/error.hpp"

namespace irts {

enum class Aggregator { sum, mean };
enum class Imputer { zero, forward_fill };

inline Aggregator parse_aggregator(std::string_view s) {
    if (s == "sum") return Aggregator::sum;
    if (s == "mean") return Aggregator::mean;
    throw ConfigError("unknown aggregator '" + std::string(s) + "' (sum|mean)");
}

inline Imputer parse_imputer(std::string_view s) {
    if (s == "zero") return Imputer::zero;
    if (s == "forward_fill") return Imputer::forward_fill;
    throw ConfigError("unknown imputer '" + std::string(s) + "' (zero|forward_fill)");
}

struct ResampleConfig {
    double frequency = 1.0;
    Aggregator aggregator = Aggregator::sum;
    Imputer imputer = Imputer::zero;

    void check() const {
        if (!std::isfinite(frequency) || frequency <= 0.0)
            throw ConfigError("resampling frequency must be finite and > 0");
    }
};

/// Half-open range of source observation indices `[begin, end)`.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return begin == end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/**
 * Fixed-width bins over an irregular series.
 *
 * Bin `i` (0-based) covers `[origin + i*frequency, origin + (i+1)*frequency)`.
 * Because the source is time-sorted, every bin's members form a contiguous
 * index range; empty bins hold the position where members would be.
 */
struct RegularSeries {
    double origin = 0.0;
    double frequency = 1.0;
    std::vector<double> values;
    std::vector<bool> imputed;
    std::vector<IndexRange> bin_members;

    std::size_t size() const noexcept { return values.size(); }

    double bin_start(std::size_t i) const noexcept {
        return origin + static_cast<double>(i) * frequency;
    }

    std::vector<double> bin_timestamps() const {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = bin_start(i);
        return out;
    }
};

namespace detail {

/// Bin of `t` consistent with `bin_start`: `bin_start(i) <= t < bin_start(i+1)`.
inline std::size_t locate_bin(double origin, double f, double t) {
    auto start = [&](double i) { return origin + i * f; };
    double i = std::floor((t - origin) / f);
    if (i < 0) i = 0;
    while (i > 0 && t < start(i)) i -= 1;
    while (t >= start(i + 1)) i += 1;
    return static_cast<std::size_t>(i);
}

}  // namespace detail

/// 0-based index of the bin containing `t`.
inline std::size_t bin_index(const RegularSeries& reg, double t) {
    if (!(t >= reg.origin)) throw std::out_of_range("timestamp precedes the series origin");
    return detail::locate_bin(reg.origin, reg.frequency, t);
}

/// Aggregate `series` into bins of width `cfg.frequency` anchored at its first timestamp.
inline RegularSeries resample(const IrregularSeries& series, const ResampleConfig& cfg) {
    cfg.check();
    if (series.empty()) throw DataError("cannot resample an empty series");

    const auto& obs = series.observations;
    RegularSeries reg;
    reg.origin = obs.front().timestamp;
    reg.frequency = cfg.frequency;
    const std::size_t k = detail::locate_bin(reg.origin, cfg.frequency, obs.back().timestamp) + 1;
    reg.values.assign(k, 0.0);
    reg.imputed.assign(k, true);
    reg.bin_members.assign(k, {});

    std::size_t cursor = 0;
    for (std::size_t b = 0; b < k; ++b) {
        const double end = reg.bin_start(b + 1);
        const std::size_t first = cursor;
        double sum = 0.0;
        while (cursor < obs.size() && (b + 1 == k || obs[cursor].timestamp < end)) {
            sum += obs[cursor].value;
            ++cursor;
        }
        reg.bin_members[b] = {first, cursor};
        const std::size_t n = cursor - first;
        if (n > 0) {
            reg.imputed[b] = false;
            reg.values[b] = cfg.aggregator == Aggregator::sum ? sum : sum / static_cast<double>(n);
        } else if (cfg.imputer == Imputer::forward_fill && b > 0) {
            reg.values[b] = reg.values[b - 1];
        }
    }
    return reg;
}

}  // namespace irts
