#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "irts/core.hpp"
#include "irts/error.hpp"
#include "irts/resample.hpp"

namespace irts {

/**
 * One time-delay embedding row: `lag` consecutive bin values and the next
 * bin's value as target.
 *
 * `window` is `[start of first lag bin, end of last lag bin)` and
 * `window_obs` indexes the source observations inside it.
 */
struct EmbeddingRow {
    std::size_t first_bin = 0;
    std::vector<double> lags;
    std::vector<double> lag_timestamps;
    std::vector<bool> lag_imputed;
    double target = 0.0;
    double target_time = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    double frequency = 1.0;
    IndexRange window_obs;
};

struct EmbeddingMatrix {
    std::size_t lag = 1;
    std::vector<EmbeddingRow> rows;
    bool insufficient = false;  // k <= lag: no complete row exists

    std::size_t size() const noexcept { return rows.size(); }
    bool empty() const noexcept { return rows.empty(); }
};

/// Row over bins `[first, first + lag)`; the target is bin `first + lag` when it exists, NaN otherwise.
inline EmbeddingRow make_embedding_row(const RegularSeries& reg, std::size_t first, std::size_t lag) {
    if (lag == 0) throw ConfigError("lag must be >= 1");
    if (first + lag > reg.size()) throw std::out_of_range("embedding row exceeds the series");
    EmbeddingRow row;
    row.first_bin = first;
    row.frequency = reg.frequency;
    row.lags.assign(reg.values.begin() + static_cast<std::ptrdiff_t>(first),
                    reg.values.begin() + static_cast<std::ptrdiff_t>(first + lag));
    row.lag_timestamps.resize(lag);
    row.lag_imputed.resize(lag);
    for (std::size_t j = 0; j < lag; ++j) {
        row.lag_timestamps[j] = reg.bin_start(first + j);
        row.lag_imputed[j] = reg.imputed[first + j];
    }
    row.target_time = reg.bin_start(first + lag);
    row.target = first + lag < reg.size() ? reg.values[first + lag] : std::nan("");
    row.window_start = reg.bin_start(first);
    row.window_end = reg.bin_start(first + lag);
    row.window_obs = {reg.bin_members[first].begin, reg.bin_members[first + lag - 1].end};
    return row;
}

/// All `k - lag` complete rows of the embedding of `reg`.
inline EmbeddingMatrix build_embedding(const RegularSeries& reg, std::size_t lag) {
    if (lag == 0) throw ConfigError("lag must be >= 1");
    EmbeddingMatrix m;
    m.lag = lag;
    if (reg.size() <= lag) {
        m.insufficient = true;
        return m;
    }
    m.rows.reserve(reg.size() - lag);
    for (std::size_t first = 0; first + lag < reg.size(); ++first)
        m.rows.push_back(make_embedding_row(reg, first, lag));
    return m;
}

/// Row over the final `lag` bins, for forecasting the bin after the last one. Requires k >= lag.
inline EmbeddingRow forecast_row(const RegularSeries& reg, std::size_t lag) {
    if (reg.size() < lag) throw DataError("insufficient observations");
    return make_embedding_row(reg, reg.size() - lag, lag);
}

/// Source observations inside the row's window, in time order.
inline std::span<const Observation> window_observations(const EmbeddingRow& row,
                                                        const IrregularSeries& src) {
    if (row.window_obs.end > src.size()) throw DataError("row does not belong to this series");
    return std::span<const Observation>(src.observations)
        .subspan(row.window_obs.begin, row.window_obs.size());
}

}  // namespace irts
