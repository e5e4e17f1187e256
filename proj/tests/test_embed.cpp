#include <gtest/gtest.h>

#include <random>

#include "irts/embed.hpp"
#include "oracles.hpp"

using namespace irts;

namespace {

RegularSeries regular(std::vector<double> values) {
    std::vector<double> ts(values.size());
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<double>(i);
    return resample(make_series(ts, values), {1.0, Aggregator::sum, Imputer::zero});
}

}  // namespace

TEST(BuildEmbedding, RowsMatchLagMatrix) {
    const auto m = build_embedding(regular({1, 2, 3, 4, 5}), 3);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.rows[0].lags, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(m.rows[0].target, 4.0);
    EXPECT_EQ(m.rows[1].lags, (std::vector<double>{2, 3, 4}));
    EXPECT_EQ(m.rows[1].target, 5.0);
    EXPECT_EQ(m.rows[1].target_time, 4.0);
    EXPECT_FALSE(m.insufficient);
}

TEST(BuildEmbedding, InsufficientWhenLagCoversSeries) {
    const auto m = build_embedding(regular({1, 2, 3, 4, 5, 6, 7}), 7);
    EXPECT_TRUE(m.empty());
    EXPECT_TRUE(m.insufficient);
    EXPECT_THROW(build_embedding(regular({1, 2}), 0), ConfigError);
}

TEST(BuildEmbedding, HundredBinsLagTen) {
    std::vector<double> v(100);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i * i);
    const auto reg = regular(v);
    const auto m = build_embedding(reg, 10);
    // Reference count from a plain loop over possible first bins.
    std::size_t expected = 0;
    for (std::size_t first = 0; first < v.size(); ++first)
        if (first + 10 < v.size()) ++expected;
    ASSERT_EQ(m.size(), expected);
    EXPECT_EQ(m.rows[0].window_start, reg.bin_start(0));
    EXPECT_EQ(m.rows[0].window_end, reg.bin_start(10));
    EXPECT_EQ(m.rows[0].window_obs, (IndexRange{0, 10}));
}

TEST(WindowObservations, OnlyObservationsInLagBins) {
    // Bins of width 10 starting at 0: [0,10) holds 3 obs, the rest are empty until t=50.
    const auto s = make_series({0, 1, 2, 50, 51}, {1, 1, 1, 1, 1});
    const auto reg = resample(s, {10.0, Aggregator::sum, Imputer::zero});
    const auto m = build_embedding(reg, 2);
    ASSERT_EQ(m.size(), 4u);
    EXPECT_EQ(window_observations(m.rows[0], s).size(), 3u);
    EXPECT_EQ(window_observations(m.rows[2], s).size(), 0u);  // bins 2 and 3 are empty
}

TEST(WindowObservations, LastLagBinIsIncluded) {
    const auto s = make_series({0, 1.5, 2.5}, {1, 2, 3});
    const auto reg = resample(s, {1.0, Aggregator::sum, Imputer::zero});
    const auto row = make_embedding_row(reg, 0, 2);
    const auto w = window_observations(row, s);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[1].timestamp, 1.5);
}

TEST(BuildEmbedding, RandomSlicesAndWindows) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> len(1, 80);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = oracle::random_series(rng, len(rng), 0.8);
        const auto reg = resample(s, {1.7, Aggregator::mean, Imputer::forward_fill});
        const auto ts = s.timestamps();
        for (std::size_t lag = 1; lag <= 6; ++lag) {
            const auto m = build_embedding(reg, lag);
            ASSERT_EQ(m.size(), reg.size() > lag ? reg.size() - lag : 0u);
            for (std::size_t j = 0; j < m.size(); ++j) {
                const auto& r = m.rows[j];
                EXPECT_EQ(r.lags, std::vector<double>(reg.values.begin() + j, reg.values.begin() + j + lag));
                const auto expect = oracle::filter_interval(ts, r.lag_timestamps.front(),
                                                            r.lag_timestamps.back() + reg.frequency);
                ASSERT_EQ(r.window_obs.size(), expect.size());
                if (!expect.empty()) EXPECT_EQ(r.window_obs.begin, expect.front());
                if (j > 0) {
                    // consecutive rows share lag - 1 bins
                    EXPECT_EQ(m.rows[j - 1].first_bin + 1, r.first_bin);
                }
            }
        }
    }
}

TEST(ForecastRow, CoversFinalBins) {
    const auto reg = regular({1, 2, 3, 4});
    const auto r = forecast_row(reg, 3);
    EXPECT_EQ(r.lags, (std::vector<double>{2, 3, 4}));
    EXPECT_EQ(r.target_time, 4.0);
    EXPECT_TRUE(std::isnan(r.target));
    EXPECT_THROW(forecast_row(reg, 5), DataError);
}
