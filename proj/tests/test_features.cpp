#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "irts/features.hpp"
#include "oracles.hpp"

using namespace irts;

TEST(RelDisp, Examples) {
    EXPECT_EQ(rel_disp(std::vector<double>{2, 2, 2}), 0.0);
    EXPECT_DOUBLE_EQ(rel_disp(std::vector<double>{1, 3}), 0.5);
    EXPECT_EQ(rel_disp(std::vector<double>{-1, 1}), 0.0);
    EXPECT_EQ(rel_disp(std::vector<double>{4}), 0.0);
}

TEST(TimeValueProducts, Examples) {
    EXPECT_DOUBLE_EQ(t_y_avg_mul(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 5.5);
    EXPECT_EQ(t_y_avg_mul(std::vector<double>{1, 2}, std::vector<double>{0, 0}), 0.0);
    EXPECT_EQ(t_y_avg_mul(std::vector<double>{2}, std::vector<double>{3}), 6.0);
    EXPECT_EQ(t_y_avg_mul(std::vector<double>{}, std::vector<double>{}), 0.0);
    EXPECT_THROW(t_y_avg_mul(std::vector<double>{1}, std::vector<double>{}), Error);

    EXPECT_DOUBLE_EQ(t_y_avg_dif_mul(std::vector<double>{0, 1, 3}, std::vector<double>{0, 2, 2}), 1.0);
    EXPECT_EQ(t_y_avg_dif_mul(std::vector<double>{0, 1, 3}, std::vector<double>{5, 5, 5}), 0.0);
    EXPECT_EQ(t_y_avg_dif_mul(std::vector<double>{1}, std::vector<double>{1}), 0.0);
}

TEST(SpaceArea, Examples) {
    EXPECT_EQ(space_area_2d(std::vector<double>{0, 10}, std::vector<double>{2, 5}), 30.0);
    EXPECT_EQ(space_area_2d(std::vector<double>{0, 10}, std::vector<double>{2, 2}), 0.0);
    EXPECT_EQ(space_area_2d(std::vector<double>{3}, std::vector<double>{2}), 0.0);
}

TEST(TimeDiffStats, Examples) {
    const auto s = t_dif_stats(std::vector<double>{0, 1, 3, 6});
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.sum, 6.0);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 3.0);
    EXPECT_DOUBLE_EQ(s.median, 2.0);
    EXPECT_NEAR(s.var, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.std, 0.816496580927726, 1e-12);
    EXPECT_NEAR(s.rel_disp, 0.408248290463863, 1e-12);
    EXPECT_DOUBLE_EQ(s.iqr, 1.0);

    const auto one = t_dif_stats(std::vector<double>{0, 5});
    EXPECT_EQ(one.mean, 5.0);
    EXPECT_EQ(one.sum, 5.0);
    EXPECT_EQ(one.min, 5.0);
    EXPECT_EQ(one.max, 5.0);
    EXPECT_EQ(one.median, 5.0);
    EXPECT_EQ(one.var, 0.0);
    EXPECT_EQ(one.std, 0.0);
    EXPECT_EQ(one.rel_disp, 0.0);
    EXPECT_EQ(one.iqr, 0.0);

    const auto even = t_dif_stats(std::vector<double>{0, 4, 8, 12, 16});
    EXPECT_EQ(even.mean, 4.0);
    EXPECT_EQ(even.std, 0.0);
    EXPECT_EQ(even.rel_disp, 0.0);

    const auto none = t_dif_stats(std::vector<double>{3}).as_array();
    for (double v : none) EXPECT_EQ(v, 0.0);
}

TEST(MinMaxTimeDiff, Examples) {
    EXPECT_EQ(min_max_t_dif(std::vector<double>{2, 9}, 7), (std::pair<double, double>{7, 1.0}));
    EXPECT_EQ(min_max_t_dif(std::vector<double>{}, 7), (std::pair<double, double>{0, 0}));
    EXPECT_EQ(min_max_t_dif(std::vector<double>{1, 2, 7}, 2).second, 3.0);
    EXPECT_THROW(min_max_t_dif(std::vector<double>{1, 2}, 0), ConfigError);
}

TEST(Entropy, Examples) {
    EXPECT_EQ(entropy(std::vector<double>{3, 3, 3}, 10), 0.0);
    std::vector<double> spread;
    for (int i = 0; i < 10; ++i) spread.push_back(i + 0.5);
    EXPECT_NEAR(entropy(spread, 10), std::log(10.0), 1e-12);
    EXPECT_NEAR(entropy(std::vector<double>{0, 0, 0, 0, 10}, 2), -(0.8 * std::log(0.8) + 0.2 * std::log(0.2)), 1e-12);
    EXPECT_EQ(entropy(std::vector<double>{0.0, 0.0}, 10), 0.0);
    EXPECT_THROW(entropy(spread, 1), ConfigError);
}

TEST(MovAvg, Examples) {
    EXPECT_DOUBLE_EQ(mov_avg(std::vector<double>{1, 2, 3, 4}, 3), 3.0);
    EXPECT_EQ(mov_avg(std::vector<double>{7, 7, 7}, 2), 7.0);
    EXPECT_DOUBLE_EQ(mov_avg(std::vector<double>{1, 2}, 5), 1.5);
    EXPECT_THROW(mov_avg(std::vector<double>{1}, 0), ConfigError);
}

TEST(RegMod, PerfectLineAndFallbacks) {
    const std::vector<double> t{0, 1, 2, 3, 4}, y{0, 2, 4, 6, 8};
    const auto r = reg_mod_features(t, y, 0.1);
    EXPECT_NEAR(r.ols.prediction, 8.0, 1e-8);
    EXPECT_NEAR(r.ols.error, 0.0, 1e-8);
    EXPECT_NEAR(r.ols.abs_error, 0.0, 1e-8);
    EXPECT_NEAR(r.lasso.prediction, oracle::lasso_1d_predict({0, 1, 2, 3}, {0, 2, 4, 6}, 0.1, 4.0), 1e-6);

    const auto two = reg_mod_features(std::vector<double>{0, 1}, std::vector<double>{3, 5}, 0.1);
    EXPECT_EQ(two.ols.prediction, 3.0);
    EXPECT_EQ(two.ols.error, 2.0);
    EXPECT_EQ(two.lasso.abs_error, 2.0);

    const auto flat = reg_mod_features(t, std::vector<double>{4, 4, 4, 4, 4}, 0.1);
    EXPECT_NEAR(flat.ols.prediction, 4.0, 1e-12);
    EXPECT_NEAR(flat.lasso.prediction, 4.0, 1e-12);
    EXPECT_NEAR(flat.lasso.error, 0.0, 1e-12);
}

TEST(Catalog, ColumnNamesAndCount) {
    const auto names = feature_names(FeatureConfig{});
    EXPECT_EQ(names.size(), 32u);
    EXPECT_EQ(names.front(), "rel_disp_t_orig");
    EXPECT_NE(std::find(names.begin(), names.end(), "t_dif_stats_orig_iqr"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "reg_mod_res_lasso_abs_error"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "2d_space_area_res"), names.end());
    EXPECT_EQ(std::find(names.begin(), names.end(), "mov_avg_orig"), names.end());
    EXPECT_TRUE(feature_names(FeatureConfig::none()).empty());
}

namespace {

struct Fixture {
    IrregularSeries series;
    RegularSeries reg;
};

Fixture make(std::vector<double> ts, std::vector<double> ys, double f) {
    Fixture fx;
    fx.series = make_series(ts, ys, "e");
    fx.reg = resample(fx.series, {f, Aggregator::sum, Imputer::zero});
    return fx;
}

double column(const FeatureRow& r, const std::string& name) {
    const auto names = feature_names(FeatureConfig{});
    const auto it = std::find(names.begin(), names.end(), name);
    return r.features.at(static_cast<std::size_t>(it - names.begin()));
}

}  // namespace

TEST(ComputeFeatureRow, EmptyWindowZeroesOriginalFeatures) {
    auto fx = make({0, 100}, {1, 2}, 1.0);
    const auto row = make_embedding_row(fx.reg, 10, 5);
    const auto fr = compute_feature_row(row, fx.series, FeatureConfig{});
    const auto names = feature_names(FeatureConfig{});
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].find("_orig") != std::string::npos) {
            EXPECT_EQ(fr.features[i], 0.0) << names[i];
        }
    }
    EXPECT_EQ(column(fr, "missing_t_count_res"), 5.0);
    EXPECT_EQ(column(fr, "rel_disp_t_res"), oracle::cv(row.lag_timestamps));
}

TEST(ComputeFeatureRow, SingleObservationWindow) {
    auto fx = make({0, 3.5, 10}, {1, 2, 3}, 1.0);
    const auto row = make_embedding_row(fx.reg, 2, 3);  // bins 2..4 hold only t=3.5
    const auto fr = compute_feature_row(row, fx.series, FeatureConfig{});
    EXPECT_EQ(column(fr, "t_dif_stats_orig_mean"), 0.0);
    EXPECT_EQ(column(fr, "min_max_t_dif_orig"), 0.0);
    EXPECT_EQ(column(fr, "min_max_t_dif_f_orig"), 0.0);
    EXPECT_EQ(column(fr, "t_y_avg_mul_orig"), 7.0);
    EXPECT_EQ(column(fr, "missing_t_count_res"), 2.0);
    EXPECT_DOUBLE_EQ(column(fr, "2d_space_area_res"), 2.0 * 1.0 * 2.0);
}

TEST(ComputeFeatureMatrix, ParallelEqualsSequentialAndOrder) {
    std::mt19937_64 rng(3);
    const auto s = oracle::random_series(rng, 400, 0.7);
    const auto reg = resample(s, {1.0, Aggregator::sum, Imputer::zero});
    const auto emb = build_embedding(reg, 6);
    const auto a = compute_feature_matrix(emb, s, FeatureConfig{}, 1);
    const auto b = compute_feature_matrix(emb, s, FeatureConfig{}, 4);
    ASSERT_EQ(a.rows.size(), emb.size());
    EXPECT_EQ(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].target_time, emb.rows[i].target_time);

    const auto baseline = compute_feature_matrix(emb, s, FeatureConfig::none());
    EXPECT_TRUE(baseline.rows.front().features.empty());
    EXPECT_EQ(baseline.rows.front().lags.size(), 6u);
    EXPECT_TRUE(compute_feature_matrix(EmbeddingMatrix{}, s, FeatureConfig{}).rows.empty());
}

TEST(FeatureInvariants, ScaleAffineTranslation) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(2 + trial % 30);
        for (auto& v : x) v = std::ldexp(std::round(std::ldexp(u(rng), 20)), -20);  // exact dyadic values
        const double c = u(rng);
        std::vector<double> scaled(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = c * x[i];
        EXPECT_NEAR(rel_disp(scaled), rel_disp(x), 1e-9);

        // Powers of two and integer shifts keep the arithmetic exact.
        std::vector<double> affine(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) affine[i] = 4.0 * x[i] + 64.0;
        EXPECT_EQ(histogram_counts(affine, 10), histogram_counts(x, 10));
        EXPECT_EQ(entropy(affine, 10), entropy(x, 10));

        std::sort(x.begin(), x.end());
        std::vector<double> shifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] + 1024.0;
        EXPECT_EQ(t_dif_stats(shifted).as_array()[0], t_dif_stats(x).as_array()[0]);
        EXPECT_EQ(min_max_t_dif(shifted, 2.0), min_max_t_dif(x, 2.0));
        EXPECT_EQ(entropy(shifted, 10), entropy(x, 10));
        const auto s = t_dif_stats(x);
        EXPECT_NEAR(s.sum, x.back() - x.front(), 1e-9);
        EXPECT_LE(s.min, s.median);
        EXPECT_LE(s.median, s.max);
        EXPECT_NEAR(s.var, s.std * s.std, 1e-9);
    }
}
