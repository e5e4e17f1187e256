#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "irts/error.hpp"
#include "irts/linear.hpp"

namespace irts {

struct ForestOptions {
    int n_trees = 100;
    /// Fraction of columns tried per split; at least one, rounded up.
    double max_features = 1.0 / 3.0;
    bool bootstrap = true;
    std::uint64_t seed = 42;
};

/// Binary regression tree stored as a flat node array; node 0 is the root.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;  // mean of the training targets reaching this node
    };
    std::vector<Node> nodes;

    double predict_row(const Matrix& X, Eigen::Index row) const {
        int at = 0;
        while (nodes[at].feature >= 0) {
            const auto& n = nodes[at];
            at = X(row, n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[at].value;
    }
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    std::uint64_t seed = 42;
    Eigen::Index n_features = 0;
    double max_features = 1.0 / 3.0;

    Vector predict(const Matrix& X) const {
        if (X.rows() > 0 && X.cols() != n_features)
            throw ConfigError("forest expects " + std::to_string(n_features) + " columns, got " +
                              std::to_string(X.cols()));
        Vector out = Vector::Zero(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            double sum = 0.0;
            for (const auto& t : trees) sum += t.predict_row(X, i);
            out(i) = sum / static_cast<double>(trees.size());
        }
        return out;
    }
};

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const Vector& y, std::size_t mtry, std::mt19937_64& rng)
        : X_(X), y_(y), mtry_(mtry), rng_(rng) {}

    RegressionTree build(std::vector<std::uint32_t> sample) {
        RegressionTree tree;
        struct Pending {
            int node;
            std::vector<std::uint32_t> idx;
        };
        std::vector<Pending> stack;
        tree.nodes.push_back({});
        stack.push_back({0, std::move(sample)});
        std::vector<int> features(static_cast<std::size_t>(X_.cols()));

        while (!stack.empty()) {
            auto [node, idx] = std::move(stack.back());
            stack.pop_back();

            double sum = 0.0;
            for (auto i : idx) sum += y_(i);
            tree.nodes[node].value = sum / static_cast<double>(idx.size());

            if (idx.size() < 2 || is_pure(idx)) continue;

            const auto split = best_split(idx, features);
            if (split.feature < 0) continue;

            std::vector<std::uint32_t> left, right;
            for (auto i : idx) (X_(i, split.feature) <= split.threshold ? left : right).push_back(i);

            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            tree.nodes[node].feature = split.feature;
            tree.nodes[node].threshold = split.threshold;
            tree.nodes[node].left = l;
            tree.nodes[node].right = l + 1;
            stack.push_back({l + 1, std::move(right)});
            stack.push_back({l, std::move(left)});
        }
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = 0.0;
    };

    bool is_pure(const std::vector<std::uint32_t>& idx) const {
        const double first = y_(idx.front());
        return std::all_of(idx.begin(), idx.end(), [&](auto i) { return y_(i) == first; });
    }

    // Columns are visited in a random order; the search stops after `mtry`
    // columns unless none of them admitted a split so far.
    Split best_split(const std::vector<std::uint32_t>& idx, std::vector<int>& features) {
        std::iota(features.begin(), features.end(), 0);
        Split best;
        double total = 0.0;
        for (auto i : idx) total += y_(i);
        const double n = static_cast<double>(idx.size());
        const double base = total * total / n;

        std::vector<std::pair<double, double>> xy(idx.size());
        for (std::size_t tried = 0; tried < features.size(); ++tried) {
            if (tried >= mtry_ && best.feature >= 0) break;
            std::uniform_int_distribution<std::size_t> pick(tried, features.size() - 1);
            std::swap(features[tried], features[pick(rng_)]);
            const int f = features[tried];

            for (std::size_t k = 0; k < idx.size(); ++k) xy[k] = {X_(idx[k], f), y_(idx[k])};
            std::sort(xy.begin(), xy.end());
            if (xy.front().first == xy.back().first) continue;

            double left_sum = 0.0;
            for (std::size_t k = 0; k + 1 < xy.size(); ++k) {
                left_sum += xy[k].second;
                if (xy[k].first == xy[k + 1].first) continue;
                const double nl = static_cast<double>(k + 1);
                const double nr = n - nl;
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / nl + right_sum * right_sum / nr - base;
                if (best.feature < 0 || score > best.score) {
                    double thr = 0.5 * (xy[k].first + xy[k + 1].first);
                    if (!(thr < xy[k + 1].first)) thr = xy[k].first;
                    best = {f, thr, score};
                }
            }
        }
        return best;
    }

    const Matrix& X_;
    const Vector& y_;
    std::size_t mtry_;
    std::mt19937_64& rng_;
};

}  // namespace detail

/**
 * Bagged CART regression trees.
 *
 * Each tree is grown on a bootstrap resample of the rows (unless disabled)
 * with variance-reduction splits until nodes are pure or hold fewer than two
 * rows. Tree `b` draws from its own generator seeded with `(seed, b)`, so the
 * result depends only on the data, the options and the seed.
 */
inline ForestModel forest_fit(const Matrix& X, const Vector& y, const ForestOptions& opt = {}) {
    detail::check_shapes(X, y);
    if (opt.n_trees < 1) throw ConfigError("forest needs at least one tree");
    if (!(opt.max_features > 0.0 && opt.max_features <= 1.0))
        throw ConfigError("forest max_features must be in (0, 1]");

    ForestModel model;
    model.seed = opt.seed;
    model.n_features = X.cols();
    model.max_features = opt.max_features;
    const auto p = static_cast<std::size_t>(X.cols());
    const std::size_t mtry =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.max_features * p - 1e-9)));
    const auto n = static_cast<std::uint32_t>(X.rows());

    model.trees.reserve(static_cast<std::size_t>(opt.n_trees));
    for (int b = 0; b < opt.n_trees; ++b) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(b)};
        std::mt19937_64 rng(seq);
        std::vector<std::uint32_t> sample(n);
        if (opt.bootstrap) {
            std::uniform_int_distribution<std::uint32_t> draw(0, n - 1);
            for (auto& s : sample) s = draw(rng);
        } else {
            std::iota(sample.begin(), sample.end(), 0u);
        }
        if (p == 0) {
            RegressionTree leaf;
            double sum = 0.0;
            for (auto i : sample) sum += y(i);
            leaf.nodes.push_back({-1, 0.0, -1, -1, sum / n});
            model.trees.push_back(std::move(leaf));
            continue;
        }
        detail::TreeBuilder builder(X, y, mtry, rng);
        model.trees.push_back(builder.build(std::move(sample)));
    }
    return model;
}

}  // namespace irts
