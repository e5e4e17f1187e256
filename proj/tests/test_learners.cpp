#include <gtest/gtest.h>

#include <random>

#include "irts/learners.hpp"

using namespace irts;

namespace {

struct Problem {
    Matrix X;
    Vector y;
};

Problem random_problem(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p, double noise = 0.5) {
    std::normal_distribution<double> z(0.0, 1.0);
    Problem pr{Matrix(n, p), Vector(n)};
    Vector beta(p);
    for (Eigen::Index j = 0; j < p; ++j) beta(j) = (j % 3 == 0) ? 0.0 : 3.0 * z(rng);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) pr.X(i, j) = 5.0 * z(rng) + static_cast<double>(j);
    for (Eigen::Index i = 0; i < n; ++i) pr.y(i) = pr.X.row(i).dot(beta) + 2.0 + noise * z(rng);
    return pr;
}

}  // namespace

TEST(Ols, ResidualsOrthogonalToColumns) {
    std::mt19937_64 rng(1);
    const auto pr = random_problem(rng, 60, 5);
    const auto m = ols_fit(pr.X, pr.y);
    const Vector r = pr.y - m.predict(pr.X);
    EXPECT_NEAR(r.sum(), 0.0, 1e-8);
    for (Eigen::Index j = 0; j < pr.X.cols(); ++j) EXPECT_NEAR(pr.X.col(j).dot(r), 0.0, 1e-6);
}

TEST(Ols, ConstantColumnGetsZeroWeight) {
    Matrix X(4, 2);
    X << 1, 7, 2, 7, 3, 7, 4, 7;
    Vector y(4);
    y << 2, 4, 6, 8;
    const auto m = ols_fit(X, y);
    EXPECT_NEAR(m.coefficients(0), 2.0, 1e-8);
    EXPECT_EQ(m.coefficients(1), 0.0);
    EXPECT_NEAR(m.intercept, 0.0, 1e-8);
}

TEST(Lasso, ZeroPenaltyMatchesOls) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pr = random_problem(rng, 80, 4);
        LassoOptions opt;
        opt.tolerance = 1e-12;
        opt.max_sweeps = 10000;
        const auto a = lasso_fit(pr.X, pr.y, 0.0, opt);
        const auto b = ols_fit(pr.X, pr.y);
        EXPECT_LT((a.coefficients - b.coefficients).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(a.intercept, b.intercept, 1e-6);
    }
}

TEST(Lasso, LambdaMaxGivesZeroVector) {
    std::mt19937_64 rng(3);
    const auto pr = random_problem(rng, 50, 6);
    const double lmax = lasso_lambda_max(pr.X, pr.y);
    const auto m = lasso_fit(pr.X, pr.y, lmax);
    EXPECT_EQ(m.coefficients.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(m.intercept, pr.y.mean(), 1e-12);
    EXPECT_GT(lasso_fit(pr.X, pr.y, 0.9 * lmax).coefficients.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lasso, OrthonormalDesignIsSoftThreshold) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    const Eigen::Index n = 40, p = 5;
    Matrix A(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) A(i, j) = z(rng);
    A = A.rowwise() - A.colwise().mean();
    // Columns of Q are orthonormal and, being built from centered columns, centered too.
    Matrix Q = Eigen::HouseholderQR<Matrix>(A).householderQ() * Matrix::Identity(n, p);
    Q = Q.rowwise() - Q.colwise().mean();
    const Matrix X = Q * std::sqrt(static_cast<double>(n));
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = X.row(i).dot(Vector::LinSpaced(p, -2, 2)) + 0.3 * z(rng) + 1.0;

    for (double lambda : {0.0, 0.1, 0.5, 1.0, 3.0}) {
        const auto m = lasso_fit(X, y, lambda);
        const Vector yc = y.array() - y.mean();
        for (Eigen::Index j = 0; j < p; ++j) {
            const double g = X.col(j).dot(yc) / static_cast<double>(n);
            const double expect = soft_threshold(g, lambda);
            const double sd = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(n));
            EXPECT_NEAR(m.coefficients(j) * sd, expect, 1e-6) << "lambda " << lambda;
        }
    }
}

TEST(Lasso, ObjectiveNeverIncreases) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto pr = random_problem(rng, 30 + trial, 2 + trial % 7, 2.0);
        std::vector<double> obj;
        LassoOptions opt;
        opt.on_sweep = [&](int, double o) { obj.push_back(o); };
        lasso_fit(pr.X, pr.y, 0.05 * (1 + trial % 4), opt);
        ASSERT_GE(obj.size(), 2u);
        for (std::size_t i = 1; i < obj.size(); ++i) EXPECT_LE(obj[i], obj[i - 1] + 1e-12);
    }
}

TEST(Lasso, L1NormShrinksAlongPath) {
    std::mt19937_64 rng(6);
    const auto pr = random_problem(rng, 100, 6);
    const double lmax = lasso_lambda_max(pr.X, pr.y);
    double previous = std::numeric_limits<double>::infinity();
    for (double frac : {0.0, 0.1, 0.3, 0.6, 0.9}) {
        const auto m = lasso_fit(pr.X, pr.y, frac * lmax);
        const double l1 = m.coefficients.cwiseProduct(m.column_stds).lpNorm<1>();
        EXPECT_LE(l1, previous + 1e-9);
        previous = l1;
    }
}

TEST(Lasso, RejectsBadInput) {
    Matrix X(2, 1);
    X << 1, 2;
    Vector y(2);
    y << 1, std::nan("");
    EXPECT_THROW(lasso_fit(X, y, 0.1), DataError);
    y << 1, 2;
    EXPECT_THROW(lasso_fit(X, y, -1.0), ConfigError);
    EXPECT_THROW(lasso_fit(Matrix(0, 1), Vector(0), 0.1), DataError);
}

TEST(Forest, ConstantTargetPredictsConstant) {
    std::mt19937_64 rng(7);
    const auto pr = random_problem(rng, 40, 3);
    const Vector y = Vector::Constant(40, 4.25);
    const auto m = forest_fit(pr.X, y, {20, 1.0 / 3.0, true, 9});
    EXPECT_TRUE((m.predict(pr.X).array() == 4.25).all());
}

TEST(Forest, SingleFullTreeInterpolates) {
    std::mt19937_64 rng(8);
    const auto pr = random_problem(rng, 50, 4);
    const auto m = forest_fit(pr.X, pr.y, {1, 1.0, false, 1});
    EXPECT_LT((m.predict(pr.X) - pr.y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forest, DeterministicPerSeedAndBounded) {
    std::mt19937_64 rng(9);
    const auto pr = random_problem(rng, 80, 5);
    const ForestOptions opt{30, 1.0 / 3.0, true, 123};
    const auto a = forest_fit(pr.X, pr.y, opt);
    const auto b = forest_fit(pr.X, pr.y, opt);
    const auto q = random_problem(rng, 25, 5);
    EXPECT_EQ(a.predict(q.X), b.predict(q.X));
    auto other = opt;
    other.seed = 124;
    EXPECT_NE(forest_fit(pr.X, pr.y, other).predict(q.X), a.predict(q.X));
    const Vector p = a.predict(q.X);
    EXPECT_GE(p.minCoeff(), pr.y.minCoeff());
    EXPECT_LE(p.maxCoeff(), pr.y.maxCoeff());
}

TEST(Forest, LearnsAStepFunction) {
    Matrix X(100, 2);
    Vector y(100);
    for (int i = 0; i < 100; ++i) {
        X(i, 0) = i;
        X(i, 1) = (i * 37) % 11;
        y(i) = i < 50 ? 1.0 : 5.0;
    }
    const auto m = forest_fit(X, y, {50, 0.5, true, 3});
    Matrix q(2, 2);
    q << 10, 3, 90, 3;
    const Vector p = m.predict(q);
    EXPECT_NEAR(p(0), 1.0, 0.5);
    EXPECT_NEAR(p(1), 5.0, 0.5);
    EXPECT_THROW(m.predict(Matrix(1, 3)), ConfigError);
    EXPECT_THROW(forest_fit(X, y, {0, 0.5, true, 3}), ConfigError);
}

TEST(Learners, DispatchAndNames) {
    EXPECT_EQ(parse_learner("lasso"), LearnerKind::lasso);
    EXPECT_EQ(to_string(parse_learner("random_forest")), "random_forest");
    EXPECT_THROW(parse_learner("svm"), ConfigError);
    Matrix X(3, 1);
    X << 0, 1, 2;
    Vector y(3);
    y << 1, 3, 5;
    LearnerSpec spec;
    spec.lasso_lambda = 0.0;
    EXPECT_NEAR(predict(fit(spec, X, y), X)(2), 5.0, 1e-6);
    spec.kind = LearnerKind::random_forest;
    EXPECT_TRUE(std::holds_alternative<ForestModel>(fit(spec, X, y)));
}
