#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "irts/error.hpp"

namespace irts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// `y ~ X * coefficients + intercept` in original (de-standardized) units.
struct LinearModel {
    Vector coefficients;
    double intercept = 0.0;
    Vector column_means;
    Vector column_stds;

    Vector predict(const Matrix& X) const {
        if (X.rows() > 0 && X.cols() != coefficients.size())
            throw ConfigError("linear model expects " + std::to_string(coefficients.size()) +
                              " columns, got " + std::to_string(X.cols()));
        if (X.rows() == 0) return Vector(0);
        return (X * coefficients).array() + intercept;
    }
};

namespace detail {

/// Column means and population standard deviations.
struct Standardized {
    Matrix z;
    Vector means;
    Vector stds;
    double y_mean = 0.0;
    Vector y_centered;
};

inline Standardized standardize(const Matrix& X, const Vector& y) {
    Standardized s;
    const auto n = static_cast<double>(X.rows());
    s.means = X.colwise().mean().transpose();
    s.z = X.rowwise() - s.means.transpose();
    s.stds = (s.z.colwise().squaredNorm() / n).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        // Columns constant up to rounding are treated as exactly constant.
        const double scale = std::max(1.0, std::abs(s.means(j)));
        if (s.stds(j) <= 1e-12 * scale) {
            s.stds(j) = 0.0;
            s.z.col(j).setZero();
        } else {
            s.z.col(j) /= s.stds(j);
        }
    }
    s.y_mean = y.mean();
    s.y_centered = y.array() - s.y_mean;
    return s;
}

inline LinearModel destandardize(const Standardized& s, const Vector& beta_std) {
    LinearModel m;
    m.column_means = s.means;
    m.column_stds = s.stds;
    m.coefficients = Vector::Zero(beta_std.size());
    for (Eigen::Index j = 0; j < beta_std.size(); ++j)
        if (s.stds(j) > 0.0) m.coefficients(j) = beta_std(j) / s.stds(j);
    m.intercept = s.y_mean - m.coefficients.dot(s.means);
    return m;
}

inline void check_shapes(const Matrix& X, const Vector& y) {
    if (X.rows() != y.size()) throw DataError("design matrix and target have different row counts");
    if (X.rows() < 1) throw DataError("cannot fit a model on zero rows");
}

}  // namespace detail

/// Least squares via the normal equations on standardized columns, with a
/// 1e-10 ridge jitter on the Gram diagonal so rank-deficient designs still solve.
inline LinearModel ols_fit(const Matrix& X, const Vector& y) {
    detail::check_shapes(X, y);
    const auto s = detail::standardize(X, y);
    const auto n = static_cast<double>(X.rows());
    Matrix gram = s.z.transpose() * s.z / n;
    gram.diagonal().array() += 1e-10;
    const Vector rhs = s.z.transpose() * s.y_centered / n;
    const Vector beta = gram.ldlt().solve(rhs);
    return detail::destandardize(s, beta);
}

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

struct LassoOptions {
    double tolerance = 1e-6;   // on the largest standardized coefficient change per sweep
    int max_sweeps = 1000;
    /// Called with (sweep, objective) before the first sweep (sweep 0) and after each one.
    std::function<void(int, double)> on_sweep;
};

/// Smallest penalty at which every standardized coefficient is zero.
inline double lasso_lambda_max(const Matrix& X, const Vector& y) {
    detail::check_shapes(X, y);
    const auto s = detail::standardize(X, y);
    const Vector g = s.z.transpose() * s.y_centered / static_cast<double>(X.rows());
    return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
}

/**
 * LASSO by cyclic coordinate descent on standardized columns.
 *
 * Minimizes `(1/2n)||y - Zb - c||^2 + lambda*||b||_1` where `Z` is `X` with
 * each column centered and divided by its population std. Each coordinate
 * update is `b_j = S(b_j + <z_j, r>/n, lambda)` since `<z_j, z_j>/n == 1`.
 * Coefficients are mapped back to the original column scale.
 */
inline LinearModel lasso_fit(const Matrix& X, const Vector& y, double lambda,
                             const LassoOptions& opt = {}) {
    detail::check_shapes(X, y);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("LASSO lambda must be >= 0");
    if (!X.allFinite() || !y.allFinite()) throw DataError("LASSO inputs contain non-finite values");

    const auto s = detail::standardize(X, y);
    const auto n = static_cast<double>(X.rows());
    const Eigen::Index p = X.cols();
    Vector beta = Vector::Zero(p);
    Vector resid = s.y_centered;

    auto objective = [&] { return resid.squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>(); };
    if (opt.on_sweep) opt.on_sweep(0, objective());

    // Zero satisfies the optimality conditions whenever lambda >= lambda_max.
    const Vector g = s.z.transpose() * s.y_centered / n;
    if (p == 0 || lambda >= g.cwiseAbs().maxCoeff()) return detail::destandardize(s, beta);

    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (s.stds(j) == 0.0) continue;
            const double old = beta(j);
            const double z = old + s.z.col(j).dot(resid) / n;
            const double updated = soft_threshold(z, lambda);
            if (updated != old) {
                resid -= (updated - old) * s.z.col(j);
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (opt.on_sweep) opt.on_sweep(sweep, objective());
        if (max_change < opt.tolerance) break;
    }
    return detail::destandardize(s, beta);
}

}  // namespace irts
