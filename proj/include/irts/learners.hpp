#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "irts/forest.hpp"
#include "irts/linear.hpp"

namespace irts {

enum class LearnerKind { lasso, random_forest };

inline LearnerKind parse_learner(std::string_view s) {
    if (s == "lasso") return LearnerKind::lasso;
    if (s == "random_forest") return LearnerKind::random_forest;
    throw ConfigError("unknown learner '" + std::string(s) + "' (lasso|random_forest)");
}

inline std::string to_string(LearnerKind k) {
    return k == LearnerKind::lasso ? "lasso" : "random_forest";
}

struct LearnerSpec {
    LearnerKind kind = LearnerKind::lasso;
    double lasso_lambda = 0.1;
    LassoOptions lasso;
    ForestOptions forest;
};

using Model = std::variant<LinearModel, ForestModel>;

inline Model fit(const LearnerSpec& spec, const Matrix& X, const Vector& y) {
    if (spec.kind == LearnerKind::lasso) return lasso_fit(X, y, spec.lasso_lambda, spec.lasso);
    return forest_fit(X, y, spec.forest);
}

inline Vector predict(const Model& model, const Matrix& X) {
    return std::visit([&](const auto& m) { return m.predict(X); }, model);
}

}  // namespace irts
