#include <algorithm>
#include <limits>

#include "csuv/error.hpp"
#include "csuv/random.hpp"
#include "csuv/solvers.hpp"

namespace csuv {

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
    if (n < static_cast<std::size_t>(folds))
        throw InvalidInput("cross-validation needs at least one observation per fold");
    auto rng = SplitMix64::stream(seed, "cv-folds");
    const std::vector<int> perm = random_permutation(rng, n);
    std::vector<int> label(n);
    const auto k = static_cast<std::size_t>(folds);
    for (std::size_t pos = 0; pos < n; ++pos) label[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos * k / n);
    return label;
}

CvFit kfold_cv_tune(const StandardizedDesign& design, const PenaltySpec& penalty, const LambdaPath& path, int folds,
                    std::uint64_t seed, const FitOptions& options) {
    if (path.size() == 0) throw InvalidInput("empty lambda path");
    const auto n = static_cast<std::size_t>(design.rows());
    const std::vector<int> label = assign_folds(n, folds, seed);

    std::vector<double> sse(path.size(), 0.0);
    std::size_t reached = path.size();
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, held;
        for (std::size_t i = 0; i < n; ++i) (label[i] == f ? held : train).push_back(static_cast<int>(i));
        if (held.empty()) throw InvalidInput("cross-validation fold has no observations");

        const StandardizedDesign sub = standardize_rows(design, train);
        const PathFit fit = fit_path(sub, penalty, path, options);
        reached = std::min(reached, fit.size());
        for (std::size_t l = 0; l < fit.size(); ++l) {
            const LinearModel model = to_parent_scale(sub, fit.points[l].beta);
            sse[l] += mean_squared_error(design.X, design.y, model, held) * static_cast<double>(held.size());
        }
    }

    CvFit out;
    out.cv_error.resize(reached);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < reached; ++l) {
        out.cv_error[l] = sse[l] / static_cast<double>(n);
        if (out.cv_error[l] < best) {
            best = out.cv_error[l];
            out.lambda_index = l;
        }
    }
    out.lambda = path.values[out.lambda_index];

    LambdaPath prefix;
    prefix.min_ratio = path.min_ratio;
    prefix.values.assign(path.values.begin(), path.values.begin() + static_cast<std::ptrdiff_t>(out.lambda_index) + 1);
    const PathFit full = fit_path(design, penalty, prefix, options);
    if (full.size() < prefix.size()) {
        out.lambda_index = full.size() - 1;
        out.lambda = full.points.back().lambda;
    }
    out.beta = full.points.back().beta;
    out.intercept = full.points.back().intercept;
    return out;
}

}  // namespace csuv
