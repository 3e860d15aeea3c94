#include "csuv/baselines.hpp"

#include <cmath>
#include <limits>

#include "csuv/engine.hpp"
#include "csuv/error.hpp"
#include "csuv/parallel.hpp"
#include "csuv/random.hpp"

namespace csuv {

namespace {

std::uint64_t full_cv_seed(std::uint64_t seed) { return SplitMix64::stream(seed, "constituent-cv").key(); }

std::uint64_t half_cv_seed(std::uint64_t seed, int repetition) {
    return SplitMix64::stream(seed, "delete-half-cv", static_cast<std::uint64_t>(repetition)).key();
}

CvFit tune(const StandardizedDesign& design, const PenaltySpec& method, const TuningOptions& options,
           std::uint64_t fold_seed) {
    const LambdaPath path = make_lambda_path(design, method, options.path_length, options.min_ratio);
    return kfold_cv_tune(design, method, path, options.folds, fold_seed, options.fit_options);
}

}  // namespace

std::vector<CvFit> constituent_fits(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods,
                                    const TuningOptions& options) {
    if (methods.empty()) throw InvalidInput("no methods given");
    std::vector<CvFit> fits(methods.size());
    parallel_for(methods.size(), options.jobs,
                 [&](std::size_t m) { fits[m] = tune(design, methods[m], options, full_cv_seed(options.seed)); });
    return fits;
}

Eigen::VectorXd CandidateFit::dense(Index p) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
    for (std::size_t a = 0; a < support.size(); ++a) out(support[a]) = coefficients(static_cast<Index>(a));
    return out;
}

double log_binomial(Index p, Index k) {
    if (k < 0 || k > p) throw InvalidInput("binomial coefficient needs 0 <= k <= p");
    return std::lgamma(static_cast<double>(p) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(p - k) + 1.0);
}

CriterionScore score_ebic(const CandidateFit& candidate, Index n, Index p, double gamma, int id) {
    const Index k = candidate.k();
    if (k >= n) throw InvalidInput("candidate has at least as many covariates as observations");
    if (!(candidate.rss >= 0.0)) throw InvalidInput("residual sum of squares must be nonnegative");
    if (gamma < 0.0) throw InvalidInput("eBIC gamma must be nonnegative");
    CriterionScore s;
    s.candidate = id;
    s.criterion = gamma == 0.0 ? Criterion::bic : Criterion::ebic;
    if (candidate.rss == 0.0) {
        s.score = -std::numeric_limits<double>::infinity();
        return s;
    }
    const auto nd = static_cast<double>(n);
    s.score = nd * std::log(candidate.rss / nd) + static_cast<double>(k) * std::log(nd) +
              2.0 * gamma * log_binomial(p, k);
    return s;
}

CandidateFit refit_candidate(const StandardizedDesign& design, const std::vector<int>& support, int method) {
    const SubsetFit fit = ols_fit(design.X, design.y, support);
    CandidateFit c;
    c.support = fit.support;
    c.coefficients = fit.coefficients;
    c.intercept = fit.intercept;
    c.method = method;
    Eigen::VectorXd resid = design.y.array() - fit.intercept;
    for (std::size_t a = 0; a < fit.support.size(); ++a)
        resid -= fit.coefficients(static_cast<Index>(a)) * design.X.col(fit.support[a]);
    c.rss = resid.squaredNorm();
    // Exact fits leave rounding-level residuals; treat them as zero.
    if (c.rss <= 1e-20 * std::max(1.0, design.y.squaredNorm())) c.rss = 0.0;
    return c;
}

int choose_by_ebic(const std::vector<CandidateFit>& candidates, Index n, Index p, double gamma) {
    int best = -1;
    double best_score = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (candidates[c].k() >= n) continue;
        const double s = score_ebic(candidates[c], n, p, gamma, static_cast<int>(c)).score;
        const bool better = best < 0 || s < best_score ||
                            (s == best_score && candidates[c].k() < candidates[static_cast<std::size_t>(best)].k());
        if (better) {
            best = static_cast<int>(c);
            best_score = s;
        }
    }
    if (best < 0) throw InvalidInput("every eBIC candidate was rejected");
    return best;
}

EbicSelection select_by_ebic(const StandardizedDesign& design, const std::vector<CvFit>& fits, double gamma) {
    EbicSelection out;
    for (std::size_t m = 0; m < fits.size(); ++m) {
        const std::vector<int> support = support_of(fits[m].beta);
        if (static_cast<Index>(support.size()) >= design.rows()) continue;
        try {
            out.candidates.push_back(refit_candidate(design, support, static_cast<int>(m)));
        } catch (const RankDeficient&) {
        }
    }
    out.chosen = choose_by_ebic(out.candidates, design.rows(), design.cols(), gamma);
    return out;
}

EbicSelection select_by_ebic(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods, double gamma,
                             const TuningOptions& options) {
    return select_by_ebic(design, constituent_fits(design, methods, options), gamma);
}

DeleteHalfResult delete_half_cv_select(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods,
                                       int repetitions, const TuningOptions& options,
                                       const std::vector<CvFit>& full_fits) {
    if (methods.empty()) throw InvalidInput("no methods given");
    if (repetitions < 1) throw InvalidInput("delete-n/2 cross-validation needs at least one repetition");
    if (design.rows() < 4) throw InvalidInput("delete-n/2 cross-validation needs at least 4 observations");

    DeleteHalfResult out;
    out.errors.assign(static_cast<std::size_t>(repetitions), std::vector<double>(methods.size(), 0.0));
    parallel_for(static_cast<std::size_t>(repetitions), options.jobs, [&](std::size_t b) {
        const Split split = make_split(design.rows(), 50.0, options.seed, static_cast<int>(b));
        const StandardizedDesign half = standardize_rows(design, split.train);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const CvFit fit = tune(half, methods[m], options, half_cv_seed(options.seed, static_cast<int>(b)));
            const LinearModel model = to_parent_scale(half, fit.beta);
            out.errors[b][m] = mean_squared_error(design.X, design.y, model, split.test);
        }
    });

    out.mean_errors.assign(methods.size(), 0.0);
    for (const auto& row : out.errors)
        for (std::size_t m = 0; m < methods.size(); ++m) out.mean_errors[m] += row[m];
    for (double& e : out.mean_errors) e /= static_cast<double>(repetitions);
    for (std::size_t m = 1; m < methods.size(); ++m)
        if (out.mean_errors[m] < out.mean_errors[static_cast<std::size_t>(out.chosen)]) out.chosen = static_cast<int>(m);

    const auto chosen = static_cast<std::size_t>(out.chosen);
    out.fit = chosen < full_fits.size() ? full_fits[chosen]
                                        : tune(design, methods[chosen], options, full_cv_seed(options.seed));
    return out;
}

DeleteHalfResult delete_half_cv_select(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods,
                                       int repetitions, const TuningOptions& options) {
    return delete_half_cv_select(design, methods, repetitions, options, {});
}

}  // namespace csuv
