#pragma once

// Model-selection baselines over the constituent penalized methods: BIC,
// extended BIC, and delete-n/2 cross-validation.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csuv/design.hpp"
#include "csuv/penalty.hpp"
#include "csuv/solvers.hpp"

namespace csuv {

/// Shared settings for the cross-validated constituent fits.
struct TuningOptions {
    int folds = 10;
    std::size_t path_length = 100;
    double min_ratio = 1e-3;
    std::uint64_t seed = 1;
    FitOptions fit_options{.truncate_on_failure = true};
    int jobs = 0;
};

/// Each method tuned by K-fold CV on all rows (identical folds for every
/// method). Coefficients are on the scale of design.X.
std::vector<CvFit> constituent_fits(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods,
                                    const TuningOptions& options);

struct CandidateFit {
    std::vector<int> support;
    Eigen::VectorXd coefficients;  // aligned with support, OLS refit on all rows
    double intercept = 0.0;
    double rss = 0.0;
    int method = 0;

    int k() const { return static_cast<int>(support.size()); }
    Eigen::VectorXd dense(Index p) const;
};

enum class Criterion { bic, ebic };

struct CriterionScore {
    int candidate = 0;
    double score = 0.0;
    Criterion criterion = Criterion::ebic;
};

/// ln C(p, k) through log-gamma.
double log_binomial(Index p, Index k);

/// n ln(RSS/n) + k ln n + 2 gamma ln C(p, k); -infinity when RSS = 0.
/// Throws InvalidInput when k >= n.
CriterionScore score_ebic(const CandidateFit& candidate, Index n, Index p, double gamma, int id = 0);

/// OLS refit of `support` on every row of the design. Throws RankDeficient /
/// TooManyCovariates like ols_fit.
CandidateFit refit_candidate(const StandardizedDesign& design, const std::vector<int>& support, int method);

/// Index of the minimum-score candidate; ties go to the smaller support, then
/// to the earlier candidate. Candidates with k >= n are skipped. Throws
/// InvalidInput when every candidate is rejected.
int choose_by_ebic(const std::vector<CandidateFit>& candidates, Index n, Index p, double gamma);

struct EbicSelection {
    std::vector<CandidateFit> candidates;  // one per method whose refit succeeded
    int chosen = 0;                        // position in candidates
    const CandidateFit& best() const { return candidates[static_cast<std::size_t>(chosen)]; }
};

/// CV-tunes every method, refits each selected support by OLS and returns the
/// minimum-eBIC candidate. gamma = 0 gives BIC.
EbicSelection select_by_ebic(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods, double gamma,
                             const TuningOptions& options);
/// Same, reusing already tuned constituent fits.
EbicSelection select_by_ebic(const StandardizedDesign& design, const std::vector<CvFit>& fits, double gamma);

struct DeleteHalfResult {
    /// errors[b][m]: held-out squared error of method m in repetition b.
    std::vector<std::vector<double>> errors;
    std::vector<double> mean_errors;
    int chosen = 0;
    CvFit fit;  // chosen method tuned on all rows
};

/// Delete-n/2 cross-validation: B random halvings (same split stream as the
/// CSUV repetitions), each method CV-tuned on the fitting half and scored on
/// the other half. Ties between methods go to the earlier one.
DeleteHalfResult delete_half_cv_select(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods,
                                       int repetitions, const TuningOptions& options);
/// Same, reusing full-data constituent fits for the returned fit.
DeleteHalfResult delete_half_cv_select(const StandardizedDesign& design, const std::vector<PenaltySpec>& methods,
                                       int repetitions, const TuningOptions& options,
                                       const std::vector<CvFit>& full_fits);

}  // namespace csuv
