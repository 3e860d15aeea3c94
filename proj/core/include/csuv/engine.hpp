#pragma once

// Combined selection over subsamples: repeated train/test splits, path fits
// from several penalized solvers, retention of the best-scoring models, and
// selection by relative same-sign frequency (tau).

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "csuv/design.hpp"
#include "csuv/penalty.hpp"
#include "csuv/solvers.hpp"

namespace csuv {

enum class PerformanceMeasure { test_mse };

struct CsuvConfig {
    int repetitions = 100;          // B
    double retain_percent = 0.0;    // q, in [0, 50]; 0 keeps the single best model per repetition
    double train_percent = 50.0;    // w, in (0, 100)
    double threshold = 0.5;         // t, in (0, 1]
    std::vector<PenaltySpec> methods{PenaltySpec::lasso(), PenaltySpec::mcp(), PenaltySpec::scad()};
    std::uint64_t seed = 1;
    PerformanceMeasure measure = PerformanceMeasure::test_mse;

    std::size_t path_length = 100;
    double min_ratio = 1e-3;
    FitOptions fit_options{.truncate_on_failure = true};
    /// Whisker percentiles for the conditional coefficient summaries.
    std::array<double, 2> whiskers{5.0, 95.0};
    /// Folds for the ridge fallback in final estimation.
    int ridge_folds = 10;
    /// Worker threads for the repetitions (0 = hardware concurrency).
    int jobs = 0;

    void validate() const;
};

/// One retained-candidate model from a single (repetition, method, lambda).
/// Coefficients live on the scale of the design passed to run_csuv.
struct FittedModel {
    std::vector<int> support;
    std::vector<double> coefficients;  // aligned with support
    double intercept = 0.0;
    double test_mse = 0.0;
    int method = 0;
    int repetition = 0;
    int lambda_index = 0;
    bool refit = false;  // true when coefficients come from the OLS refit

    double coefficient(int j) const;
};

/// The pooled best-performing models over all repetitions.
struct RetainedCollection {
    std::vector<FittedModel> models;
    std::vector<int> candidates_per_repetition;  // K^b after within-method deduplication
    std::vector<int> retained_per_repetition;    // K_q^b
    Index p = 0;

    std::vector<int> support_sizes() const;
};

/// Number of models kept out of `candidates` for a retention percentile q:
/// max(1, round(candidates * q / 100)) with round-half-to-even.
int retained_count(int candidates, double retain_percent);

/// Per-covariate distribution of the estimated coefficients over the
/// retained models.
struct CoefficientSummary {
    int count_nonzero = 0;
    int count_positive = 0;
    int count_negative = 0;
    /// Conditional (nonzero-only) quantiles at 5, 25, 50, 75, 95 percent.
    std::array<double, 5> conditional{};
    /// Conditional quantiles at the configured whisker percentiles.
    std::array<double, 2> whiskers{};
    /// Unconditional quantiles (zeros included) at 5, 25, 50, 75, 95 percent.
    std::array<double, 5> unconditional{};
    std::vector<double> violin_x;
    std::vector<double> violin_density;
};

struct TauVectors {
    Eigen::VectorXd tau;
    Eigen::VectorXd tau_pos;
    Eigen::VectorXd tau_neg;
};

struct FinalFit {
    SubsetFit fit;
    bool used_ridge = false;
    double ridge_lambda = 0.0;
};

struct CsuvResult {
    TauVectors tau;
    /// Average of each covariate's coefficient over every retained model (zeros included).
    Eigen::VectorXd mean_coefficients;
    /// path_order[k] is the covariate at position k + 1 on the solution path.
    std::vector<int> path_order;
    /// rank[j] is the 1-based position of covariate j on the solution path.
    std::vector<int> rank;
    std::vector<int> selected_m;
    std::vector<int> selected_s;
    /// Median retained support size before capping.
    int size_threshold_s = 0;
    FinalFit final_m;
    FinalFit final_s;
    std::vector<CoefficientSummary> summaries;
};

struct CsuvRun {
    RetainedCollection collection;
    CsuvResult result;
};

/// Training rows of repetition b: a seeded permutation's first floor(n * w / 100) rows, sorted.
struct Split {
    std::vector<int> train;
    std::vector<int> test;
};
Split make_split(Index n, double train_percent, std::uint64_t seed, int repetition);

/// Repetitions, retention and pooling (everything before tau).
RetainedCollection collect_models(const StandardizedDesign& design, const CsuvConfig& config);

/// Full run: collection, tau, CSUV-m, solution path, CSUV-s, final
/// coefficients and conditional summaries.
CsuvRun run_csuv(const StandardizedDesign& design, const CsuvConfig& config);

TauVectors compute_tau(const RetainedCollection& collection, Index p);
Eigen::VectorXd mean_coefficients(const RetainedCollection& collection, Index p);

/// Covariates with tau_j >= t, ascending.
std::vector<int> select_by_tau(const Eigen::VectorXd& tau, double t);

/// Order by tau descending, then |mean coefficient| descending, then index.
std::vector<int> solution_path(const Eigen::VectorXd& tau, const Eigen::VectorXd& mean_coefficients);

/// Lower median of the retained support sizes.
int median_size(std::vector<int> sizes);

/// First s covariates on the path where s is the lower median of `sizes`,
/// capped at the number of covariates with tau > 0. Returned ascending.
std::vector<int> csuv_s_select(const std::vector<int>& path_order, const Eigen::VectorXd& tau,
                               const std::vector<int>& sizes);

/// OLS on all rows when |selected| < n, cross-validated ridge otherwise.
FinalFit estimate_final_coefficients(const StandardizedDesign& design, const std::vector<int>& selected,
                                     int ridge_folds, std::uint64_t seed);

/// Type-7 (linear interpolation) quantile of sorted data, percent in [0, 100].
double quantile_sorted(const std::vector<double>& sorted, double percent);

/// Summary of one covariate's coefficients over `total` models, given its
/// nonzero values.
CoefficientSummary summarize_coefficients(std::vector<double> nonzero, int total, std::array<double, 2> whiskers);

/// Gaussian kernel density with Silverman's rule-of-thumb bandwidth on
/// `points` equally spaced points spanning the data +- 3 bandwidths.
void kernel_density(const std::vector<double>& sorted, int points, std::vector<double>& x, std::vector<double>& density);

}  // namespace csuv
