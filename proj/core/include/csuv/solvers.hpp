#pragma once

// Penalized least squares over lambda paths by cyclic coordinate descent,
// cross-validated tuning, and the unpenalized / ridge refits.
//
// Objective for every family, on a standardized design:
//   (1 / 2n) * ||y - mean(y) - X b||^2 + sum_j P(b_j; lambda)
// The intercept is never penalized and equals mean(y).

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csuv/design.hpp"
#include "csuv/penalty.hpp"

namespace csuv {

/// Strictly decreasing, log-equally spaced lambda values. values.front()
/// is lambda_max; values.back() is min_ratio * lambda_max.
struct LambdaPath {
    std::vector<double> values;
    double min_ratio = 1e-3;

    std::size_t size() const { return values.size(); }
};

/// Smallest lambda whose solution is identically zero.
double lambda_max(const StandardizedDesign& design, const PenaltySpec& penalty);

LambdaPath make_lambda_path(const StandardizedDesign& design, const PenaltySpec& penalty,
                            std::size_t length = 100, double min_ratio = 1e-3);

/// Log-spaced path between explicit end points (length 1 gives {hi}).
LambdaPath make_lambda_path(double hi, double min_ratio, std::size_t length);

struct FitOptions {
    /// Converged when a full sweep changes no coefficient by more than this.
    double tolerance = 1e-7;
    /// Upper bound on sweeps (full plus active-set) per lambda.
    int max_sweeps = 10000;
    /// Stop the path after the first lambda whose fit is saturated: support
    /// of size >= n - 1 or training R^2 >= 0.999.
    bool stop_when_saturated = true;
    /// On non-convergence return the lambdas fitted so far instead of
    /// throwing. A failure at the first lambda still throws.
    bool truncate_on_failure = false;
};

struct PathPoint {
    double lambda = 0.0;
    Eigen::VectorXd beta;  // standardized scale
    double intercept = 0.0;
    std::vector<int> support;
    int sweeps = 0;
};

struct PathFit {
    PenaltySpec penalty;
    std::vector<PathPoint> points;

    std::size_t size() const { return points.size(); }
};

/// Fits the whole path with warm starts. Throws ConvergenceError if any
/// lambda exceeds the sweep budget.
PathFit fit_path(const StandardizedDesign& design, const PenaltySpec& penalty, const LambdaPath& path,
                 const FitOptions& options = {});

/// Single-lambda fit from a given starting point (zero when empty).
PathPoint fit_single(const StandardizedDesign& design, const PenaltySpec& penalty, double lambda,
                     const Eigen::VectorXd& start = {}, const FitOptions& options = {});

/// Penalized objective value at beta (standardized scale).
double objective(const StandardizedDesign& design, const PenaltySpec& penalty, double lambda,
                 const Eigen::VectorXd& beta);

/// Largest violation of the stationarity conditions at beta.
double kkt_residual(const StandardizedDesign& design, const PenaltySpec& penalty, double lambda,
                    const Eigen::VectorXd& beta);

/// Fold labels 0..folds-1: contiguous blocks of a seeded row permutation.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

struct CvFit {
    std::size_t lambda_index = 0;
    double lambda = 0.0;
    /// Coefficients at lambda* fitted on all rows, on the scale of design.X.
    Eigen::VectorXd beta;
    double intercept = 0.0;
    /// Mean out-of-fold squared error per lambda (only lambdas reached by every fold).
    std::vector<double> cv_error;
};

/// K-fold cross-validation over `path`; lambda* minimizes mean out-of-fold
/// squared prediction error. Ties go to the larger lambda.
CvFit kfold_cv_tune(const StandardizedDesign& design, const PenaltySpec& penalty, const LambdaPath& path,
                    int folds, std::uint64_t seed, const FitOptions& options = {});

/// Least squares fit on the columns in `support` with an intercept.
struct SubsetFit {
    std::vector<int> support;
    Eigen::VectorXd coefficients;  // aligned with support
    double intercept = 0.0;

    /// Dense length-p coefficient vector.
    Eigen::VectorXd dense(Index p) const;
};

/// OLS with intercept on X restricted to `support`. Rank test: pivoted QR,
/// pivots below 1e-10 times the largest count as zero. Throws
/// TooManyCovariates when |support| >= rows and RankDeficient otherwise.
SubsetFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support);

/// Ridge with intercept, objective (1/2n)||y - a - X_S b||^2 + (lambda/2)||b||^2.
SubsetFit ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support,
                    double lambda);

/// Default ridge path: 100 values from 1000 * max_j |x_j' y_c| / n down by
/// a ratio of 1e-4 (1e-2 when rows < |support|).
LambdaPath make_ridge_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support);

struct RidgeCvFit {
    SubsetFit fit;
    double lambda = 0.0;
    std::size_t lambda_index = 0;
    std::vector<double> cv_error;
};

/// Ridge tuned by K-fold CV over `ridge_path`. Throws InvalidInput for an
/// empty support.
RidgeCvFit ridge_cv_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support,
                        const LambdaPath& ridge_path, int folds, std::uint64_t seed);

}  // namespace csuv
