#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace csuv {

using Index = Eigen::Index;

/// Column-standardized regression data. Each column of X has mean 0 and
/// mean square 1 (divisor n). The response is stored uncentered; the
/// intercept is carried implicitly through mean(y).
///
/// column_means / column_scales map X back to the units of whatever matrix
/// it was standardized from: raw_j = column_means_j + column_scales_j * X_j.
struct StandardizedDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_scales;
    std::vector<std::string> names;

    Index rows() const { return X.rows(); }
    Index cols() const { return X.cols(); }
    double y_mean() const { return y.mean(); }
};

/// Standardizes raw data. Throws ConstantColumn for zero-variance columns and
/// InvalidInput for non-finite values or fewer than two rows.
StandardizedDesign standardize(const Eigen::MatrixXd& raw_X, const Eigen::VectorXd& y,
                               std::vector<std::string> names = {});

/// Rows of `parent` re-standardized on their own. Columns that are constant
/// within the subset become all-zero with scale 0; solvers leave such
/// columns out. Means and scales are expressed in the parent's units.
StandardizedDesign standardize_rows(const StandardizedDesign& parent, std::span<const int> rows);

/// Coefficients on a design's own standardized scale converted to the scale
/// of the matrix it was standardized from, together with the intercept.
struct LinearModel {
    Eigen::VectorXd beta;
    double intercept = 0.0;
};

LinearModel to_parent_scale(const StandardizedDesign& design, const Eigen::VectorXd& beta_std);

/// Mean squared prediction error of (intercept, beta) on the given rows of X.
double mean_squared_error(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinearModel& model,
                          std::span<const int> rows);

/// Support {j : beta_j != 0} in ascending order.
std::vector<int> support_of(const Eigen::VectorXd& beta);

}  // namespace csuv
