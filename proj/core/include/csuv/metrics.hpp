#pragma once

// Selection and estimation scores plus set-disagreement distances.
// Index sets are 0-based covariate positions; duplicates are ignored.

#include <vector>

#include <Eigen/Dense>

namespace csuv {

struct SelectionScore {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    /// 2tp / (2tp + fn + fp); 1 when all three counts are zero.
    double f_measure = 0.0;
    int total_error() const { return fp + fn; }
};

struct EstimationScore {
    double l1 = 0.0;
    double l2 = 0.0;
    double test_mse = 0.0;
};

SelectionScore selection_score(const std::vector<int>& selected, const std::vector<int>& truth);

/// l1 and l2 over the full coefficient vectors; test_mse is left to the caller.
EstimationScore estimation_score(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

int hamming(const std::vector<int>& a, const std::vector<int>& b);

/// |a xor b| / |a union b|, with 0 for two empty sets.
double jaccard(const std::vector<int>& a, const std::vector<int>& b);

/// selections[r][m] is the set chosen by method m in repetition r. Returns the
/// method-by-method mean Jaccard distance.
Eigen::MatrixXd disagreement_matrix(const std::vector<std::vector<std::vector<int>>>& selections);

}  // namespace csuv
