#pragma once

// Synthetic regression designs: Toeplitz, block and factor covariances,
// sparse coefficient laws, and the covariate-permutation protocol.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csuv/design.hpp"
#include "csuv/random.hpp"

namespace csuv {

enum class SimModel { m1, m2_toeplitz, m3_block, m4_factor, m5_decay };

std::string model_name(SimModel model);
SimModel parse_model(const std::string& text);

struct ModelSpec {
    SimModel model = SimModel::m2_toeplitz;
    Index n = 100;
    Index p = 100;
    Index s = 5;
    double sigma = 1.0;
    /// rho for Models 1, 2 and 5, within-class correlation for Model 3,
    /// number of factors J for Model 4.
    double parameter = 0.0;
    std::uint64_t seed = 1;

    void validate() const;

    static ModelSpec model1(double sigma = 1.0, std::uint64_t seed = 1);
    static ModelSpec model2(Index p, Index s, double rho, std::uint64_t seed = 1);
    static ModelSpec model3(Index p, Index s, double block_correlation, std::uint64_t seed = 1);
    static ModelSpec model4(Index p, Index s, int factors, std::uint64_t seed = 1);
    static ModelSpec model5(Index p, Index s, double rho, std::uint64_t seed = 1);
};

struct GeneratedDataset {
    /// Standardized covariates with y = X beta + noise.
    StandardizedDesign design;
    Eigen::VectorXd true_beta;
    std::vector<int> true_support;
};

/// Realization `realization` of the model. The coefficients (and Model 4
/// loadings) depend only on the spec, so every realization shares them.
GeneratedDataset generate(const ModelSpec& spec, int realization = 0);

/// Fresh rows from the same law for prediction error, standardized with the
/// column means and scales of `train`.
GeneratedDataset generate_test(const ModelSpec& spec, const GeneratedDataset& train, int realization, Index rows);

/// True coefficients of the model; Models 2-4 draw a random support with
/// floor(s/2) values from U(0.5, 1.5) and ceil(s/2) from U(-1.5, -0.5).
Eigen::VectorXd generate_beta(SimModel model, Index p, Index s, std::uint64_t seed);

/// Population covariance of the raw covariates.
Eigen::MatrixXd population_covariance(const ModelSpec& spec);
/// Population correlation (the covariance of the standardized covariates).
Eigen::MatrixXd population_correlation(const ModelSpec& spec);

Eigen::MatrixXd toeplitz_covariance(Index p, double rho);
/// Unit diagonal; `correlation` between columns whose 1-based indices agree mod 10.
Eigen::MatrixXd block_covariance(Index p, double correlation);
/// p x J loadings with i.i.d. standard normal entries, fixed by the seed.
Eigen::MatrixXd factor_loadings(Index p, int factors, std::uint64_t seed);

/// n rows i.i.d. N(0, sigma) through the Cholesky factor. Throws InvalidInput
/// naming the leading minor that is not positive definite.
Eigen::MatrixXd cholesky_gaussian(const Eigen::MatrixXd& sigma, Index n, SplitMix64& rng);

/// Applies one random row permutation to every column not in `keep`
/// (0-based). Kept columns are untouched.
Eigen::MatrixXd permute_covariates(const Eigen::MatrixXd& X, const std::vector<int>& keep, std::uint64_t seed);

/// Draws keep_count columns uniformly from the pool_size columns with the
/// largest |corr(X_j, y)| (ties to the lower index). Returned ascending.
std::vector<int> select_keep_by_marginal_correlation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                     Index pool_size, Index keep_count, std::uint64_t seed);

}  // namespace csuv
