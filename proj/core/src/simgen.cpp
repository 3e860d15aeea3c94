#include "csuv/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csuv/error.hpp"

namespace csuv {

std::string model_name(SimModel model) {
    switch (model) {
        case SimModel::m1: return "m1";
        case SimModel::m2_toeplitz: return "m2";
        case SimModel::m3_block: return "m3";
        case SimModel::m4_factor: return "m4";
        case SimModel::m5_decay: return "m5";
    }
    return "m?";
}

SimModel parse_model(const std::string& text) {
    if (text == "m1" || text == "model1") return SimModel::m1;
    if (text == "m2" || text == "model2" || text == "toeplitz") return SimModel::m2_toeplitz;
    if (text == "m3" || text == "model3" || text == "block") return SimModel::m3_block;
    if (text == "m4" || text == "model4" || text == "factor") return SimModel::m4_factor;
    if (text == "m5" || text == "model5" || text == "decay") return SimModel::m5_decay;
    throw InvalidInput("unknown model '" + text + "'");
}

void ModelSpec::validate() const {
    if (n < 2) throw InvalidInput("model needs at least 2 observations");
    if (p < 1) throw InvalidInput("model needs at least one covariate");
    if (s < 0 || s > p) throw InvalidInput("true support size must lie in [0, p]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("noise level must be finite and nonnegative");
    switch (model) {
        case SimModel::m1:
            if (p != 8 || s != 3) throw InvalidInput("Model 1 has p = 8 and s = 3");
            [[fallthrough]];
        case SimModel::m2_toeplitz:
        case SimModel::m5_decay:
            if (!(std::abs(parameter) < 1.0)) throw InvalidInput("Toeplitz rho must satisfy |rho| < 1");
            break;
        case SimModel::m3_block:
            if (!(parameter > -1.0 && parameter < 1.0)) throw InvalidInput("block correlation must lie in (-1, 1)");
            break;
        case SimModel::m4_factor:
            if (parameter < 1.0 || parameter != std::floor(parameter)) throw InvalidInput("factor count must be a positive integer");
            break;
    }
}

ModelSpec ModelSpec::model1(double sigma, std::uint64_t seed) { return {SimModel::m1, 50, 8, 3, sigma, 0.5, seed}; }
ModelSpec ModelSpec::model2(Index p, Index s, double rho, std::uint64_t seed) {
    return {SimModel::m2_toeplitz, 100, p, s, 1.0, rho, seed};
}
ModelSpec ModelSpec::model3(Index p, Index s, double block_correlation, std::uint64_t seed) {
    return {SimModel::m3_block, 100, p, s, 1.0, block_correlation, seed};
}
ModelSpec ModelSpec::model4(Index p, Index s, int factors, std::uint64_t seed) {
    return {SimModel::m4_factor, 100, p, s, 1.0, static_cast<double>(factors), seed};
}
ModelSpec ModelSpec::model5(Index p, Index s, double rho, std::uint64_t seed) {
    return {SimModel::m5_decay, 100, p, s, 1.0, rho, seed};
}

Eigen::MatrixXd toeplitz_covariance(Index p, double rho) {
    Eigen::MatrixXd S(p, p);
    for (Index k = 0; k < p; ++k)
        for (Index m = 0; m < p; ++m) S(k, m) = k == m ? 1.0 : std::pow(rho, static_cast<double>(std::abs(k - m)));
    return S;
}

Eigen::MatrixXd block_covariance(Index p, double correlation) {
    Eigen::MatrixXd S(p, p);
    for (Index k = 0; k < p; ++k)
        for (Index m = 0; m < p; ++m) S(k, m) = k == m ? 1.0 : ((k + 1) % 10 == (m + 1) % 10 ? correlation : 0.0);
    return S;
}

Eigen::MatrixXd factor_loadings(Index p, int factors, std::uint64_t seed) {
    auto rng = SplitMix64::stream(seed, "factor-loadings");
    Eigen::MatrixXd F(p, factors);
    for (Index k = 0; k < p; ++k)
        for (Index j = 0; j < factors; ++j) F(k, j) = standard_normal(rng);
    return F;
}

Eigen::MatrixXd population_covariance(const ModelSpec& spec) {
    spec.validate();
    switch (spec.model) {
        case SimModel::m1:
        case SimModel::m2_toeplitz:
        case SimModel::m5_decay: return toeplitz_covariance(spec.p, spec.parameter);
        case SimModel::m3_block: return block_covariance(spec.p, spec.parameter);
        case SimModel::m4_factor: {
            const Eigen::MatrixXd F = factor_loadings(spec.p, static_cast<int>(spec.parameter), spec.seed);
            return F * F.transpose() + Eigen::MatrixXd::Identity(spec.p, spec.p);
        }
    }
    throw InvalidInput("unknown model");
}

Eigen::MatrixXd population_correlation(const ModelSpec& spec) {
    const Eigen::MatrixXd S = population_covariance(spec);
    const Eigen::VectorXd inv_sd = S.diagonal().array().rsqrt();
    return inv_sd.asDiagonal() * S * inv_sd.asDiagonal();
}

Eigen::MatrixXd cholesky_gaussian(const Eigen::MatrixXd& sigma, Index n, SplitMix64& rng) {
    const Index p = sigma.rows();
    if (sigma.cols() != p) throw InvalidInput("covariance must be square");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        Index order = p;
        for (Index k = 1; k <= p; ++k) {
            Eigen::LLT<Eigen::MatrixXd> lead(sigma.topLeftCorner(k, k));
            if (lead.info() != Eigen::Success) {
                order = k;
                break;
            }
        }
        throw InvalidInput("covariance is not positive definite: leading minor of order " + std::to_string(order));
    }
    Eigen::MatrixXd Z(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) Z(i, j) = standard_normal(rng);
    return Z * llt.matrixU();
}

Eigen::VectorXd generate_beta(SimModel model, Index p, Index s, std::uint64_t seed) {
    if (s < 0 || s > p) throw InvalidInput("true support size must lie in [0, p]");
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    switch (model) {
        case SimModel::m1:
            if (p != 8) throw InvalidInput("Model 1 has p = 8");
            beta << 3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0;
            return beta;
        case SimModel::m5_decay:
            for (Index j = 0; j < s; ++j) beta(j) = 6.0 / static_cast<double>(j + 1);
            return beta;
        default: break;
    }
    auto support_rng = SplitMix64::stream(seed, "beta-support");
    std::vector<int> perm = random_permutation(support_rng, static_cast<std::size_t>(p));
    auto value_rng = SplitMix64::stream(seed, "beta-values");
    const Index positive = s / 2;
    for (Index a = 0; a < s; ++a) {
        const double v = a < positive ? uniform(value_rng, 0.5, 1.5) : uniform(value_rng, -1.5, -0.5);
        beta(perm[static_cast<std::size_t>(a)]) = v;
    }
    return beta;
}

namespace {

Eigen::MatrixXd draw_covariates(const ModelSpec& spec, Index rows, SplitMix64& rng) {
    if (spec.model == SimModel::m4_factor) {
        const int J = static_cast<int>(spec.parameter);
        const Eigen::MatrixXd F = factor_loadings(spec.p, J, spec.seed);
        Eigen::MatrixXd phi(rows, J);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < J; ++j) phi(i, j) = standard_normal(rng);
        Eigen::MatrixXd X = phi * F.transpose();
        for (Index i = 0; i < rows; ++i)
            for (Index k = 0; k < spec.p; ++k) X(i, k) += standard_normal(rng);
        return X;
    }
    return cholesky_gaussian(population_covariance(spec), rows, rng);
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& signal, double sigma, SplitMix64& rng) {
    Eigen::VectorXd y = signal;
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * standard_normal(rng);
    return y;
}

}  // namespace

GeneratedDataset generate(const ModelSpec& spec, int realization) {
    spec.validate();
    GeneratedDataset out;
    out.true_beta = generate_beta(spec.model, spec.p, spec.s, spec.seed);
    out.true_support = support_of(out.true_beta);

    const auto r = static_cast<std::uint64_t>(realization);
    auto x_rng = SplitMix64::stream(spec.seed, "design", r);
    const Eigen::MatrixXd raw = draw_covariates(spec, spec.n, x_rng);
    out.design = standardize(raw, Eigen::VectorXd::Zero(spec.n));
    auto noise_rng = SplitMix64::stream(spec.seed, "noise", r);
    out.design.y = add_noise(out.design.X * out.true_beta, spec.sigma, noise_rng);
    return out;
}

GeneratedDataset generate_test(const ModelSpec& spec, const GeneratedDataset& train, int realization, Index rows) {
    spec.validate();
    if (rows < 1) throw InvalidInput("test set needs at least one row");
    GeneratedDataset out;
    out.true_beta = train.true_beta;
    out.true_support = train.true_support;

    const auto r = static_cast<std::uint64_t>(realization);
    auto x_rng = SplitMix64::stream(spec.seed, "test-design", r);
    const Eigen::MatrixXd raw = draw_covariates(spec, rows, x_rng);
    const StandardizedDesign& ref = train.design;
    out.design.X = (raw.rowwise() - ref.column_means.transpose()).array().rowwise() / ref.column_scales.transpose().array();
    out.design.column_means = ref.column_means;
    out.design.column_scales = ref.column_scales;
    out.design.names = ref.names;
    auto noise_rng = SplitMix64::stream(spec.seed, "test-noise", r);
    out.design.y = add_noise(out.design.X * out.true_beta, spec.sigma, noise_rng);
    return out;
}

Eigen::MatrixXd permute_covariates(const Eigen::MatrixXd& X, const std::vector<int>& keep, std::uint64_t seed) {
    std::vector<bool> kept(static_cast<std::size_t>(X.cols()), false);
    for (int j : keep) {
        if (j < 0 || j >= X.cols()) throw InvalidInput("kept column out of range");
        kept[static_cast<std::size_t>(j)] = true;
    }
    auto rng = SplitMix64::stream(seed, "covariate-permutation");
    const std::vector<int> pi = random_permutation(rng, static_cast<std::size_t>(X.rows()));
    Eigen::MatrixXd out = X;
    for (Index j = 0; j < X.cols(); ++j) {
        if (kept[static_cast<std::size_t>(j)]) continue;
        for (Index i = 0; i < X.rows(); ++i) out(i, j) = X(pi[static_cast<std::size_t>(i)], j);
    }
    return out;
}

std::vector<int> select_keep_by_marginal_correlation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                     Index pool_size, Index keep_count, std::uint64_t seed) {
    const Index p = X.cols();
    if (!(p >= pool_size && pool_size >= keep_count && keep_count >= 0))
        throw InvalidInput("need p >= pool size >= keep count >= 0");
    if (X.rows() != y.size()) throw InvalidInput("X and y differ in rows");

    const Eigen::VectorXd yc = y.array() - y.mean();
    const double y_norm = yc.norm();
    std::vector<double> score(static_cast<std::size_t>(p), 0.0);
    for (Index j = 0; j < p; ++j) {
        const Eigen::VectorXd xc = X.col(j).array() - X.col(j).mean();
        const double denom = xc.norm() * y_norm;
        score[static_cast<std::size_t>(j)] = denom > 0.0 ? std::abs(xc.dot(yc)) / denom : 0.0;
    }
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)]; });
    order.resize(static_cast<std::size_t>(pool_size));

    auto rng = SplitMix64::stream(seed, "keep-draw");
    for (std::size_t a = 0; a < static_cast<std::size_t>(keep_count); ++a) {
        const std::size_t b = uniform_index(rng, a, order.size() - 1);
        std::swap(order[a], order[b]);
    }
    order.resize(static_cast<std::size_t>(keep_count));
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace csuv
