#include <algorithm>
#include <cmath>
#include <limits>

#include "csuv/error.hpp"
#include "csuv/solvers.hpp"

namespace csuv {

namespace {

constexpr double kRankTolerance = 1e-10;

struct CenteredSubset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::RowVectorXd x_mean;
    double y_mean = 0.0;
};

CenteredSubset center_subset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support,
                             std::span<const int> rows) {
    CenteredSubset c;
    const auto n = static_cast<Index>(rows.size());
    const auto k = static_cast<Index>(support.size());
    c.X.resize(n, k);
    c.y.resize(n);
    for (Index a = 0; a < k; ++a)
        for (Index i = 0; i < n; ++i) c.X(i, a) = X(rows[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(a)]);
    for (Index i = 0; i < n; ++i) c.y(i) = y(rows[static_cast<std::size_t>(i)]);
    c.x_mean = k > 0 ? Eigen::RowVectorXd(c.X.colwise().mean()) : Eigen::RowVectorXd();
    c.y_mean = c.y.mean();
    if (k > 0) c.X.rowwise() -= c.x_mean;
    c.y.array() -= c.y_mean;
    return c;
}

std::vector<int> all_rows(Index n) {
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = static_cast<int>(i);
    return rows;
}

void check_support(std::span<const int> support, Index p) {
    for (std::size_t a = 0; a < support.size(); ++a) {
        if (support[a] < 0 || support[a] >= p) throw InvalidInput("support index out of range");
        if (a > 0 && support[a] <= support[a - 1]) throw InvalidInput("support must be strictly increasing");
    }
}

// Ridge solutions for many lambdas from one thin SVD of the centered subset.
class RidgeSystem {
public:
    explicit RidgeSystem(CenteredSubset data)
        : data_(std::move(data)), svd_(data_.X, Eigen::ComputeThinU | Eigen::ComputeThinV) {
        uty_ = svd_.matrixU().transpose() * data_.y;
    }

    SubsetFit solve(std::span<const int> support, double lambda) const {
        const double n = static_cast<double>(data_.X.rows());
        const Eigen::VectorXd& d = svd_.singularValues();
        Eigen::VectorXd shrink(d.size());
        for (Index i = 0; i < d.size(); ++i) shrink(i) = d(i) / (d(i) * d(i) + n * lambda);
        SubsetFit fit;
        fit.support.assign(support.begin(), support.end());
        fit.coefficients = svd_.matrixV() * shrink.cwiseProduct(uty_);
        fit.intercept = data_.y_mean - data_.x_mean.dot(fit.coefficients);
        return fit;
    }

private:
    CenteredSubset data_;
    Eigen::BDCSVD<Eigen::MatrixXd> svd_;
    Eigen::VectorXd uty_;
};

double squared_error(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SubsetFit& fit, std::span<const int> rows) {
    double total = 0.0;
    for (int i : rows) {
        double pred = fit.intercept;
        for (std::size_t a = 0; a < fit.support.size(); ++a)
            pred += X(i, fit.support[a]) * fit.coefficients(static_cast<Index>(a));
        total += (y(i) - pred) * (y(i) - pred);
    }
    return total;
}

}  // namespace

Eigen::VectorXd SubsetFit::dense(Index p) const {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (std::size_t a = 0; a < support.size(); ++a) beta(support[a]) = coefficients(static_cast<Index>(a));
    return beta;
}

SubsetFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support) {
    if (y.size() != X.rows()) throw InvalidInput("response length does not match the number of rows");
    check_support(support, X.cols());
    const auto k = static_cast<Index>(support.size());
    if (k >= X.rows()) throw TooManyCovariates(support.size(), static_cast<std::size_t>(X.rows()));

    SubsetFit fit;
    fit.support.assign(support.begin(), support.end());
    if (k == 0) {
        fit.coefficients.resize(0);
        fit.intercept = y.mean();
        return fit;
    }

    const std::vector<int> rows = all_rows(X.rows());
    const CenteredSubset c = center_subset(X, y, support, rows);
    // Pivoted QR: |R_ii| below kRankTolerance * max |R_ii| counts as zero.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c.X);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < k) {
        std::vector<int> dependent;
        const auto& perm = qr.colsPermutation().indices();
        for (Index a = qr.rank(); a < k; ++a) dependent.push_back(support[static_cast<std::size_t>(perm(a))]);
        std::sort(dependent.begin(), dependent.end());
        throw RankDeficient(std::move(dependent));
    }
    fit.coefficients = qr.solve(c.y);
    fit.intercept = c.y_mean - c.x_mean.dot(fit.coefficients);
    return fit;
}

SubsetFit ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support, double lambda) {
    if (support.empty()) throw InvalidInput("ridge fit needs a non-empty support");
    if (!(lambda >= 0.0)) throw InvalidInput("ridge lambda must be non-negative");
    check_support(support, X.cols());
    return RidgeSystem(center_subset(X, y, support, all_rows(X.rows()))).solve(support, lambda);
}

LambdaPath make_ridge_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support) {
    if (support.empty()) throw InvalidInput("ridge path needs a non-empty support");
    check_support(support, X.cols());
    const CenteredSubset c = center_subset(X, y, support, all_rows(X.rows()));
    const double n = static_cast<double>(X.rows());
    double hi = 0.0;
    for (Index a = 0; a < c.X.cols(); ++a) {
        const double norm = std::sqrt(c.X.col(a).squaredNorm() / n);
        if (norm > 0.0) hi = std::max(hi, std::abs(c.X.col(a).dot(c.y)) / (n * norm));
    }
    if (!(hi > 0.0)) hi = 1.0;
    const double ratio = X.rows() < static_cast<Index>(support.size()) ? 1e-2 : 1e-4;
    return make_lambda_path(1000.0 * hi, ratio, 100);
}

RidgeCvFit ridge_cv_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const int> support,
                        const LambdaPath& ridge_path, int folds, std::uint64_t seed) {
    if (support.empty()) throw InvalidInput("ridge cross-validation needs a non-empty support");
    if (ridge_path.size() == 0) throw InvalidInput("empty ridge path");
    check_support(support, X.cols());
    const auto n = static_cast<std::size_t>(X.rows());
    const std::vector<int> label = assign_folds(n, folds, seed);

    std::vector<double> sse(ridge_path.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, held;
        for (std::size_t i = 0; i < n; ++i) (label[i] == f ? held : train).push_back(static_cast<int>(i));
        const RidgeSystem system(center_subset(X, y, support, train));
        for (std::size_t l = 0; l < ridge_path.size(); ++l)
            sse[l] += squared_error(X, y, system.solve(support, ridge_path.values[l]), held);
    }

    RidgeCvFit out;
    out.cv_error.resize(ridge_path.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < sse.size(); ++l) {
        out.cv_error[l] = sse[l] / static_cast<double>(n);
        if (out.cv_error[l] < best) {
            best = out.cv_error[l];
            out.lambda_index = l;
        }
    }
    out.lambda = ridge_path.values[out.lambda_index];
    out.fit = ridge_fit(X, y, support, out.lambda);
    return out;
}

}  // namespace csuv
