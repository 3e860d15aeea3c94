#include "csuv/design.hpp"

#include <cmath>

#include "csuv/error.hpp"

namespace csuv {

namespace {

void center_and_scale(Eigen::MatrixXd& X, Eigen::VectorXd& means, Eigen::VectorXd& scales, bool allow_constant) {
    const double n = static_cast<double>(X.rows());
    means.resize(X.cols());
    scales.resize(X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        auto col = X.col(j);
        const double mean = col.mean();
        col.array() -= mean;
        const double scale = std::sqrt(col.squaredNorm() / n);
        means(j) = mean;
        // Relative test so that columns which are constant up to rounding are caught.
        const double magnitude = std::max(1.0, std::abs(mean));
        if (!(scale > 1e-12 * magnitude)) {
            if (!allow_constant) throw ConstantColumn(static_cast<std::size_t>(j));
            col.setZero();
            scales(j) = 0.0;
            continue;
        }
        col /= scale;
        scales(j) = scale;
    }
}

}  // namespace

StandardizedDesign standardize(const Eigen::MatrixXd& raw_X, const Eigen::VectorXd& y, std::vector<std::string> names) {
    if (raw_X.rows() < 2) throw InvalidInput("standardize needs at least 2 rows");
    if (raw_X.cols() < 1) throw InvalidInput("standardize needs at least 1 column");
    if (y.size() != raw_X.rows()) throw InvalidInput("response length does not match the number of rows");
    if (!raw_X.allFinite()) throw InvalidInput("design matrix contains non-finite values");
    if (!y.allFinite()) throw InvalidInput("response contains non-finite values");
    if (!names.empty() && static_cast<Index>(names.size()) != raw_X.cols())
        throw InvalidInput("number of column names does not match the number of columns");

    StandardizedDesign d;
    d.X = raw_X;
    d.y = y;
    center_and_scale(d.X, d.column_means, d.column_scales, false);
    if (names.empty()) {
        names.reserve(static_cast<std::size_t>(raw_X.cols()));
        for (Index j = 0; j < raw_X.cols(); ++j) names.push_back("X" + std::to_string(j + 1));
    }
    d.names = std::move(names);
    return d;
}

StandardizedDesign standardize_rows(const StandardizedDesign& parent, std::span<const int> rows) {
    if (rows.size() < 2) throw InvalidInput("row subset needs at least 2 rows");
    StandardizedDesign d;
    const Index n = static_cast<Index>(rows.size());
    d.X.resize(n, parent.cols());
    d.y.resize(n);
    for (Index j = 0; j < parent.cols(); ++j) {
        for (Index i = 0; i < n; ++i) d.X(i, j) = parent.X(rows[static_cast<std::size_t>(i)], j);
    }
    for (Index i = 0; i < n; ++i) d.y(i) = parent.y(rows[static_cast<std::size_t>(i)]);
    center_and_scale(d.X, d.column_means, d.column_scales, true);
    d.names = parent.names;
    return d;
}

LinearModel to_parent_scale(const StandardizedDesign& design, const Eigen::VectorXd& beta_std) {
    LinearModel m;
    m.beta = Eigen::VectorXd::Zero(beta_std.size());
    double shift = 0.0;
    for (Index j = 0; j < beta_std.size(); ++j) {
        if (beta_std(j) == 0.0 || design.column_scales(j) == 0.0) continue;
        m.beta(j) = beta_std(j) / design.column_scales(j);
        shift += design.column_means(j) * m.beta(j);
    }
    m.intercept = design.y_mean() - shift;
    return m;
}

double mean_squared_error(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinearModel& model,
                          std::span<const int> rows) {
    if (rows.empty()) throw InvalidInput("mean_squared_error needs at least one row");
    const std::vector<int> support = support_of(model.beta);
    double total = 0.0;
    for (int i : rows) {
        double pred = model.intercept;
        for (int j : support) pred += X(i, j) * model.beta(j);
        const double r = y(i) - pred;
        total += r * r;
    }
    return total / static_cast<double>(rows.size());
}

std::vector<int> support_of(const Eigen::VectorXd& beta) {
    std::vector<int> s;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta(j) != 0.0) s.push_back(static_cast<int>(j));
    return s;
}

}  // namespace csuv
