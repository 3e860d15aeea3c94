#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace csuv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, range, finiteness).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A column has zero variance and cannot be standardized.
class ConstantColumn : public InvalidInput {
public:
    explicit ConstantColumn(std::size_t column)
        : InvalidInput("column " + std::to_string(column + 1) + " is constant"), column_(column) {}

    /// Zero-based column index.
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// Coordinate descent hit the sweep limit before meeting the tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::size_t lambda_index, double max_update)
        : Error("coordinate descent did not converge at lambda index " + std::to_string(lambda_index) +
                " (max coefficient update " + std::to_string(max_update) + ")"),
          lambda_index_(lambda_index),
          max_update_(max_update) {}

    std::size_t lambda_index() const noexcept { return lambda_index_; }
    double max_update() const noexcept { return max_update_; }

private:
    std::size_t lambda_index_;
    double max_update_;
};

/// Least squares design restricted to a support is not of full column rank.
class RankDeficient : public Error {
public:
    explicit RankDeficient(std::vector<int> dependent)
        : Error(describe(dependent)), dependent_(std::move(dependent)) {}

    /// Zero-based covariate indices of columns found linearly dependent on the others.
    const std::vector<int>& dependent_columns() const noexcept { return dependent_; }

private:
    static std::string describe(const std::vector<int>& cols) {
        std::string msg = "rank deficient design; dependent columns:";
        for (int c : cols) msg += " " + std::to_string(c + 1);
        return msg;
    }
    std::vector<int> dependent_;
};

/// Support has at least as many covariates as rows; OLS is not identifiable.
class TooManyCovariates : public Error {
public:
    TooManyCovariates(std::size_t k, std::size_t n)
        : Error("support of size " + std::to_string(k) + " needs fewer covariates than rows (" +
                std::to_string(n) + ")") {}
};

}  // namespace csuv
