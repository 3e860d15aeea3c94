#pragma once

// Comma-separated numeric tables: header row, '.' decimals, no missing values.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace csuv {

struct NumericTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;  // rows x header.size()

    /// Position of a named column; throws InvalidInput when absent.
    Eigen::Index column(const std::string& name) const;
};

/// Parses a table. Errors (ragged rows, empty or non-numeric cells) throw
/// InvalidInput with the 1-based line and column.
NumericTable read_csv(std::istream& in);
NumericTable read_csv_file(const std::string& path);

/// Splits a table into covariates and the named response column.
struct RegressionData {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;
};
RegressionData split_response(const NumericTable& table, const std::string& response);

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

/// Round-trip safe text for a double (shortest form that parses back exactly).
std::string format_double(double v);

}  // namespace csuv
