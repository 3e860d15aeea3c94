#include "csuv/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "csuv/error.hpp"

namespace csuv {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        std::string cell = trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
        cells.push_back(std::move(cell));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string where(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

Eigen::Index NumericTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<Eigen::Index>(j);
    throw InvalidInput("column '" + name + "' not found");
}

NumericTable read_csv(std::istream& in) {
    NumericTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (line_no == 0 || trim(line).empty()) throw InvalidInput("CSV input is empty");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    t.header = split_line(line);
    for (std::size_t j = 0; j < t.header.size(); ++j)
        if (t.header[j].empty()) throw InvalidInput("empty header name at " + where(line_no, j + 1));

    std::vector<double> flat;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != t.header.size())
            throw InvalidInput("expected " + std::to_string(t.header.size()) + " fields but found " +
                               std::to_string(cells.size()) + " on line " + std::to_string(line_no));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string& c = cells[j];
            if (c.empty() || c == "NA" || c == "NaN" || c == "nan")
                throw InvalidInput("missing value at " + where(line_no, j + 1));
            double v = 0.0;
            const char* first = c.data();
            if (*first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size() || !std::isfinite(v))
                throw InvalidInput("non-numeric value '" + c + "' at " + where(line_no, j + 1));
            flat.push_back(v);
        }
        ++rows;
    }
    const auto cols = static_cast<Eigen::Index>(t.header.size());
    t.values.resize(static_cast<Eigen::Index>(rows), cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            t.values(static_cast<Eigen::Index>(i), j) = flat[i * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
    return t;
}

NumericTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return read_csv(in);
}

RegressionData split_response(const NumericTable& table, const std::string& response) {
    const Eigen::Index r = table.column(response);
    RegressionData d;
    d.y = table.values.col(r);
    d.X.resize(table.values.rows(), table.values.cols() - 1);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
        if (j == r) continue;
        d.X.col(k++) = table.values.col(j);
        d.names.push_back(table.header[static_cast<std::size_t>(j)]);
    }
    return d;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols()) throw InvalidInput("header and table widths differ");
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
        out << '\n';
    }
}

}  // namespace csuv
