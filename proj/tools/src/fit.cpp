#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "csuv/baselines.hpp"
#include "csuv/error.hpp"
#include "csuv_cli/commands.hpp"

namespace csuv::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string names_of(const std::vector<int>& idx, const std::vector<std::string>& names) {
    if (idx.empty()) return "(none)";
    std::string out;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        if (a) out += ", ";
        out += names[static_cast<std::size_t>(idx[a])];
    }
    return out;
}

}  // namespace

std::vector<PenaltySpec> parse_methods(const std::string& list) {
    std::vector<PenaltySpec> out;
    for (const auto& name : split_list(list)) out.push_back(PenaltySpec::parse(name));
    if (out.empty()) throw InvalidInput("no methods given");
    return out;
}

std::array<double, 2> parse_whiskers(const std::string& text) {
    const auto parts = split_list(text);
    if (parts.size() != 2) throw InvalidInput("whiskers must be given as LOW,HIGH");
    std::array<double, 2> w{};
    for (std::size_t k = 0; k < 2; ++k) {
        try {
            std::size_t used = 0;
            w[k] = std::stod(parts[k], &used);
            if (used != parts[k].size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw InvalidInput("whisker percentile '" + parts[k] + "' is not a number");
        }
    }
    return w;
}

std::vector<ComparisonFit> read_comparisons(const std::string& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    std::string header_line;
    std::getline(in, header_line);
    std::stringstream rest;
    rest << in.rdbuf();

    // The label column is text, so parse it apart from the numeric body.
    std::vector<std::string> labels;
    std::stringstream numeric;
    std::string line;
    const auto header = split_list(header_line);
    if (header.empty() || header.front() != "label") throw InvalidInput("comparison table must start with a 'label' column");
    numeric << header_line.substr(header_line.find(',') + 1) << '\n';
    std::size_t line_no = 1;
    while (std::getline(rest, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidInput("comparison row on line " + std::to_string(line_no) + " has no values");
        labels.push_back(line.substr(0, comma));
        numeric << line.substr(comma + 1) << '\n';
    }
    const NumericTable table = read_csv(numeric);

    std::vector<ComparisonFit> out;
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(names.size()));
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            const auto it = std::find(names.begin(), names.end(), table.header[c]);
            if (it == names.end()) throw InvalidInput("comparison column '" + table.header[c] + "' is not a covariate");
            dense(it - names.begin()) = table.values(r, static_cast<Eigen::Index>(c));
        }
        out.push_back(make_comparison(labels[static_cast<std::size_t>(r)], dense));
    }
    return out;
}

FitOutcome fit_dataset(const RegressionData& data, const FitArgs& args, const std::vector<ComparisonFit>& comparisons) {
    const auto start = std::chrono::steady_clock::now();
    if (data.X.rows() < 4) throw InvalidInput("at least 4 observations are required");
    args.config.validate();

    FitOutcome o;
    o.design = standardize(data.X, data.y, data.names);
    o.run = run_csuv(o.design, args.config);

    std::vector<ComparisonFit> overlays = comparisons;
    if (args.compare_constituents) {
        TuningOptions tuning;
        tuning.path_length = args.config.path_length;
        tuning.min_ratio = args.config.min_ratio;
        tuning.seed = args.config.seed;
        tuning.fit_options = args.config.fit_options;
        tuning.jobs = args.config.jobs;
        const auto fits = constituent_fits(o.design, args.config.methods, tuning);
        for (std::size_t m = 0; m < fits.size(); ++m)
            overlays.push_back(make_comparison(args.config.methods[m].name(), fits[m].beta));
    }

    o.bundle = plot_bundle(o.run.collection, o.run.result, args.config, o.design.names, overlays);
    o.bundle.n = static_cast<int>(data.X.rows());
    o.bundle.dataset_digest = dataset_digest(data.X, data.y, data.names);
    if (args.timestamp) o.bundle.generated_at = utc_timestamp();
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return o;
}

std::string fit_report(const FitOutcome& o) {
    const CsuvResult& r = o.run.result;
    const auto& names = o.design.names;
    std::ostringstream os;
    os << "observations: " << o.design.rows() << ", covariates: " << o.design.cols()
       << ", retained models: " << o.run.collection.models.size() << '\n';
    os << "CSUV-m (t = " << o.bundle.config.threshold << "): " << names_of(r.selected_m, names) << '\n';
    os << "CSUV-s (s = " << r.size_threshold_s << "): " << names_of(r.selected_s, names) << '\n';
    os << "final coefficients (CSUV-m, standardized covariates"
       << (r.final_m.used_ridge ? ", ridge" : ", least squares") << "):\n";
    os << std::setprecision(6);
    os << "  (intercept)  " << r.final_m.fit.intercept << '\n';
    for (std::size_t a = 0; a < r.final_m.fit.support.size(); ++a)
        os << "  " << names[static_cast<std::size_t>(r.final_m.fit.support[a])] << "  "
           << r.final_m.fit.coefficients(static_cast<Eigen::Index>(a)) << '\n';
    os << "top of the solution path:\n";
    for (std::size_t k = 0; k < std::min<std::size_t>(10, r.path_order.size()); ++k) {
        const int j = r.path_order[k];
        if (r.tau.tau(j) <= 0.0) break;
        os << "  " << k + 1 << ". " << names[static_cast<std::size_t>(j)] << "  tau = " << r.tau.tau(j) << '\n';
    }
    os << std::setprecision(3) << std::fixed << "runtime: " << o.seconds << " s\n";
    return os.str();
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const NumericTable table = read_csv_file(args.csv_path);
        const RegressionData data = split_response(table, args.response);
        std::vector<ComparisonFit> comparisons;
        if (!args.compare_path.empty()) comparisons = read_comparisons(args.compare_path, data.names);
        const FitOutcome o = fit_dataset(data, args, comparisons);

        std::ofstream bundle_file(args.out_path);
        if (!bundle_file) throw Error("cannot write '" + args.out_path + "'");
        bundle_file << serialize_bundle(o.bundle);
        const std::string report = fit_report(o);
        if (args.report_path.empty()) {
            out << report;
        } else {
            std::ofstream report_file(args.report_path);
            if (!report_file) throw Error("cannot write '" + args.report_path + "'");
            report_file << report;
        }
        out << "bundle written to " << args.out_path << '\n';
        return kExitOk;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

std::string dataset_csv(const StandardizedDesign& design, const std::string& response) {
    std::vector<std::string> header = design.names;
    if (header.empty())
        for (Eigen::Index j = 0; j < design.cols(); ++j) header.push_back("X" + std::to_string(j + 1));
    header.push_back(response);
    Eigen::MatrixXd values(design.rows(), design.cols() + 1);
    values << design.X, design.y;
    std::ostringstream os;
    write_csv(os, header, values);
    return os.str();
}

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const GeneratedDataset data = generate(args.model, args.realization);
        const std::string text = dataset_csv(data.design, args.response);
        if (args.out_path.empty()) {
            out << text;
        } else {
            std::ofstream f(args.out_path);
            if (!f) throw Error("cannot write '" + args.out_path + "'");
            f << text;
            out << "true support:";
            for (int j : data.true_support) out << ' ' << data.design.names[static_cast<std::size_t>(j)];
            out << '\n';
        }
        return kExitOk;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace csuv::cli
