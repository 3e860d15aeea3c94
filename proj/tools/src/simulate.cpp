#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "csuv/baselines.hpp"
#include "csuv/error.hpp"
#include "csuv/metrics.hpp"
#include "csuv/parallel.hpp"
#include "csuv/random.hpp"
#include "csuv_cli/commands.hpp"

namespace csuv::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidInput(where + " must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
    else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer() || v.is_number_unsigned();
    else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
    else ok = v.is_string();
    if (!ok) throw InvalidInput("'" + key + "' in " + where + " has the wrong type");
    return v.get<T>();
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

std::string sanitize(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
    return text;
}

// Train/test pair for one realization of a CSV source; the test rows use the
// training rows' column means and scales.
void csv_split(const RegressionData& data, double test_fraction, std::uint64_t seed, StandardizedDesign& train,
               StandardizedDesign& test) {
    const Split split = make_split(data.X.rows(), 100.0 * (1.0 - test_fraction), seed, 0);
    auto take = [&](const std::vector<int>& rows, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
        y.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
            y(static_cast<Eigen::Index>(i)) = data.y(rows[i]);
        }
    };
    Eigen::MatrixXd Xtr, Xte;
    Eigen::VectorXd ytr, yte;
    take(split.train, Xtr, ytr);
    take(split.test, Xte, yte);
    train = standardize(Xtr, ytr, data.names);
    test.X = (Xte.rowwise() - train.column_means.transpose()).array().rowwise() / train.column_scales.transpose().array();
    test.y = yte;
    test.column_means = train.column_means;
    test.column_scales = train.column_scales;
    test.names = train.names;
}

double prediction_mse(const StandardizedDesign& test, const Eigen::VectorXd& beta, double intercept) {
    return ((test.y.array() - intercept) - (test.X * beta).array()).square().mean();
}

RealizationResult realize(const ExperimentConfig& config, const RegressionData* csv_data, int realization) {
    RealizationResult out;
    out.realization = realization;
    const auto start = std::chrono::steady_clock::now();
    try {
        const std::uint64_t seed = SplitMix64::stream(config.seed, "realization", static_cast<std::uint64_t>(realization)).key();
        StandardizedDesign train, test;
        Eigen::VectorXd truth_beta;
        std::vector<int> truth;
        if (config.source.kind == SourceConfig::Kind::generator) {
            GeneratedDataset data = generate(config.source.model, realization);
            GeneratedDataset held = generate_test(config.source.model, data, realization, config.source.test_rows);
            train = std::move(data.design);
            test = std::move(held.design);
            truth_beta = data.true_beta;
            truth = data.true_support;
        } else {
            csv_split(*csv_data, config.source.test_fraction, seed, train, test);
            truth = config.source.truth;
            out.has_truth = !truth.empty();
        }
        const Index p = train.cols();

        auto score = [&](const std::string& name, const Eigen::VectorXd& beta, double intercept) {
            MethodScore s;
            s.method = name;
            s.selected = support_of(beta);
            s.size = static_cast<int>(s.selected.size());
            const SelectionScore sel = selection_score(s.selected, truth);
            s.tp = sel.tp;
            s.fp = sel.fp;
            s.fn = sel.fn;
            s.f_measure = sel.f_measure;
            s.test_mse = prediction_mse(test, beta, intercept);
            if (truth_beta.size() == p) {
                const EstimationScore est = estimation_score(beta, truth_beta);
                s.l1 = est.l1;
                s.l2 = est.l2;
            } else {
                s.l1 = s.l2 = std::nan("");
            }
            out.scores.push_back(std::move(s));
        };

        CsuvConfig csuv = config.csuv;
        csuv.seed = seed;
        csuv.jobs = 1;
        const CsuvRun run = run_csuv(train, csuv);
        score("csuv-m", run.result.final_m.fit.dense(p), run.result.final_m.fit.intercept);
        score("csuv-s", run.result.final_s.fit.dense(p), run.result.final_s.fit.intercept);

        const BaselineToggles& bl = config.baselines;
        if (bl.constituents || bl.bic || bl.ebic || bl.delete_half) {
            TuningOptions tuning;
            tuning.folds = bl.cv_folds;
            tuning.path_length = csuv.path_length;
            tuning.min_ratio = csuv.min_ratio;
            tuning.seed = seed;
            tuning.fit_options = csuv.fit_options;
            tuning.jobs = 1;
            const std::vector<CvFit> fits = constituent_fits(train, csuv.methods, tuning);
            if (bl.constituents)
                for (std::size_t m = 0; m < fits.size(); ++m) score(csuv.methods[m].name(), fits[m].beta, fits[m].intercept);
            if (bl.bic) {
                const EbicSelection sel = select_by_ebic(train, fits, 0.0);
                score("bic", sel.best().dense(p), sel.best().intercept);
            }
            if (bl.ebic) {
                const EbicSelection sel = select_by_ebic(train, fits, bl.ebic_gamma);
                score("ebic", sel.best().dense(p), sel.best().intercept);
            }
            if (bl.delete_half) {
                const DeleteHalfResult dh = delete_half_cv_select(train, csuv.methods, bl.delete_half_repetitions, tuning, fits);
                score("delete-n/2", dh.fit.beta, dh.fit.intercept);
            }
        }
    } catch (const std::exception& e) {
        out.error = e.what();
        out.scores.clear();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return {std::nan(""), std::nan("")};
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

}  // namespace

ExperimentConfig parse_experiment(const json& doc) {
    ExperimentConfig c;
    check_keys(doc, {"source", "methods", "csuv", "baselines", "realizations", "seed", "output_dir"}, "experiment");

    if (!doc.contains("source")) throw InvalidInput("experiment needs a 'source'");
    const json& src = doc.at("source");
    if (!src.is_object()) throw InvalidInput("source must be an object");
    const std::string kind = get<std::string>(src, "kind", "generator", "source");
    if (kind == "generator") {
        check_keys(src, {"kind", "model", "n", "p", "s", "sigma", "parameter", "seed", "test_rows"}, "source");
        c.source.kind = SourceConfig::Kind::generator;
        ModelSpec& m = c.source.model;
        m.model = parse_model(get<std::string>(src, "model", "m2", "source"));
        if (m.model == SimModel::m1) m = ModelSpec::model1();
        m.n = get<Index>(src, "n", m.n, "source");
        m.p = get<Index>(src, "p", m.p, "source");
        m.s = get<Index>(src, "s", m.s, "source");
        m.sigma = get<double>(src, "sigma", m.sigma, "source");
        m.parameter = get<double>(src, "parameter", m.parameter, "source");
        m.seed = get<std::uint64_t>(src, "seed", m.seed, "source");
        m.validate();
        c.source.test_rows = get<Index>(src, "test_rows", c.source.test_rows, "source");
        if (c.source.test_rows < 1) throw InvalidInput("test_rows must be positive");
    } else if (kind == "csv") {
        check_keys(src, {"kind", "path", "response", "truth", "test_fraction"}, "source");
        c.source.kind = SourceConfig::Kind::csv;
        c.source.csv_path = get<std::string>(src, "path", "", "source");
        if (c.source.csv_path.empty()) throw InvalidInput("csv source needs a 'path'");
        c.source.response = get<std::string>(src, "response", c.source.response, "source");
        c.source.test_fraction = get<double>(src, "test_fraction", c.source.test_fraction, "source");
        if (!(c.source.test_fraction > 0.0 && c.source.test_fraction < 1.0))
            throw InvalidInput("test_fraction must lie in (0, 1)");
        if (src.contains("truth")) {
            if (!src.at("truth").is_array()) throw InvalidInput("truth must be a list of 1-based column positions");
            for (const auto& v : src.at("truth")) {
                if (!v.is_number_integer() || v.get<int>() < 1) throw InvalidInput("truth entries must be positive integers");
                c.source.truth.push_back(v.get<int>() - 1);
            }
        }
    } else {
        throw InvalidInput("source kind must be 'generator' or 'csv'");
    }

    if (doc.contains("methods")) {
        if (!doc.at("methods").is_array()) throw InvalidInput("methods must be a list");
        c.csuv.methods.clear();
        for (const auto& v : doc.at("methods")) {
            if (!v.is_string()) throw InvalidInput("methods must be names");
            c.csuv.methods.push_back(PenaltySpec::parse(v.get<std::string>()));
        }
    }
    if (doc.contains("csuv")) {
        const json& p = doc.at("csuv");
        check_keys(p, {"B", "q", "w", "t", "whiskers"}, "csuv");
        c.csuv.repetitions = get<int>(p, "B", c.csuv.repetitions, "csuv");
        c.csuv.retain_percent = get<double>(p, "q", c.csuv.retain_percent, "csuv");
        c.csuv.train_percent = get<double>(p, "w", c.csuv.train_percent, "csuv");
        c.csuv.threshold = get<double>(p, "t", c.csuv.threshold, "csuv");
        if (p.contains("whiskers")) {
            const json& w = p.at("whiskers");
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
                throw InvalidInput("whiskers must be [low, high]");
            c.csuv.whiskers = {w[0].get<double>(), w[1].get<double>()};
        }
    }
    c.csuv.validate();
    if (doc.contains("baselines")) {
        const json& b = doc.at("baselines");
        check_keys(b, {"constituents", "bic", "ebic", "ebic_gamma", "delete_half", "delete_half_B", "cv_folds"}, "baselines");
        BaselineToggles& t = c.baselines;
        t.constituents = get<bool>(b, "constituents", t.constituents, "baselines");
        t.bic = get<bool>(b, "bic", t.bic, "baselines");
        t.ebic = get<bool>(b, "ebic", t.ebic, "baselines");
        t.ebic_gamma = get<double>(b, "ebic_gamma", t.ebic_gamma, "baselines");
        t.delete_half = get<bool>(b, "delete_half", t.delete_half, "baselines");
        t.delete_half_repetitions = get<int>(b, "delete_half_B", t.delete_half_repetitions, "baselines");
        t.cv_folds = get<int>(b, "cv_folds", t.cv_folds, "baselines");
        if (t.ebic_gamma < 0.0) throw InvalidInput("ebic_gamma must be nonnegative");
        if (t.delete_half_repetitions < 1) throw InvalidInput("delete_half_B must be positive");
        if (t.cv_folds < 2) throw InvalidInput("cv_folds must be at least 2");
    }
    c.realizations = get<int>(doc, "realizations", c.realizations, "experiment");
    if (c.realizations < 1) throw InvalidInput("realizations must be positive");
    c.seed = get<std::uint64_t>(doc, "seed", c.seed, "experiment");
    c.output_dir = get<std::string>(doc, "output_dir", c.output_dir, "experiment");
    return c;
}

RealizationResult run_realization(const ExperimentConfig& config, int realization) {
    if (config.source.kind == SourceConfig::Kind::csv) {
        const RegressionData data = split_response(read_csv_file(config.source.csv_path), config.source.response);
        return realize(config, &data, realization);
    }
    return realize(config, nullptr, realization);
}

SimulationOutput run_simulation(const ExperimentConfig& config, int jobs) {
    std::optional<RegressionData> csv_data;
    if (config.source.kind == SourceConfig::Kind::csv) {
        csv_data = split_response(read_csv_file(config.source.csv_path), config.source.response);
        if (csv_data->X.rows() < 8) throw InvalidInput("csv source needs at least 8 observations");
        for (int j : config.source.truth)
            if (j >= csv_data->X.cols()) throw InvalidInput("truth column out of range");
    }

    SimulationOutput out;
    out.realizations.resize(static_cast<std::size_t>(config.realizations));
    parallel_for(out.realizations.size(), jobs, [&](std::size_t r) {
        out.realizations[r] = realize(config, csv_data ? &*csv_data : nullptr, static_cast<int>(r));
    });

    for (const auto& r : out.realizations) {
        if (!r.error.empty()) {
            ++out.failures;
            continue;
        }
        if (out.methods.empty())
            for (const auto& s : r.scores) out.methods.push_back(s.method);
    }

    std::ostringstream per;
    per << "realization,method,tp,fp,fn,fp_fn,f_measure,test_mse,l1,l2,size,status\n";
    for (const auto& r : out.realizations) {
        if (!r.error.empty()) {
            per << r.realization + 1 << ",,,,,,,,,,,error: " << sanitize(r.error) << '\n';
            continue;
        }
        for (const auto& s : r.scores) {
            per << r.realization + 1 << ',' << s.method << ',';
            if (r.has_truth)
                per << s.tp << ',' << s.fp << ',' << s.fn << ',' << s.fp + s.fn << ',' << cell(s.f_measure);
            else
                per << "NA,NA,NA,NA,NA";
            per << ',' << cell(s.test_mse) << ',' << cell(s.l1) << ',' << cell(s.l2) << ',' << s.size << ",ok\n";
        }
    }
    out.per_realization_csv = per.str();

    std::ostringstream sum;
    sum << "method,realizations,fp_mean,fp_sd,fn_mean,fn_sd,fp_fn_mean,fp_fn_sd,f_mean,f_sd,mse_mean,mse_sd,"
           "l1_mean,l1_sd,l2_mean,l2_sd,size_mean,size_sd\n";
    for (std::size_t m = 0; m < out.methods.size(); ++m) {
        std::vector<double> fp, fn, tot, f, mse, l1, l2, size;
        bool truth = true;
        for (const auto& r : out.realizations) {
            if (!r.error.empty()) continue;
            const MethodScore& s = r.scores[m];
            truth = truth && r.has_truth;
            fp.push_back(s.fp);
            fn.push_back(s.fn);
            tot.push_back(s.fp + s.fn);
            f.push_back(s.f_measure);
            mse.push_back(s.test_mse);
            l1.push_back(s.l1);
            l2.push_back(s.l2);
            size.push_back(s.size);
        }
        sum << out.methods[m] << ',' << fp.size();
        for (const auto* col : {&fp, &fn, &tot, &f, &mse, &l1, &l2, &size}) {
            const bool selection_column = col == &fp || col == &fn || col == &tot || col == &f;
            const Moments mo = selection_column && !truth ? Moments{std::nan(""), std::nan("")} : moments(*col);
            sum << ',' << cell(mo.mean) << ',' << cell(mo.sd);
        }
        sum << '\n';
    }
    out.summary_csv = sum.str();

    std::ostringstream dis;
    dis << "method";
    for (const auto& m : out.methods) dis << ',' << m;
    dis << '\n';
    std::vector<std::vector<std::vector<int>>> selections;
    for (const auto& r : out.realizations) {
        if (!r.error.empty()) continue;
        std::vector<std::vector<int>> row;
        for (const auto& s : r.scores) row.push_back(s.selected);
        selections.push_back(std::move(row));
    }
    if (out.methods.size() >= 2 && !selections.empty()) {
        const Eigen::MatrixXd D = disagreement_matrix(selections);
        for (std::size_t a = 0; a < out.methods.size(); ++a) {
            dis << out.methods[a];
            for (std::size_t b = 0; b < out.methods.size(); ++b)
                dis << ',' << cell(D(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
            dis << '\n';
        }
    }
    out.disagreement_csv = dis.str();
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& output_dir, int jobs, std::ostream& out,
                 std::ostream& err) {
    ExperimentConfig config;
    try {
        std::ifstream in(config_path);
        if (!in) throw InvalidInput("cannot open '" + config_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw InvalidInput(std::string("experiment config is not valid JSON: ") + e.what());
        }
        config = parse_experiment(doc);
        if (!output_dir.empty()) config.output_dir = output_dir;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    try {
        const auto start = std::chrono::steady_clock::now();
        const SimulationOutput result = run_simulation(config, jobs);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::filesystem::create_directories(config.output_dir);
        const std::filesystem::path dir(config.output_dir);
        auto write = [&](const char* name, const std::string& text) {
            std::ofstream f(dir / name);
            if (!f) throw Error("cannot write '" + (dir / name).string() + "'");
            f << text;
        };
        write("per_realization.csv", result.per_realization_csv);
        write("summary.csv", result.summary_csv);
        write("disagreement.csv", result.disagreement_csv);

        for (const auto& r : result.realizations)
            if (!r.error.empty()) err << "realization " << r.realization + 1 << " failed: " << r.error << '\n';
        out << result.summary_csv;
        out << config.realizations - result.failures << " of " << config.realizations << " realizations succeeded in "
            << seconds << " s; results in " << config.output_dir << '\n';
        return result.failures == config.realizations ? kExitFailure : kExitOk;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace csuv::cli
