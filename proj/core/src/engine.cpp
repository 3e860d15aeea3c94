#include "csuv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "csuv/error.hpp"
#include "csuv/parallel.hpp"
#include "csuv/random.hpp"

namespace csuv {

void CsuvConfig::validate() const {
    if (repetitions < 1) throw InvalidInput("number of repetitions must be at least 1");
    if (!(retain_percent >= 0.0 && retain_percent <= 50.0)) throw InvalidInput("retention percentile q must lie in [0, 50]");
    if (!(train_percent > 0.0 && train_percent < 100.0)) throw InvalidInput("training percentage w must lie in (0, 100)");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidInput("frequency threshold t must lie in (0, 1]");
    if (methods.empty()) throw InvalidInput("at least one constituent method is required");
    for (const auto& m : methods) m.validate();
    if (path_length < 1) throw InvalidInput("lambda path length must be positive");
    if (!(whiskers[0] >= 0.0 && whiskers[0] < 50.0 && whiskers[1] > 50.0 && whiskers[1] <= 100.0))
        throw InvalidInput("whisker percentiles must satisfy 0 <= low < 50 < high <= 100");
    if (ridge_folds < 2) throw InvalidInput("ridge fallback needs at least 2 folds");
}

double FittedModel::coefficient(int j) const {
    auto it = std::lower_bound(support.begin(), support.end(), j);
    if (it == support.end() || *it != j) return 0.0;
    return coefficients[static_cast<std::size_t>(it - support.begin())];
}

std::vector<int> RetainedCollection::support_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(models.size());
    for (const auto& m : models) sizes.push_back(static_cast<int>(m.support.size()));
    return sizes;
}

int retained_count(int candidates, double retain_percent) {
    const double raw = std::nearbyint(static_cast<double>(candidates) * retain_percent / 100.0);
    return std::clamp(static_cast<int>(raw), 1, std::max(1, candidates));
}

Split make_split(Index n, double train_percent, std::uint64_t seed, int repetition) {
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_percent / 100.0));
    if (n_train < 2 || n_train >= static_cast<std::size_t>(n))
        throw InvalidInput("split leaves fewer than 2 training rows or no test rows");
    auto rng = SplitMix64::stream(seed, "csuv-split", static_cast<std::uint64_t>(repetition));
    const std::vector<int> perm = random_permutation(rng, static_cast<std::size_t>(n));
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = X.row(rows[i]);
    return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y(rows[i]);
    return out;
}

double test_error(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FittedModel& m) {
    double total = 0.0;
    for (Index i = 0; i < X.rows(); ++i) {
        double pred = m.intercept;
        for (std::size_t a = 0; a < m.support.size(); ++a) pred += X(i, m.support[a]) * m.coefficients[a];
        total += (y(i) - pred) * (y(i) - pred);
    }
    return total / static_cast<double>(X.rows());
}

// One repetition: fit every method on the training rows, deduplicate supports
// within each method, refit, score on the test rows, and keep the best.
std::pair<int, std::vector<FittedModel>> run_repetition(const StandardizedDesign& design, const CsuvConfig& config,
                                                        int b) {
    const Split split = make_split(design.rows(), config.train_percent, config.seed, b);
    const StandardizedDesign train = standardize_rows(design, split.train);
    const Eigen::MatrixXd X_train = take_rows(design.X, split.train);
    const Eigen::VectorXd y_train = take_rows(design.y, split.train);
    const Eigen::MatrixXd X_test = take_rows(design.X, split.test);
    const Eigen::VectorXd y_test = take_rows(design.y, split.test);
    const auto n_train = split.train.size();

    std::vector<FittedModel> candidates;
    for (std::size_t r = 0; r < config.methods.size(); ++r) {
        const PenaltySpec& method = config.methods[r];
        const LambdaPath path = make_lambda_path(train, method, config.path_length, config.min_ratio);
        const PathFit fit = fit_path(train, method, path, config.fit_options);

        std::set<std::vector<int>> seen;
        for (std::size_t k = 0; k < fit.size(); ++k) {
            const PathPoint& pt = fit.points[k];
            if (!seen.insert(pt.support).second) continue;

            FittedModel m;
            m.support = pt.support;
            m.method = static_cast<int>(r);
            m.repetition = b;
            m.lambda_index = static_cast<int>(k);
            bool refitted = false;
            if (pt.support.size() < n_train) {
                try {
                    const SubsetFit ols = ols_fit(X_train, y_train, pt.support);
                    m.coefficients.assign(ols.coefficients.data(), ols.coefficients.data() + ols.coefficients.size());
                    m.intercept = ols.intercept;
                    m.refit = refitted = true;
                } catch (const RankDeficient&) {
                    // Collinear support within the training rows: keep the penalized fit.
                }
            }
            if (!refitted) {
                const LinearModel penalized = to_parent_scale(train, pt.beta);
                m.coefficients.clear();
                for (int j : m.support) m.coefficients.push_back(penalized.beta(j));
                m.intercept = penalized.intercept;
            }
            m.test_mse = test_error(X_test, y_test, m);
            candidates.push_back(std::move(m));
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const FittedModel& a, const FittedModel& b) {
        return std::make_tuple(a.test_mse, a.support.size(), a.method, a.lambda_index) <
               std::make_tuple(b.test_mse, b.support.size(), b.method, b.lambda_index);
    });
    const int total = static_cast<int>(candidates.size());
    candidates.resize(static_cast<std::size_t>(retained_count(total, config.retain_percent)));
    return {total, std::move(candidates)};
}

}  // namespace

RetainedCollection collect_models(const StandardizedDesign& design, const CsuvConfig& config) {
    config.validate();
    if (design.cols() < 1) throw InvalidInput("design has no covariates");
    if (design.rows() < 4) throw InvalidInput("at least 4 observations are required");

    const auto B = static_cast<std::size_t>(config.repetitions);
    std::vector<std::pair<int, std::vector<FittedModel>>> per_rep(B);
    parallel_for(B, config.jobs, [&](std::size_t b) { per_rep[b] = run_repetition(design, config, static_cast<int>(b)); });

    RetainedCollection c;
    c.p = design.cols();
    for (auto& [total, kept] : per_rep) {
        c.candidates_per_repetition.push_back(total);
        c.retained_per_repetition.push_back(static_cast<int>(kept.size()));
        for (auto& m : kept) c.models.push_back(std::move(m));
    }
    return c;
}

TauVectors compute_tau(const RetainedCollection& collection, Index p) {
    if (collection.models.empty()) throw InvalidInput("tau needs at least one retained model");
    Eigen::VectorXi pos = Eigen::VectorXi::Zero(p), neg = Eigen::VectorXi::Zero(p);
    for (const auto& m : collection.models) {
        for (std::size_t a = 0; a < m.support.size(); ++a) {
            if (m.coefficients[a] > 0.0) ++pos(m.support[a]);
            else if (m.coefficients[a] < 0.0) ++neg(m.support[a]);
        }
    }
    const double size = static_cast<double>(collection.models.size());
    TauVectors t;
    t.tau_pos = pos.cast<double>() / size;
    t.tau_neg = neg.cast<double>() / size;
    t.tau = pos.cwiseMax(neg).cast<double>() / size;
    return t;
}

Eigen::VectorXd mean_coefficients(const RetainedCollection& collection, Index p) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    for (const auto& m : collection.models)
        for (std::size_t a = 0; a < m.support.size(); ++a) sum(m.support[a]) += m.coefficients[a];
    return collection.models.empty() ? sum : Eigen::VectorXd(sum / static_cast<double>(collection.models.size()));
}

std::vector<int> select_by_tau(const Eigen::VectorXd& tau, double t) {
    std::vector<int> out;
    for (Index j = 0; j < tau.size(); ++j)
        if (tau(j) >= t) out.push_back(static_cast<int>(j));
    return out;
}

std::vector<int> solution_path(const Eigen::VectorXd& tau, const Eigen::VectorXd& mean_coefficients) {
    if (tau.size() != mean_coefficients.size()) throw InvalidInput("tau and mean coefficients differ in length");
    std::vector<int> order(static_cast<std::size_t>(tau.size()));
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (tau(a) != tau(b)) return tau(a) > tau(b);
        const double ma = std::abs(mean_coefficients(a)), mb = std::abs(mean_coefficients(b));
        if (ma != mb) return ma > mb;
        return a < b;
    });
    return order;
}

int median_size(std::vector<int> sizes) {
    if (sizes.empty()) throw InvalidInput("median of an empty set of sizes");
    std::sort(sizes.begin(), sizes.end());
    return sizes[(sizes.size() - 1) / 2];
}

std::vector<int> csuv_s_select(const std::vector<int>& path_order, const Eigen::VectorXd& tau,
                               const std::vector<int>& sizes) {
    const int s = median_size(sizes);
    const auto positive = static_cast<int>((tau.array() > 0.0).count());
    const int take = std::min(s, positive);
    std::vector<int> out(path_order.begin(), path_order.begin() + take);
    std::sort(out.begin(), out.end());
    return out;
}

FinalFit estimate_final_coefficients(const StandardizedDesign& design, const std::vector<int>& selected, int ridge_folds,
                                     std::uint64_t seed) {
    FinalFit out;
    if (static_cast<Index>(selected.size()) < design.rows()) {
        try {
            out.fit = ols_fit(design.X, design.y, selected);
            return out;
        } catch (const RankDeficient&) {
            // Collinear selection: fall through to ridge.
        }
    }
    const LambdaPath path = make_ridge_path(design.X, design.y, selected);
    const int folds = std::min<int>(ridge_folds, static_cast<int>(design.rows()));
    RidgeCvFit ridge = ridge_cv_fit(design.X, design.y, selected, path, folds, seed);
    out.fit = std::move(ridge.fit);
    out.used_ridge = true;
    out.ridge_lambda = ridge.lambda;
    return out;
}

CsuvRun run_csuv(const StandardizedDesign& design, const CsuvConfig& config) {
    CsuvRun run;
    run.collection = collect_models(design, config);
    const Index p = design.cols();
    CsuvResult& r = run.result;

    r.tau = compute_tau(run.collection, p);
    r.mean_coefficients = mean_coefficients(run.collection, p);
    r.selected_m = select_by_tau(r.tau.tau, config.threshold);
    r.path_order = solution_path(r.tau.tau, r.mean_coefficients);
    r.rank.assign(static_cast<std::size_t>(p), 0);
    for (std::size_t k = 0; k < r.path_order.size(); ++k) r.rank[static_cast<std::size_t>(r.path_order[k])] = static_cast<int>(k) + 1;

    const std::vector<int> sizes = run.collection.support_sizes();
    r.size_threshold_s = median_size(sizes);
    r.selected_s = csuv_s_select(r.path_order, r.tau.tau, sizes);

    const std::uint64_t final_seed = mix64(config.seed ^ tag_hash("final-ridge"));
    r.final_m = estimate_final_coefficients(design, r.selected_m, config.ridge_folds, final_seed);
    r.final_s = estimate_final_coefficients(design, r.selected_s, config.ridge_folds, final_seed);

    std::vector<std::vector<double>> nonzero(static_cast<std::size_t>(p));
    for (const auto& m : run.collection.models)
        for (std::size_t a = 0; a < m.support.size(); ++a)
            if (m.coefficients[a] != 0.0) nonzero[static_cast<std::size_t>(m.support[a])].push_back(m.coefficients[a]);
    const int total = static_cast<int>(run.collection.models.size());
    r.summaries.resize(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
        r.summaries[static_cast<std::size_t>(j)] =
            summarize_coefficients(std::move(nonzero[static_cast<std::size_t>(j)]), total, config.whiskers);
    return run;
}

}  // namespace csuv
