#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "csuv/engine.hpp"
#include "csuv/error.hpp"
#include "csuv/simgen.hpp"
#include "oracles.hpp"

using namespace csuv;

namespace {

FittedModel model(std::vector<std::pair<int, double>> entries) {
    std::sort(entries.begin(), entries.end());
    FittedModel m;
    for (auto [j, v] : entries) {
        m.support.push_back(j);
        m.coefficients.push_back(v);
    }
    return m;
}

// With single_sign every covariate keeps one sign across all models.
RetainedCollection random_collection(SplitMix64& rng, int models, int p, double density, bool single_sign = false) {
    RetainedCollection c;
    c.p = p;
    std::vector<double> sign(static_cast<std::size_t>(p));
    for (double& s : sign) s = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    for (int k = 0; k < models; ++k) {
        std::vector<std::pair<int, double>> e;
        for (int j = 0; j < p; ++j) {
            if (uniform(rng, 0.0, 1.0) >= density) continue;
            const double v = uniform(rng, 0.1, 1.0);
            e.emplace_back(j, single_sign ? sign[static_cast<std::size_t>(j)] * v : (uniform(rng, 0.0, 1.0) < 0.5 ? -v : v));
        }
        c.models.push_back(model(e));
    }
    return c;
}

CsuvConfig small_config(int B) {
    CsuvConfig cfg;
    cfg.repetitions = B;
    cfg.seed = 17;
    cfg.jobs = 1;
    return cfg;
}

}  // namespace

TEST_SUITE("tau") {
    TEST_CASE("signs (+,+,-,0) give tau 0.5") {
        RetainedCollection c;
        c.models = {model({{0, 0.4}}), model({{0, 1.2}}), model({{0, -0.3}}), model({})};
        const TauVectors t = compute_tau(c, 2);
        CHECK(t.tau(0) == 0.5);
        CHECK(t.tau_pos(0) == 0.5);
        CHECK(t.tau_neg(0) == 0.25);
        CHECK(t.tau(1) == 0.0);
        CHECK(select_by_tau(t.tau, 0.5) == std::vector<int>{0});
    }

    TEST_CASE("unanimous inclusion and unanimous exclusion") {
        RetainedCollection c;
        c.models = {model({{1, 0.1}}), model({{1, 2.0}, {2, -1.0}}), model({{1, 0.5}})};
        const TauVectors t = compute_tau(c, 4);
        CHECK(t.tau(1) == 1.0);
        CHECK(t.tau(0) == 0.0);
        CHECK(t.tau(3) == 0.0);
        CHECK(t.tau(2) == doctest::Approx(1.0 / 3.0));
        CHECK_THROWS_AS(compute_tau(RetainedCollection{}, 4), InvalidInput);
    }

    TEST_CASE("random collections match a naive recount") {
        auto rng = SplitMix64::stream(1, "tau-recount");
        for (int trial = 0; trial < 20; ++trial) {
            const RetainedCollection c = random_collection(rng, 50, 20, 0.3);
            const TauVectors t = compute_tau(c, 20);
            for (int j = 0; j < 20; ++j) {
                int pos = 0, neg = 0, in = 0;
                for (const auto& m : c.models) {
                    const double v = m.coefficient(j);
                    pos += v > 0;
                    neg += v < 0;
                    in += std::count(m.support.begin(), m.support.end(), j) > 0;
                }
                CHECK(t.tau(j) == static_cast<double>(std::max(pos, neg)) / 50.0);
                CHECK(t.tau_pos(j) == pos / 50.0);
                CHECK(t.tau_neg(j) == neg / 50.0);
                CHECK(t.tau(j) >= 0.0);
                CHECK(t.tau(j) <= t.tau_pos(j) + t.tau_neg(j));
                CHECK(t.tau_pos(j) + t.tau_neg(j) <= in / 50.0 + 1e-15);
            }
        }
    }

    TEST_CASE("mean coefficients average over every model") {
        RetainedCollection c;
        c.models = {model({{0, 1.0}}), model({{0, 3.0}}), model({}), model({{1, -4.0}})};
        const Eigen::VectorXd m = mean_coefficients(c, 2);
        CHECK(m(0) == 1.0);
        CHECK(m(1) == -1.0);
    }

    TEST_CASE("CSUV-m shrinks as the threshold grows") {
        auto rng = SplitMix64::stream(2, "monotone");
        const RetainedCollection c = random_collection(rng, 40, 15, 0.5);
        const Eigen::VectorXd tau = compute_tau(c, 15).tau;
        std::vector<int> previous = select_by_tau(tau, 0.01);
        for (double t = 0.05; t <= 1.0; t += 0.05) {
            const std::vector<int> now = select_by_tau(tau, t);
            CHECK(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
            previous = now;
        }
    }
}

TEST_SUITE("solution path") {
    TEST_CASE("ties on tau fall back to the mean coefficient") {
        const std::vector<int> order = solution_path(Eigen::Vector3d(0.9, 0.5, 0.5), Eigen::Vector3d(0.0, 0.2, -0.7));
        CHECK(order == std::vector<int>{0, 2, 1});
    }

    TEST_CASE("complete ties give the identity order") {
        const std::vector<int> order = solution_path(Eigen::VectorXd::Constant(6, 0.3), Eigen::VectorXd::Constant(6, 1.0));
        CHECK(order == std::vector<int>{0, 1, 2, 3, 4, 5});
    }

    TEST_CASE("random inputs match a lexicographic sort") {
        auto rng = SplitMix64::stream(3, "path-order");
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd tau(50), mean(50);
            for (int j = 0; j < 50; ++j) {
                tau(j) = static_cast<double>(uniform_index(rng, 0, 10)) / 10.0;
                mean(j) = static_cast<double>(uniform_index(rng, 0, 6)) / 4.0 - 0.75;
            }
            std::vector<std::tuple<double, double, int>> keys;
            for (int j = 0; j < 50; ++j) keys.emplace_back(-tau(j), -std::abs(mean(j)), j);
            std::sort(keys.begin(), keys.end());
            std::vector<int> expect;
            for (const auto& k : keys) expect.push_back(std::get<2>(k));
            CHECK(solution_path(tau, mean) == expect);
        }
    }

    TEST_CASE("CSUV-m is the path prefix of its own size") {
        auto rng = SplitMix64::stream(4, "prefix");
        const RetainedCollection c = random_collection(rng, 30, 25, 0.4);
        const Eigen::VectorXd tau = compute_tau(c, 25).tau;
        const std::vector<int> order = solution_path(tau, mean_coefficients(c, 25));
        for (double t : {0.1, 0.3, 0.5, 0.7, 1.0}) {
            const std::vector<int> m = select_by_tau(tau, t);
            std::vector<int> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m.size()));
            std::sort(prefix.begin(), prefix.end());
            CHECK(prefix == m);
        }
    }

    TEST_CASE("CSUV-s uses the lower median size, capped by tau > 0") {
        const Eigen::VectorXd tau = (Eigen::VectorXd(8) << 0.9, 0.8, 0.6, 0.4, 0.2, 0.1, 0.0, 0.0).finished();
        const std::vector<int> order{0, 1, 2, 3, 4, 5, 6, 7};
        CHECK(median_size({2, 3, 3, 5, 7}) == 3);
        CHECK(median_size({2, 4}) == 2);
        CHECK(csuv_s_select(order, tau, {2, 3, 3, 5, 7}) == std::vector<int>{0, 1, 2});
        CHECK(csuv_s_select(order, tau, {4, 2}) == std::vector<int>{0, 1});
        CHECK(csuv_s_select(order, tau, {7, 8}) == std::vector<int>{0, 1, 2, 3, 4, 5});
        CHECK(csuv_s_select(order, tau, {0}).empty());
    }
}

TEST_SUITE("retention and splits") {
    TEST_CASE("retained counts") {
        CHECK(retained_count(37, 0.0) == 1);
        CHECK(retained_count(10, 5.0) == 1);   // round(0.5) = 0, floored at one model
        CHECK(retained_count(30, 5.0) == 2);   // round(1.5) = 2
        CHECK(retained_count(50, 5.0) == 2);   // round(2.5) = 2, half to even
        CHECK(retained_count(100, 5.0) == 5);
        CHECK(retained_count(7, 50.0) == 4);   // round(3.5) = 4
        CHECK(retained_count(0, 5.0) == 1);
    }

    TEST_CASE("split sizes and reproducibility") {
        const Split a = make_split(11, 50.0, 9, 3);
        CHECK(a.train.size() == 5);
        CHECK(a.test.size() == 6);
        std::vector<int> all = a.train;
        all.insert(all.end(), a.test.begin(), a.test.end());
        std::sort(all.begin(), all.end());
        for (int i = 0; i < 11; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
        CHECK(std::is_sorted(a.train.begin(), a.train.end()));
        const Split again = make_split(11, 50.0, 9, 3);
        CHECK(a.train == again.train);
        CHECK(a.train != make_split(11, 50.0, 9, 4).train);
        CHECK(make_split(100, 70.0, 1, 0).train.size() == 70);
        CHECK_THROWS_AS(make_split(3, 50.0, 1, 0), InvalidInput);
    }

    TEST_CASE("config validation") {
        CsuvConfig c;
        CHECK_NOTHROW(c.validate());
        c.retain_percent = 51;
        CHECK_THROWS_AS(c.validate(), InvalidInput);
        c = {};
        c.train_percent = 100;
        CHECK_THROWS_AS(c.validate(), InvalidInput);
        c = {};
        c.threshold = 0;
        CHECK_THROWS_AS(c.validate(), InvalidInput);
        c = {};
        c.methods.clear();
        CHECK_THROWS_AS(c.validate(), InvalidInput);
        c = {};
        c.repetitions = 0;
        CHECK_THROWS_AS(c.validate(), InvalidInput);
    }
}

TEST_SUITE("collection") {
    TEST_CASE("one repetition matches an independent recount") {
        const GeneratedDataset g = generate(ModelSpec::model2(20, 3, 0.5, 4), 0);
        CsuvConfig cfg = small_config(1);
        cfg.methods = {PenaltySpec::lasso()};
        cfg.retain_percent = 50.0;
        const RetainedCollection c = collect_models(g.design, cfg);

        const Split split = make_split(g.design.rows(), 50.0, cfg.seed, 0);
        const StandardizedDesign train = standardize_rows(g.design, split.train);
        const PathFit fit = fit_path(train, PenaltySpec::lasso(), make_lambda_path(train, PenaltySpec::lasso()));
        Eigen::MatrixXd Xtr(static_cast<Index>(split.train.size()), g.design.cols());
        Eigen::VectorXd ytr(Xtr.rows());
        for (std::size_t i = 0; i < split.train.size(); ++i) {
            Xtr.row(static_cast<Index>(i)) = g.design.X.row(split.train[i]);
            ytr(static_cast<Index>(i)) = g.design.y(split.train[i]);
        }
        std::set<std::vector<int>> seen;
        std::vector<std::pair<double, std::vector<int>>> scored;
        for (const auto& pt : fit.points) {
            if (!seen.insert(pt.support).second) continue;
            const Eigen::VectorXd coef = oracle::normal_equations(Xtr, ytr, pt.support);
            double sse = 0.0;
            for (int i : split.test) {
                double pred = coef(0);
                for (std::size_t a = 0; a < pt.support.size(); ++a)
                    pred += coef(static_cast<Index>(a) + 1) * g.design.X(i, pt.support[a]);
                sse += (g.design.y(i) - pred) * (g.design.y(i) - pred);
            }
            scored.emplace_back(sse / static_cast<double>(split.test.size()), pt.support);
        }
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return a.second.size() < b.second.size();
        });

        REQUIRE(c.candidates_per_repetition == std::vector<int>{static_cast<int>(scored.size())});
        REQUIRE(c.models.size() == static_cast<std::size_t>(retained_count(static_cast<int>(scored.size()), 50.0)));
        for (std::size_t k = 0; k < c.models.size(); ++k) {
            CHECK(c.models[k].support == scored[k].second);
            CHECK(c.models[k].test_mse == doctest::Approx(scored[k].first).epsilon(1e-9));
            CHECK(c.models[k].refit);
        }
    }

    TEST_CASE("supports are unique within a method but may repeat across methods") {
        const GeneratedDataset g = generate(ModelSpec::model2(15, 3, 0.5, 5), 0);
        CsuvConfig cfg = small_config(4);
        cfg.retain_percent = 50.0;
        const RetainedCollection c = collect_models(g.design, cfg);
        std::map<std::pair<int, int>, std::set<std::vector<int>>> per;
        std::map<int, std::set<std::vector<int>>> any_method;
        bool cross_duplicate = false;
        for (const auto& m : c.models) {
            CHECK(per[{m.repetition, m.method}].insert(m.support).second);
            if (!any_method[m.repetition].insert(m.support).second) cross_duplicate = true;
            CHECK(std::is_sorted(m.support.begin(), m.support.end()));
            CHECK(m.coefficients.size() == m.support.size());
        }
        CHECK(cross_duplicate);
        int total = 0;
        for (int r : c.retained_per_repetition) total += r;
        CHECK(total == static_cast<int>(c.models.size()));
    }

    TEST_CASE("a single repetition with q = 0 keeps the best model") {
        const GeneratedDataset g = generate(ModelSpec::model1(1.0, 2), 0);
        CsuvConfig cfg = small_config(1);
        cfg.methods = {PenaltySpec::mcp()};
        const CsuvRun run = run_csuv(g.design, cfg);
        REQUIRE(run.collection.models.size() == 1);
        const FittedModel& m = run.collection.models.front();
        std::vector<int> nonzero;
        for (std::size_t a = 0; a < m.support.size(); ++a)
            if (m.coefficients[a] != 0.0) nonzero.push_back(m.support[a]);
        CHECK(run.result.selected_m == nonzero);
    }

    TEST_CASE("results do not depend on the number of worker threads") {
        const GeneratedDataset g = generate(ModelSpec::model2(30, 3, 0.9, 6), 0);
        CsuvConfig cfg = small_config(12);
        const CsuvRun a = run_csuv(g.design, cfg);
        cfg.jobs = 4;
        const CsuvRun b = run_csuv(g.design, cfg);
        REQUIRE(a.collection.models.size() == b.collection.models.size());
        for (std::size_t k = 0; k < a.collection.models.size(); ++k) {
            CHECK(a.collection.models[k].support == b.collection.models[k].support);
            CHECK(a.collection.models[k].coefficients == b.collection.models[k].coefficients);
        }
        CHECK(a.result.tau.tau == b.result.tau.tau);
        CHECK(a.result.path_order == b.result.path_order);
        CHECK(a.result.final_m.fit.coefficients == b.result.final_m.fit.coefficients);
    }

    TEST_CASE("invalid designs are rejected") {
        StandardizedDesign empty;
        empty.X.resize(10, 0);
        empty.y = Eigen::VectorXd::Ones(10);
        CHECK_THROWS_AS(run_csuv(empty, small_config(1)), InvalidInput);
        const StandardizedDesign tiny = oracle::random_problem(3, 2, 1);
        CHECK_THROWS_AS(run_csuv(tiny, small_config(1)), InvalidInput);
    }
}

TEST_SUITE("result") {
    TEST_CASE("result invariants on a Model 2 data set") {
        const GeneratedDataset g = generate(ModelSpec::model2(40, 4, 0.5, 8), 0);
        CsuvConfig cfg = small_config(20);
        const CsuvRun run = run_csuv(g.design, cfg);
        const CsuvResult& r = run.result;
        for (Index j = 0; j < 40; ++j) CHECK(r.tau.tau(j) == std::max(r.tau.tau_pos(j), r.tau.tau_neg(j)));
        CHECK(r.selected_m == select_by_tau(r.tau.tau, 0.5));
        const int positive = static_cast<int>((r.tau.tau.array() > 0).count());
        CHECK(static_cast<int>(r.selected_s.size()) == std::min(r.size_threshold_s, positive));
        CHECK(r.size_threshold_s == median_size(run.collection.support_sizes()));
        for (std::size_t k = 0; k < r.path_order.size(); ++k)
            CHECK(r.rank[static_cast<std::size_t>(r.path_order[k])] == static_cast<int>(k) + 1);
        CHECK(r.final_m.fit.support == r.selected_m);
        CHECK(r.summaries.size() == 40);
        for (Index j = 0; j < 40; ++j) {
            const auto& s = r.summaries[static_cast<std::size_t>(j)];
            CHECK(s.count_positive + s.count_negative == s.count_nonzero);
            CHECK(std::max(s.count_positive, s.count_negative) ==
                  static_cast<int>(std::lround(r.tau.tau(j) * static_cast<double>(run.collection.models.size()))));
        }
        for (int j : g.true_support) CHECK(r.tau.tau(j) >= 0.5);
    }

    TEST_CASE("final coefficients") {
        const GeneratedDataset g = generate(ModelSpec::model2(10, 3, 0.0, 9), 0);
        const FinalFit none = estimate_final_coefficients(g.design, {}, 10, 1);
        CHECK(none.fit.coefficients.size() == 0);
        CHECK(none.fit.intercept == doctest::Approx(g.design.y.mean()));

        StandardizedDesign noiseless = g.design;
        noiseless.y = g.design.X * g.true_beta;
        noiseless.y.array() += 2.5;
        const FinalFit exact = estimate_final_coefficients(noiseless, g.true_support, 10, 1);
        CHECK(!exact.used_ridge);
        CHECK((exact.fit.dense(10) - g.true_beta).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(exact.fit.intercept == doctest::Approx(2.5));

        const StandardizedDesign wide = oracle::random_problem(12, 30, 3);
        std::vector<int> all(12);
        for (int j = 0; j < 12; ++j) all[static_cast<std::size_t>(j)] = j;
        const FinalFit ridge = estimate_final_coefficients(wide, all, 10, 1);
        CHECK(ridge.used_ridge);
        CHECK(ridge.fit.coefficients.allFinite());
        CHECK(ridge.ridge_lambda > 0.0);
    }

    TEST_CASE("a very low threshold forces the ridge fallback") {
        const GeneratedDataset g = generate(ModelSpec::model2(60, 3, 0.5, 10), 0);
        StandardizedDesign d = g.design;
        std::vector<int> rows(20);
        for (int i = 0; i < 20; ++i) rows[static_cast<std::size_t>(i)] = i;
        d = standardize_rows(d, rows);
        CsuvConfig cfg = small_config(10);
        cfg.retain_percent = 50.0;
        cfg.threshold = 0.01;
        const CsuvRun run = run_csuv(d, cfg);
        REQUIRE(static_cast<Index>(run.result.selected_m.size()) >= d.rows());
        CHECK(run.result.final_m.used_ridge);
        CHECK(run.result.final_m.fit.coefficients.allFinite());
    }
}

TEST_SUITE("summaries") {
    TEST_CASE("quantiles of (1..100)/100") {
        std::vector<double> x;
        for (int i = 1; i <= 100; ++i) x.push_back(i / 100.0);
        // Type-7 values, computed independently in arbitrary precision.
        CHECK(quantile_sorted(x, 5) == doctest::Approx(0.0595).epsilon(1e-12));
        CHECK(quantile_sorted(x, 25) == doctest::Approx(0.2575).epsilon(1e-12));
        CHECK(quantile_sorted(x, 50) == doctest::Approx(0.505).epsilon(1e-12));
        CHECK(quantile_sorted(x, 75) == doctest::Approx(0.7525).epsilon(1e-12));
        CHECK(quantile_sorted(x, 95) == doctest::Approx(0.9505).epsilon(1e-12));
        const CoefficientSummary s = summarize_coefficients(x, 100, {5.0, 95.0});
        CHECK(std::abs(s.whiskers[0] - 0.05) <= 0.01);
        CHECK(std::abs(s.whiskers[1] - 0.95) <= 0.01);
        CHECK(s.conditional[2] == doctest::Approx(0.505));
    }

    TEST_CASE("quantiles agree with the textbook formula") {
        auto rng = SplitMix64::stream(5, "quantile");
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(uniform_index(rng, 1, 40));
            for (double& v : x) v = uniform(rng, -3.0, 3.0);
            std::vector<double> sorted = x;
            std::sort(sorted.begin(), sorted.end());
            for (double pct : {0.0, 2.5, 5.0, 25.0, 50.0, 75.0, 90.0, 95.0, 100.0})
                CHECK(quantile_sorted(sorted, pct) == doctest::Approx(oracle::quantile7(x, pct / 100.0)).epsilon(1e-13));
        }
        CHECK_THROWS_AS(quantile_sorted({}, 50), InvalidInput);
        CHECK_THROWS_AS(quantile_sorted({1.0}, 101), InvalidInput);
    }

    TEST_CASE("unconditional quantiles include the zeros") {
        const CoefficientSummary s = summarize_coefficients({1.0, 2.0, -1.0}, 10, {5.0, 95.0});
        CHECK(s.count_nonzero == 3);
        CHECK(s.count_positive == 2);
        CHECK(s.count_negative == 1);
        std::vector<double> all{1.0, 2.0, -1.0, 0, 0, 0, 0, 0, 0, 0};
        for (std::size_t k = 0; k < 5; ++k) {
            const double pct = std::array<double, 5>{5, 25, 50, 75, 95}[k];
            CHECK(s.unconditional[k] == doctest::Approx(oracle::quantile7(all, pct / 100.0)));
        }
        CHECK(s.unconditional[2] == 0.0);
        CHECK_THROWS_AS(summarize_coefficients({1.0, 2.0}, 1, {5.0, 95.0}), InvalidInput);
        const CoefficientSummary none = summarize_coefficients({}, 5, {5.0, 95.0});
        CHECK(none.violin_x.empty());
    }

    TEST_CASE("violin density integrates to about one") {
        auto rng = SplitMix64::stream(6, "violin");
        std::vector<double> x(200);
        for (double& v : x) v = 1.0 + 0.3 * standard_normal(rng);
        std::sort(x.begin(), x.end());
        std::vector<double> at, dens;
        kernel_density(x, 64, at, dens);
        REQUIRE(at.size() == 64);
        double area = 0.0;
        for (std::size_t k = 1; k < at.size(); ++k) area += 0.5 * (dens[k] + dens[k - 1]) * (at[k] - at[k - 1]);
        CHECK(area == doctest::Approx(1.0).epsilon(0.01));
        for (double d : dens) CHECK(d >= 0.0);

        std::vector<double> constant(5, 0.7);
        kernel_density(constant, 64, at, dens);
        CHECK(at.front() < 0.7);
        CHECK(at.back() > 0.7);
        for (double d : dens) CHECK(std::isfinite(d));
    }
}

TEST_SUITE("properties") {
    TEST_CASE("CSUV-m minimizes the total Hamming distance") {
        auto rng = SplitMix64::stream(7, "prop1");
        for (int trial = 0; trial < 30; ++trial) {
            const int p = static_cast<int>(uniform_index(rng, 1, 8));
            const int k = static_cast<int>(uniform_index(rng, 3, 9));
            RetainedCollection c = random_collection(rng, k, p, 0.5, true);
            const std::vector<int> m = select_by_tau(compute_tau(c, p).tau, 0.5);
            auto total = [&](unsigned mask) {
                int d = 0;
                for (const auto& mod : c.models) {
                    unsigned sm = 0;
                    for (int j : mod.support) sm |= 1u << j;
                    d += __builtin_popcount(sm ^ mask);
                }
                return d;
            };
            unsigned chosen = 0;
            for (int j : m) chosen |= 1u << j;
            int best = 1 << 30;
            for (unsigned mask = 0; mask < (1u << p); ++mask) best = std::min(best, total(mask));
            CHECK(total(chosen) == best);
        }
    }
}
