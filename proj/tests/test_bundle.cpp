#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "csuv/bundle.hpp"
#include "csuv/error.hpp"
#include "csuv/simgen.hpp"

using namespace csuv;
using nlohmann::json;

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

// Aggregation steps of a run on a hand-made collection (no final refit).
CsuvResult aggregate(const RetainedCollection& c, const CsuvConfig& cfg) {
    const Index p = c.p;
    CsuvResult r;
    r.tau = compute_tau(c, p);
    r.mean_coefficients = mean_coefficients(c, p);
    r.selected_m = select_by_tau(r.tau.tau, cfg.threshold);
    r.path_order = solution_path(r.tau.tau, r.mean_coefficients);
    r.rank.assign(static_cast<std::size_t>(p), 0);
    for (std::size_t k = 0; k < r.path_order.size(); ++k) r.rank[static_cast<std::size_t>(r.path_order[k])] = static_cast<int>(k) + 1;
    r.size_threshold_s = median_size(c.support_sizes());
    r.selected_s = csuv_s_select(r.path_order, r.tau.tau, c.support_sizes());
    r.final_m.fit.support = r.selected_m;
    r.final_m.fit.coefficients = Eigen::VectorXd::LinSpaced(static_cast<Index>(r.selected_m.size()), 1.0, 2.0);
    for (Index j = 0; j < p; ++j) {
        std::vector<double> nz;
        for (const auto& m : c.models)
            if (m.coefficient(static_cast<int>(j)) != 0.0) nz.push_back(m.coefficient(static_cast<int>(j)));
        r.summaries.push_back(summarize_coefficients(nz, static_cast<int>(c.models.size()), cfg.whiskers));
    }
    return r;
}

// 20 models over 5 covariates: tau = (1.0, 0.45, 0.6, 0.05, 0).
RetainedCollection fixture() {
    RetainedCollection c;
    c.p = 5;
    for (int k = 0; k < 20; ++k) {
        std::vector<std::pair<int, double>> e{{0, 1.0 + 0.01 * k}};
        if (k < 9) e.emplace_back(1, -0.5 - 0.01 * k);
        if (k >= 8) e.emplace_back(2, 0.3 + 0.01 * k);
        if (k == 19) e.emplace_back(3, 0.2);
        c.models.push_back(model(e));
    }
    return c;
}

UncertaintyBundle fixture_bundle(const std::vector<ComparisonFit>& comparisons = {}) {
    CsuvConfig cfg;
    const RetainedCollection c = fixture();
    UncertaintyBundle b = plot_bundle(c, aggregate(c, cfg), cfg, {"a", "b", "c", "d", "e"}, comparisons);
    b.n = 40;
    b.dataset_digest = "sha256:00";
    return b;
}

}  // namespace

TEST_SUITE("bundle") {
    TEST_CASE("records follow the path and respect the display floor") {
        const UncertaintyBundle b = fixture_bundle();
        REQUIRE(b.records.size() == 3);
        CHECK(b.records[0].name == "a");
        CHECK(b.records[0].index == 1);
        CHECK(b.records[0].tau == 1.0);
        CHECK(b.records[0].shade_decile == 10);
        for (std::size_t k = 0; k < b.records.size(); ++k) {
            CHECK(b.records[k].rank == static_cast<int>(k) + 1);
            CHECK(b.records[k].tau >= kDisplayFloor);
            CHECK(b.records[k].shade_decile == static_cast<int>(std::floor(10.0 * b.records[k].tau + 1e-9)));
        }
        for (const auto& r : b.records) CHECK(r.index != 4);  // tau 0.05
        for (const auto& r : b.records) CHECK(r.index != 5);  // never selected
        CHECK_NOTHROW(validate_bundle(b));
    }

    TEST_CASE("tau 0.45 is shown right of the CSUV-m cut-off") {
        const UncertaintyBundle b = fixture_bundle();
        auto it = std::find_if(b.records.begin(), b.records.end(), [](const BundleRecord& r) { return r.index == 2; });
        REQUIRE(it != b.records.end());
        CHECK(it->tau == doctest::Approx(0.45));
        CHECK(it->shade_decile == 4);
        CHECK(it->rank > b.cutoff_m);
        CHECK(!it->csuv_m_coefficient.has_value());
        CHECK(b.cutoff_m == 2);
        CHECK(b.selected_m == std::vector<int>{1, 3});
    }

    TEST_CASE("CSUV-m dots carry the final coefficients") {
        const UncertaintyBundle b = fixture_bundle();
        for (const auto& r : b.records) {
            const bool in_m = std::binary_search(b.selected_m.begin(), b.selected_m.end(), r.index);
            CHECK(r.csuv_m_coefficient.has_value() == in_m);
        }
        REQUIRE(b.final_coefficients.size() == 2);
        CHECK(b.records[0].csuv_m_coefficient.value() == b.final_coefficients[0].value);
        CHECK(b.cutoff_s == static_cast<int>(b.selected_s.size()));
    }

    TEST_CASE("group selection percentages") {
        Eigen::VectorXd first = Eigen::VectorXd::Zero(5), second = Eigen::VectorXd::Zero(5);
        first << 0.5, 0.0, 1.0, 0.0, 0.0;
        second << 0.2, -0.1, 0.0, 0.0, 0.0;
        const ComparisonFit a = make_comparison("lasso", first);
        CHECK(a.coefficients == std::vector<SparseEntry>{{1, 0.5}, {3, 1.0}});
        const UncertaintyBundle b = fixture_bundle({a, make_comparison("mcp", second)});
        for (const auto& r : b.records) {
            REQUIRE(r.group_selection_pct.has_value());
            const double expect = r.index == 1 ? 100.0 : 50.0;
            CHECK(*r.group_selection_pct == expect);
        }
        for (const auto& r : fixture_bundle().records) CHECK(!r.group_selection_pct.has_value());
    }

    TEST_CASE("whisker diagnostic") {
        UncertaintyBundle b = fixture_bundle();
        b.records[0].whiskers = {0.2, 0.9};
        b.records[1].whiskers = {-0.1, 0.3};
        b.records[2].whiskers = {-0.9, -0.2};
        CHECK(whisker_zero_diagnostic(b) == std::vector<bool>{false, true, false});
    }

    TEST_CASE("serialization round-trips") {
        Eigen::VectorXd cmp = Eigen::VectorXd::Zero(5);
        cmp(0) = 0.7;
        UncertaintyBundle b = fixture_bundle({make_comparison("scad", cmp)});
        b.generated_at = "2026-01-01T00:00:00Z";
        const std::string text = serialize_bundle(b);
        const UncertaintyBundle back = bundle_from_json(json::parse(text));
        CHECK(back == b);
        CHECK(serialize_bundle(back) == text);

        const json doc = json::parse(text);
        CHECK(doc.at("version") == "csuv-bundle/1");
        CHECK(doc.at("records")[1].at("csuv_m_coefficient").is_number());
        CHECK(doc.at("records")[0].at("cond_quantiles").contains("p95"));
        CHECK(doc.at("cutoffs").at("m_rank") == 2);
    }

    TEST_CASE("a real run round-trips and validates") {
        const GeneratedDataset g = generate(ModelSpec::model2(20, 3, 0.5, 2), 0);
        CsuvConfig cfg;
        cfg.repetitions = 10;
        cfg.jobs = 1;
        const CsuvRun run = run_csuv(g.design, cfg);
        UncertaintyBundle b = plot_bundle(run.collection, run.result, cfg);
        b.n = static_cast<int>(g.design.rows());
        CHECK(b.p == 20);
        CHECK_NOTHROW(validate_bundle(b));
        CHECK(bundle_from_json(to_json(b)) == b);
        int shown = 0;
        for (Index j = 0; j < 20; ++j) shown += run.result.tau.tau(j) >= kDisplayFloor;
        CHECK(static_cast<int>(b.records.size()) == shown);
        CHECK(b.records.front().name == "X" + std::to_string(b.records.front().index));
    }

    TEST_CASE("validation rejects broken bundles") {
        const UncertaintyBundle good = fixture_bundle();
        UncertaintyBundle b = good;
        b.version = "csuv-bundle/0";
        CHECK_THROWS_AS(validate_bundle(b), InvalidInput);
        b = good;
        std::swap(b.records[0], b.records[1]);
        CHECK_THROWS_AS(validate_bundle(b), InvalidInput);
        b = good;
        b.records[2].tau = 0.05;
        CHECK_THROWS_AS(validate_bundle(b), InvalidInput);
        b = good;
        b.cutoff_s = 4;
        CHECK_THROWS_AS(validate_bundle(b), InvalidInput);
        b = good;
        b.records[0].violin_density.pop_back();
        CHECK_THROWS_AS(validate_bundle(b), InvalidInput);

        json doc = to_json(good);
        doc.erase("records");
        CHECK_THROWS_AS(bundle_from_json(doc), InvalidInput);
        doc = to_json(good);
        doc["records"][0]["tau"] = "high";
        CHECK_THROWS_AS(bundle_from_json(doc), InvalidInput);
        doc = to_json(good);
        doc["version"] = "other";
        CHECK_THROWS_AS(bundle_from_json(doc), InvalidInput);
    }

    TEST_CASE("dataset digest") {
        Eigen::MatrixXd X(2, 1);
        X << 1.0, 2.0;
        const Eigen::Vector2d y(3.0, 4.0);
        // SHA-256 of the same byte layout, computed with an independent hashing tool.
        CHECK(dataset_digest(X, y, {"a"}) == "sha256:cc9a64e0bde2dc6d907585c4f8ab3c3335bc5e7950865079aae99820d4348d98");
        Eigen::MatrixXd X2 = X;
        X2(1, 0) = std::nextafter(2.0, 3.0);
        CHECK(dataset_digest(X2, y, {"a"}) != dataset_digest(X, y, {"a"}));
        CHECK(dataset_digest(X, y, {"b"}) != dataset_digest(X, y, {"a"}));
    }
}
