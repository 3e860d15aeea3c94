#include "csuv/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "csuv/error.hpp"

namespace csuv {

using nlohmann::json;

namespace {

int shade_decile(double tau) { return static_cast<int>(std::floor(10.0 * tau + 1e-9)); }

json quantiles_json(const std::array<double, 5>& q) {
    return json{{"p5", q[0]}, {"p25", q[1]}, {"p50", q[2]}, {"p75", q[3]}, {"p95", q[4]}};
}

std::array<double, 5> quantiles_from(const json& j) {
    return {j.at("p5").get<double>(), j.at("p25").get<double>(), j.at("p50").get<double>(), j.at("p75").get<double>(),
            j.at("p95").get<double>()};
}

json sparse_json(const std::vector<SparseEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) arr.push_back({{"index", e.index}, {"value", e.value}});
    return arr;
}

std::vector<SparseEntry> sparse_from(const json& arr) {
    std::vector<SparseEntry> out;
    for (const auto& e : arr) out.push_back({e.at("index").get<int>(), e.at("value").get<double>()});
    return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::vector<int> one_based(const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int j : idx) out.push_back(j + 1);
    return out;
}

}  // namespace

ComparisonFit make_comparison(std::string label, const Eigen::VectorXd& coefficients) {
    ComparisonFit c;
    c.label = std::move(label);
    for (Index j = 0; j < coefficients.size(); ++j)
        if (coefficients(j) != 0.0) c.coefficients.push_back({static_cast<int>(j) + 1, coefficients(j)});
    return c;
}

UncertaintyBundle plot_bundle(const RetainedCollection& collection, const CsuvResult& result, const CsuvConfig& config,
                              const std::vector<std::string>& names, const std::vector<ComparisonFit>& comparisons) {
    const auto p = static_cast<int>(result.tau.tau.size());
    UncertaintyBundle b;
    b.p = p;
    b.config.repetitions = config.repetitions;
    b.config.retain_percent = config.retain_percent;
    b.config.train_percent = config.train_percent;
    b.config.threshold = config.threshold;
    for (const auto& m : config.methods) b.config.methods.push_back(m.name());
    b.config.seed = config.seed;
    b.config.whiskers = config.whiskers;
    b.retained_models = static_cast<int>(collection.models.size());
    b.size_threshold_s = result.size_threshold_s;
    b.selected_m = one_based(result.selected_m);
    b.selected_s = one_based(result.selected_s);
    b.final_intercept = result.final_m.fit.intercept;
    for (std::size_t a = 0; a < result.final_m.fit.support.size(); ++a)
        b.final_coefficients.push_back(
            {result.final_m.fit.support[a] + 1, result.final_m.fit.coefficients(static_cast<Index>(a))});
    b.comparisons = comparisons;

    std::vector<int> selected_by(static_cast<std::size_t>(p), 0);
    for (const auto& c : comparisons)
        for (const auto& e : c.coefficients)
            if (e.index >= 1 && e.index <= p && e.value != 0.0) ++selected_by[static_cast<std::size_t>(e.index - 1)];

    const Eigen::VectorXd final_dense = result.final_m.fit.dense(p);
    for (int j : result.path_order) {
        const double tau = result.tau.tau(j);
        if (tau < kDisplayFloor) break;  // path is sorted by tau
        const CoefficientSummary& s = result.summaries[static_cast<std::size_t>(j)];
        BundleRecord r;
        r.index = j + 1;
        r.name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : "X" + std::to_string(j + 1);
        r.rank = result.rank[static_cast<std::size_t>(j)];
        r.tau = tau;
        r.tau_pos = result.tau.tau_pos(j);
        r.tau_neg = result.tau.tau_neg(j);
        r.shade_decile = shade_decile(tau);
        r.count_nonzero = s.count_nonzero;
        r.mean_coefficient = result.mean_coefficients(j);
        r.cond_quantiles = s.conditional;
        r.whisker_percents = config.whiskers;
        r.whiskers = s.whiskers;
        r.violin_x = s.violin_x;
        r.violin_density = s.violin_density;
        r.uncond_quantiles = s.unconditional;
        if (std::binary_search(result.selected_m.begin(), result.selected_m.end(), j)) r.csuv_m_coefficient = final_dense(j);
        if (!comparisons.empty())
            r.group_selection_pct =
                100.0 * selected_by[static_cast<std::size_t>(j)] / static_cast<double>(comparisons.size());
        b.records.push_back(std::move(r));
    }

    const int shown = static_cast<int>(b.records.size());
    int m_count = 0;
    for (const auto& r : b.records)
        if (r.tau >= config.threshold) ++m_count;
    b.cutoff_m = std::min(m_count, shown);
    b.cutoff_s = std::min(static_cast<int>(result.selected_s.size()), shown);
    return b;
}

std::vector<bool> whisker_zero_diagnostic(const UncertaintyBundle& bundle) {
    std::vector<bool> flags;
    flags.reserve(bundle.records.size());
    for (const auto& r : bundle.records) flags.push_back(r.whiskers[0] <= 0.0 && 0.0 <= r.whiskers[1]);
    return flags;
}

json to_json(const UncertaintyBundle& b) {
    json records = json::array();
    for (const auto& r : b.records) {
        records.push_back({
            {"index", r.index},
            {"name", r.name},
            {"rank", r.rank},
            {"tau", r.tau},
            {"tau_pos", r.tau_pos},
            {"tau_neg", r.tau_neg},
            {"shade_decile", r.shade_decile},
            {"count_nonzero", r.count_nonzero},
            {"mean_coefficient", r.mean_coefficient},
            {"cond_quantiles", quantiles_json(r.cond_quantiles)},
            {"whiskers",
             {{"low_pct", r.whisker_percents[0]},
              {"high_pct", r.whisker_percents[1]},
              {"low", r.whiskers[0]},
              {"high", r.whiskers[1]}}},
            {"violin", {{"x", r.violin_x}, {"density", r.violin_density}}},
            {"uncond_quantiles", quantiles_json(r.uncond_quantiles)},
            {"csuv_m_coefficient", optional_json(r.csuv_m_coefficient)},
            {"group_selection_pct", optional_json(r.group_selection_pct)},
        });
    }
    json comparisons = json::array();
    for (const auto& c : b.comparisons) comparisons.push_back({{"label", c.label}, {"coefficients", sparse_json(c.coefficients)}});

    return json{
        {"version", b.version},
        {"generated_at", b.generated_at},
        {"dataset", {{"digest", b.dataset_digest}, {"n", b.n}, {"p", b.p}}},
        {"config",
         {{"B", b.config.repetitions},
          {"q", b.config.retain_percent},
          {"w", b.config.train_percent},
          {"t", b.config.threshold},
          {"methods", b.config.methods},
          {"seed", b.config.seed},
          {"whiskers", b.config.whiskers}}},
        {"retained_models", b.retained_models},
        {"size_threshold_s", b.size_threshold_s},
        {"selected_m", b.selected_m},
        {"selected_s", b.selected_s},
        {"final", {{"intercept", b.final_intercept}, {"coefficients", sparse_json(b.final_coefficients)}}},
        {"cutoffs", {{"m_rank", b.cutoff_m}, {"s_rank", b.cutoff_s}}},
        {"records", std::move(records)},
        {"comparisons", std::move(comparisons)},
    };
}

void validate_bundle(const UncertaintyBundle& b) {
    if (b.version != kBundleVersion) throw InvalidInput("unsupported bundle version '" + b.version + "'");
    const auto count = static_cast<int>(b.records.size());
    for (int k = 0; k < count; ++k) {
        const auto& r = b.records[static_cast<std::size_t>(k)];
        if (r.tau < kDisplayFloor) throw InvalidInput("bundle record below the tau display floor");
        if (r.tau > 1.0 || r.tau_pos < 0.0 || r.tau_neg < 0.0) throw InvalidInput("bundle tau out of range");
        if (k > 0 && r.rank <= b.records[static_cast<std::size_t>(k - 1)].rank)
            throw InvalidInput("bundle records are not sorted by rank");
        if (r.index < 1 || (b.p > 0 && r.index > b.p)) throw InvalidInput("bundle record index out of range");
        if (r.violin_x.size() != r.violin_density.size()) throw InvalidInput("violin arrays differ in length");
    }
    if (b.cutoff_m < 0 || b.cutoff_m > count || b.cutoff_s < 0 || b.cutoff_s > count)
        throw InvalidInput("bundle cut-offs outside [0, record count]");
}

UncertaintyBundle bundle_from_json(const json& doc) {
    UncertaintyBundle b;
    try {
        b.version = doc.at("version").get<std::string>();
        if (b.version != kBundleVersion) throw InvalidInput("unsupported bundle version '" + b.version + "'");
        b.generated_at = doc.value("generated_at", std::string{});
        const auto& ds = doc.at("dataset");
        b.dataset_digest = ds.at("digest").get<std::string>();
        b.n = ds.at("n").get<int>();
        b.p = ds.at("p").get<int>();
        const auto& cfg = doc.at("config");
        b.config.repetitions = cfg.at("B").get<int>();
        b.config.retain_percent = cfg.at("q").get<double>();
        b.config.train_percent = cfg.at("w").get<double>();
        b.config.threshold = cfg.at("t").get<double>();
        b.config.methods = cfg.at("methods").get<std::vector<std::string>>();
        b.config.seed = cfg.at("seed").get<std::uint64_t>();
        b.config.whiskers = cfg.at("whiskers").get<std::array<double, 2>>();
        b.retained_models = doc.at("retained_models").get<int>();
        b.size_threshold_s = doc.at("size_threshold_s").get<int>();
        b.selected_m = doc.at("selected_m").get<std::vector<int>>();
        b.selected_s = doc.at("selected_s").get<std::vector<int>>();
        b.final_intercept = doc.at("final").at("intercept").get<double>();
        b.final_coefficients = sparse_from(doc.at("final").at("coefficients"));
        b.cutoff_m = doc.at("cutoffs").at("m_rank").get<int>();
        b.cutoff_s = doc.at("cutoffs").at("s_rank").get<int>();
        for (const auto& r : doc.at("records")) {
            BundleRecord rec;
            rec.index = r.at("index").get<int>();
            rec.name = r.at("name").get<std::string>();
            rec.rank = r.at("rank").get<int>();
            rec.tau = r.at("tau").get<double>();
            rec.tau_pos = r.at("tau_pos").get<double>();
            rec.tau_neg = r.at("tau_neg").get<double>();
            rec.shade_decile = r.at("shade_decile").get<int>();
            rec.count_nonzero = r.at("count_nonzero").get<int>();
            rec.mean_coefficient = r.at("mean_coefficient").get<double>();
            rec.cond_quantiles = quantiles_from(r.at("cond_quantiles"));
            const auto& w = r.at("whiskers");
            rec.whisker_percents = {w.at("low_pct").get<double>(), w.at("high_pct").get<double>()};
            rec.whiskers = {w.at("low").get<double>(), w.at("high").get<double>()};
            rec.violin_x = r.at("violin").at("x").get<std::vector<double>>();
            rec.violin_density = r.at("violin").at("density").get<std::vector<double>>();
            rec.uncond_quantiles = quantiles_from(r.at("uncond_quantiles"));
            rec.csuv_m_coefficient = optional_from(r, "csuv_m_coefficient");
            rec.group_selection_pct = optional_from(r, "group_selection_pct");
            b.records.push_back(std::move(rec));
        }
        for (const auto& c : doc.at("comparisons"))
            b.comparisons.push_back({c.at("label").get<std::string>(), sparse_from(c.at("coefficients"))});
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed bundle: ") + e.what());
    }
    validate_bundle(b);
    return b;
}

std::string serialize_bundle(const UncertaintyBundle& bundle) { return to_json(bundle).dump(2) + "\n"; }

std::string dataset_digest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw Error("cannot allocate digest context");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    auto feed = [&](const void* data, std::size_t len) { EVP_DigestUpdate(ctx, data, len); };
    const std::int64_t shape[2] = {static_cast<std::int64_t>(X.rows()), static_cast<std::int64_t>(X.cols())};
    feed(shape, sizeof(shape));
    for (const auto& name : names) feed(name.c_str(), name.size() + 1);
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            const double v = X(i, j);
            feed(&v, sizeof(v));
        }
        const double v = y(i);
        feed(&v, sizeof(v));
    }
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, out, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    hex << "sha256:";
    for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(out[k]);
    return hex.str();
}

}  // namespace csuv
