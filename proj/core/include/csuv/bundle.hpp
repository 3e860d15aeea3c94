#pragma once

// Uncertainty-plot data ("csuv-bundle/1"): per-covariate tau, solution-path
// rank, conditional box/whisker statistics, violin densities, cut-off
// positions and optional comparison-method overlays.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "csuv/engine.hpp"

namespace csuv {

inline constexpr std::string_view kBundleVersion = "csuv-bundle/1";
/// Covariates with tau below this are left out of the plot.
inline constexpr double kDisplayFloor = 0.1;

struct SparseEntry {
    int index = 0;  // 1-based covariate position
    double value = 0.0;
    bool operator==(const SparseEntry&) const = default;
};

struct ComparisonFit {
    std::string label;
    std::vector<SparseEntry> coefficients;
    bool operator==(const ComparisonFit&) const = default;
};

/// Dense coefficient vector (length p) turned into a comparison overlay.
ComparisonFit make_comparison(std::string label, const Eigen::VectorXd& coefficients);

struct BundleRecord {
    int index = 0;  // 1-based covariate position
    std::string name;
    int rank = 0;   // 1-based solution-path position
    double tau = 0.0;
    double tau_pos = 0.0;
    double tau_neg = 0.0;
    int shade_decile = 0;
    int count_nonzero = 0;
    double mean_coefficient = 0.0;
    std::array<double, 5> cond_quantiles{};    // p5, p25, p50, p75, p95
    std::array<double, 2> whisker_percents{};  // e.g. 5, 95
    std::array<double, 2> whiskers{};          // conditional quantiles at whisker_percents
    std::vector<double> violin_x;
    std::vector<double> violin_density;
    std::array<double, 5> uncond_quantiles{};
    std::optional<double> csuv_m_coefficient;
    std::optional<double> group_selection_pct;

    bool operator==(const BundleRecord&) const = default;
};

struct BundleConfigEcho {
    int repetitions = 0;
    double retain_percent = 0.0;
    double train_percent = 0.0;
    double threshold = 0.0;
    std::vector<std::string> methods;
    std::uint64_t seed = 0;
    std::array<double, 2> whiskers{};
    bool operator==(const BundleConfigEcho&) const = default;
};

struct UncertaintyBundle {
    std::string version{kBundleVersion};
    std::string generated_at;  // excluded from digests and determinism checks
    std::string dataset_digest;
    int n = 0;
    int p = 0;
    BundleConfigEcho config;
    int retained_models = 0;
    int size_threshold_s = 0;
    std::vector<int> selected_m;  // 1-based
    std::vector<int> selected_s;  // 1-based
    double final_intercept = 0.0;
    std::vector<SparseEntry> final_coefficients;  // CSUV-m final fit
    int cutoff_m = 0;  // records left of the CSUV-m line
    int cutoff_s = 0;  // records left of the CSUV-s line
    std::vector<BundleRecord> records;
    std::vector<ComparisonFit> comparisons;

    bool operator==(const UncertaintyBundle&) const = default;
};

/// Builds the plot bundle. `names` labels covariates (defaults to X1..Xp).
UncertaintyBundle plot_bundle(const RetainedCollection& collection, const CsuvResult& result, const CsuvConfig& config,
                              const std::vector<std::string>& names = {},
                              const std::vector<ComparisonFit>& comparisons = {});

/// True per record when its whisker interval contains zero.
std::vector<bool> whisker_zero_diagnostic(const UncertaintyBundle& bundle);

nlohmann::json to_json(const UncertaintyBundle& bundle);
/// Parses and validates; throws InvalidInput on schema violations.
UncertaintyBundle bundle_from_json(const nlohmann::json& doc);
/// Throws InvalidInput when invariants do not hold (version, ordering, floor, cut-offs).
void validate_bundle(const UncertaintyBundle& bundle);

std::string serialize_bundle(const UncertaintyBundle& bundle);

/// Hex SHA-256 over shape, column names, and the raw values of X and y.
std::string dataset_digest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names);

}  // namespace csuv
