#pragma once

// Subcommands of the csuv command-line tool: fit, simulate, serve, generate.
// Each cmd_* returns a process exit code; the underlying steps are exposed
// separately so they can be driven from tests.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csuv/bundle.hpp"
#include "csuv/csv.hpp"
#include "csuv/engine.hpp"
#include "csuv/simgen.hpp"

namespace csuv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;

std::vector<PenaltySpec> parse_methods(const std::string& list);
std::array<double, 2> parse_whiskers(const std::string& text);

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string csv_path;
    std::string response = "y";
    CsuvConfig config;
    /// CSV of comparison fits: a "label" column followed by one column per covariate.
    std::string compare_path;
    /// Also overlay the cross-validated constituent fits.
    bool compare_constituents = false;
    std::string out_path = "csuv_bundle.json";
    std::string report_path;
    bool timestamp = true;
};

struct FitOutcome {
    UncertaintyBundle bundle;
    CsuvRun run;
    StandardizedDesign design;
    double seconds = 0.0;
};

/// Runs the whole fit on in-memory data. Throws on invalid input.
FitOutcome fit_dataset(const RegressionData& data, const FitArgs& args,
                       const std::vector<ComparisonFit>& comparisons = {});

std::string fit_report(const FitOutcome& outcome);

/// Reads the comparison table and maps its columns onto `names`.
std::vector<ComparisonFit> read_comparisons(const std::string& path, const std::vector<std::string>& names);

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);

// ----------------------------------------------------------- simulate

struct SourceConfig {
    enum class Kind { generator, csv } kind = Kind::generator;
    ModelSpec model;
    std::string csv_path;
    std::string response = "y";
    std::vector<int> truth;         // 0-based; csv sources only
    double test_fraction = 0.3;     // csv sources only
    Index test_rows = 1000;         // generator sources only
};

struct BaselineToggles {
    bool constituents = true;
    bool bic = true;
    bool ebic = true;
    double ebic_gamma = 0.5;
    bool delete_half = true;
    int delete_half_repetitions = 100;
    int cv_folds = 10;
};

struct ExperimentConfig {
    SourceConfig source;
    CsuvConfig csuv;
    BaselineToggles baselines;
    int realizations = 100;
    std::uint64_t seed = 1;
    std::string output_dir = "results";
};

/// Validates the document against the experiment schema (unknown keys and
/// wrong types are rejected) and fills in defaults.
ExperimentConfig parse_experiment(const nlohmann::json& doc);

struct MethodScore {
    std::string method;
    int tp = 0, fp = 0, fn = 0;
    double f_measure = 0.0;
    double test_mse = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    int size = 0;
    std::vector<int> selected;
};

struct RealizationResult {
    int realization = 0;
    std::string error;  // empty on success
    bool has_truth = true;
    std::vector<MethodScore> scores;
    double seconds = 0.0;
};

/// Scores every method on one realization.
RealizationResult run_realization(const ExperimentConfig& config, int realization);

struct SimulationOutput {
    std::vector<RealizationResult> realizations;
    std::vector<std::string> methods;
    std::string per_realization_csv;
    std::string summary_csv;
    std::string disagreement_csv;
    int failures = 0;
};

/// All realizations, spread over `jobs` threads; output is independent of jobs.
SimulationOutput run_simulation(const ExperimentConfig& config, int jobs);

int cmd_simulate(const std::string& config_path, const std::string& output_dir, int jobs, std::ostream& out,
                 std::ostream& err);

// -------------------------------------------------------------- serve

/// Read-only HTTP front end over a validated bundle: UI assets at /, the
/// bundle at /api/bundle and a health probe at /api/health.
class BundleServer {
public:
    /// `bundle_text` must parse as a valid bundle; it is served byte for byte.
    BundleServer(std::string bundle_text, std::string ui_dir = {});
    ~BundleServer();
    BundleServer(const BundleServer&) = delete;
    BundleServer& operator=(const BundleServer&) = delete;

    /// False when the address cannot be bound (port busy).
    bool bind(const std::string& host, int port);
    /// Binds an ephemeral port and returns it (negative on failure).
    int bind_any(const std::string& host);
    /// Blocks until stop().
    void listen();
    /// Blocks until listen() is accepting connections.
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string health_json();

int cmd_serve(const std::string& bundle_path, const std::string& host, int port, const std::string& ui_dir,
              std::ostream& out, std::ostream& err);

// ----------------------------------------------------------- generate

struct GenerateArgs {
    ModelSpec model;
    int realization = 0;
    std::string out_path;
    std::string response = "y";
};

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);

/// Data set as CSV text: covariate columns X1..Xp then the response.
std::string dataset_csv(const StandardizedDesign& design, const std::string& response);

}  // namespace csuv::cli
