#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "csuv/error.hpp"
#include "csuv/simgen.hpp"
#include "csuv_cli/commands.hpp"

#include <httplib.h>

using namespace csuv;
using namespace csuv::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("csuv_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

FitArgs small_fit(const std::string& csv, const std::string& out, int jobs = 1) {
    FitArgs a;
    a.csv_path = csv;
    a.out_path = out;
    a.report_path = out + ".txt";
    a.config.repetitions = 12;
    a.config.seed = 5;
    a.config.jobs = jobs;
    a.timestamp = false;
    return a;
}

std::string model2_csv(const TempDir& dir) {
    const std::string path = dir.file("m2.csv");
    write_text(path, dataset_csv(generate(ModelSpec::model2(15, 3, 0.5, 3), 0).design, "y"));
    return path;
}

}  // namespace

TEST_SUITE("fit command") {
    TEST_CASE("fit writes a valid bundle and a report") {
        TempDir dir;
        const FitArgs args = small_fit(model2_csv(dir), dir.file("bundle.json"));
        std::ostringstream out, err;
        REQUIRE(cmd_fit(args, out, err) == kExitOk);
        const UncertaintyBundle b = bundle_from_json(nlohmann::json::parse(read_text(args.out_path)));
        CHECK(b.p == 15);
        CHECK(b.n == 100);
        CHECK(b.config.repetitions == 12);
        CHECK(b.generated_at.empty());
        const std::string report = read_text(args.report_path);
        CHECK(report.find("CSUV-m") != std::string::npos);
        CHECK(report.find("CSUV-s") != std::string::npos);
        CHECK(report.find("runtime") != std::string::npos);
        CHECK(out.str().find("bundle written") != std::string::npos);
    }

    TEST_CASE("malformed input exits with code 2") {
        TempDir dir;
        std::ostringstream out, err;
        write_text(dir.file("bad.csv"), "y,x1\n1,2\n3,oops\n");
        CHECK(cmd_fit(small_fit(dir.file("bad.csv"), dir.file("b.json")), out, err) == kExitBadInput);
        CHECK(err.str().find("line 3, column 2") != std::string::npos);

        write_text(dir.file("short.csv"), "y,x1\n1,2\n3,4\n5,7\n");
        err.str("");
        CHECK(cmd_fit(small_fit(dir.file("short.csv"), dir.file("b.json")), out, err) == kExitBadInput);
        CHECK(err.str().find("at least 4") != std::string::npos);

        FitArgs args = small_fit(model2_csv(dir), dir.file("b.json"));
        args.response = "missing";
        CHECK(cmd_fit(args, out, err) == kExitBadInput);
        args = small_fit(dir.file("nonexistent.csv"), dir.file("b.json"));
        CHECK(cmd_fit(args, out, err) == kExitBadInput);
        args = small_fit(model2_csv(dir), dir.file("b.json"));
        args.config.threshold = 1.5;
        CHECK(cmd_fit(args, out, err) == kExitBadInput);
    }

    TEST_CASE("bundles are identical across runs and worker counts") {
        TempDir dir;
        const std::string csv = model2_csv(dir);
        std::ostringstream out, err;
        REQUIRE(cmd_fit(small_fit(csv, dir.file("a.json"), 1), out, err) == kExitOk);
        REQUIRE(cmd_fit(small_fit(csv, dir.file("b.json"), 1), out, err) == kExitOk);
        REQUIRE(cmd_fit(small_fit(csv, dir.file("c.json"), 4), out, err) == kExitOk);
        CHECK(read_text(dir.file("a.json")) == read_text(dir.file("b.json")));
        CHECK(read_text(dir.file("a.json")) == read_text(dir.file("c.json")));

        FitArgs stamped = small_fit(csv, dir.file("d.json"));
        stamped.timestamp = true;
        REQUIRE(cmd_fit(stamped, out, err) == kExitOk);
        UncertaintyBundle d = bundle_from_json(nlohmann::json::parse(read_text(dir.file("d.json"))));
        CHECK(!d.generated_at.empty());
        CHECK(d.dataset_digest == bundle_from_json(nlohmann::json::parse(read_text(dir.file("a.json")))).dataset_digest);
        d.generated_at.clear();
        CHECK(serialize_bundle(d) == read_text(dir.file("a.json")));
    }

    TEST_CASE("t = 1 keeps only sign-unanimous covariates") {
        const GeneratedDataset g = generate(ModelSpec::model2(15, 3, 0.5, 3), 0);
        RegressionData data{g.design.X, g.design.y, g.design.names};
        FitArgs args;
        args.config.repetitions = 12;
        args.config.threshold = 1.0;
        args.config.jobs = 1;
        args.timestamp = false;
        const FitOutcome o = fit_dataset(data, args);
        const auto& models = o.run.collection.models;
        for (Index j = 0; j < 15; ++j) {
            int pos = 0, neg = 0;
            for (const auto& m : models) {
                pos += m.coefficient(static_cast<int>(j)) > 0.0;
                neg += m.coefficient(static_cast<int>(j)) < 0.0;
            }
            const bool unanimous = pos == static_cast<int>(models.size()) || neg == static_cast<int>(models.size());
            CHECK(std::binary_search(o.bundle.selected_m.begin(), o.bundle.selected_m.end(), static_cast<int>(j) + 1) == unanimous);
        }
    }

    TEST_CASE("comparison overlays") {
        TempDir dir;
        const std::string csv = model2_csv(dir);
        write_text(dir.file("cmp.csv"), "label,X2,X1\nmine,0.5,0\nother,0,-1\n");
        FitArgs args = small_fit(csv, dir.file("b.json"));
        args.compare_path = dir.file("cmp.csv");
        std::ostringstream out, err;
        REQUIRE(cmd_fit(args, out, err) == kExitOk);
        const UncertaintyBundle b = bundle_from_json(nlohmann::json::parse(read_text(args.out_path)));
        REQUIRE(b.comparisons.size() == 2);
        CHECK(b.comparisons[0].label == "mine");
        CHECK(b.comparisons[0].coefficients == std::vector<SparseEntry>{{2, 0.5}});
        CHECK(b.comparisons[1].coefficients == std::vector<SparseEntry>{{1, -1.0}});

        write_text(dir.file("cmp_bad.csv"), "label,Z9\nmine,1\n");
        args.compare_path = dir.file("cmp_bad.csv");
        CHECK(cmd_fit(args, out, err) == kExitBadInput);

        args.compare_path.clear();
        args.compare_constituents = true;
        REQUIRE(cmd_fit(args, out, err) == kExitOk);
        const UncertaintyBundle c = bundle_from_json(nlohmann::json::parse(read_text(args.out_path)));
        REQUIRE(c.comparisons.size() == 3);
        CHECK(c.comparisons[0].label == "lasso");
    }

    TEST_CASE("option parsing") {
        const auto methods = parse_methods("lasso, scad");
        REQUIRE(methods.size() == 2);
        CHECK(methods[1].name() == "scad");
        CHECK_THROWS_AS(parse_methods("lasso,ridge"), InvalidInput);
        CHECK_THROWS_AS(parse_methods(""), InvalidInput);
        CHECK(parse_whiskers("10,90") == std::array<double, 2>{10.0, 90.0});
        CHECK_THROWS_AS(parse_whiskers("10"), InvalidInput);
        CHECK_THROWS_AS(parse_whiskers("a,90"), InvalidInput);
    }

    TEST_CASE("generated CSV reads back") {
        const GeneratedDataset g = generate(ModelSpec::model1(), 1);
        std::istringstream in(dataset_csv(g.design, "resp"));
        const RegressionData d = split_response(read_csv(in), "resp");
        CHECK(d.X == g.design.X);
        CHECK(d.y == g.design.y);
        CHECK(d.names.front() == "X1");
    }
}

TEST_SUITE("simulate command") {
    TEST_CASE("experiment configs are validated") {
        using nlohmann::json;
        const ExperimentConfig c = parse_experiment(json::parse(R"({"source":{"model":"m1"},"realizations":2})"));
        CHECK(c.source.model.model == SimModel::m1);
        CHECK(c.source.model.p == 8);
        CHECK(c.realizations == 2);
        CHECK(c.csuv.repetitions == 100);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"model":"m1"},"extra":1})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"model":"m1","rho":1}})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"model":"m1"},"csuv":{"B":"many"}})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"model":"m1"},"realizations":0})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"csuv":{}})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"kind":"csv"}})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"model":"m2","p":5,"s":6}})")), InvalidInput);
        CHECK_THROWS_AS(parse_experiment(json::parse(R"({"source":{"model":"m1"},"methods":["lasso","foo"]})")), InvalidInput);
    }

    TEST_CASE("one realization of Model 1 scores every method") {
        using nlohmann::json;
        TempDir dir;
        write_text(dir.file("exp.json"), R"({"source":{"model":"m1","sigma":1},"csuv":{"B":10},
            "baselines":{"delete_half_B":5},"realizations":1,"seed":3})");
        std::ostringstream out, err;
        REQUIRE(cmd_simulate(dir.file("exp.json"), dir.file("r1"), 1, out, err) == kExitOk);
        REQUIRE(cmd_simulate(dir.file("exp.json"), dir.file("r2"), 4, out, err) == kExitOk);
        const std::string per = read_text(dir.file("r1/per_realization.csv"));
        std::istringstream lines(per);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "realization,method,tp,fp,fn,fp_fn,f_measure,test_mse,l1,l2,size,status");
        std::vector<std::string> methods;
        while (std::getline(lines, line)) methods.push_back(line.substr(2, line.find(',', 2) - 2));
        CHECK(methods == std::vector<std::string>{"csuv-m", "csuv-s", "lasso", "mcp", "scad", "bic", "ebic", "delete-n/2"});
        for (const char* f : {"per_realization.csv", "summary.csv", "disagreement.csv"})
            CHECK(read_text(dir.file(std::string("r1/") + f)) == read_text(dir.file(std::string("r2/") + f)));
        CHECK(read_text(dir.file("r1/summary.csv")).rfind("method,realizations,fp_mean,fp_sd", 0) == 0);
    }

    TEST_CASE("CSV sources without truth report NA selection scores") {
        TempDir dir;
        write_text(dir.file("data.csv"), dataset_csv(generate(ModelSpec::model2(10, 2, 0.3, 4), 0).design, "y"));
        nlohmann::json doc = {{"source", {{"kind", "csv"}, {"path", dir.file("data.csv")}}},
                              {"csuv", {{"B", 5}}},
                              {"baselines", {{"bic", false}, {"ebic", false}, {"delete_half", false}}},
                              {"realizations", 2}};
        const SimulationOutput out = run_simulation(parse_experiment(doc), 1);
        CHECK(out.failures == 0);
        CHECK(out.methods.size() == 5);
        CHECK(out.summary_csv.find("csuv-m,2,NA,NA") != std::string::npos);
        CHECK(out.per_realization_csv.find(",NA,NA,NA,NA,NA,") != std::string::npos);
    }

    TEST_CASE("failed realizations are recorded") {
        TempDir dir;
        write_text(dir.file("exp.json"), R"({"source":{"kind":"csv","path":"/nonexistent.csv"},"realizations":1})");
        std::ostringstream out, err;
        CHECK(cmd_simulate(dir.file("exp.json"), dir.file("r"), 1, out, err) == kExitBadInput);
        write_text(dir.file("bad.json"), "{not json");
        CHECK(cmd_simulate(dir.file("bad.json"), dir.file("r"), 1, out, err) == kExitBadInput);
    }
}

TEST_SUITE("serve command") {
    TEST_CASE("endpoints") {
        const GeneratedDataset g = generate(ModelSpec::model2(10, 2, 0.3, 4), 0);
        FitArgs args;
        args.config.repetitions = 5;
        args.config.jobs = 1;
        args.timestamp = false;
        const std::string text = serialize_bundle(fit_dataset({g.design.X, g.design.y, g.design.names}, args).bundle);

        BundleServer server(text);
        const int port = server.bind_any("127.0.0.1");
        REQUIRE(port > 0);
        std::thread worker([&] { server.listen(); });
        server.wait_until_ready();

        httplib::Client client("127.0.0.1", port);
        auto bundle = client.Get("/api/bundle");
        REQUIRE(bundle);
        CHECK(bundle->status == 200);
        CHECK(bundle->body == text);
        CHECK(bundle->get_header_value("Content-Type") == "application/json");
        auto health = client.Get("/api/health");
        REQUIRE(health);
        CHECK(nlohmann::json::parse(health->body) == nlohmann::json::parse(R"({"status":"ok","bundle_version":"csuv-bundle/1"})"));
        auto missing = client.Get("/api/nonexistent");
        REQUIRE(missing);
        CHECK(missing->status == 404);
        auto root = client.Get("/");
        REQUIRE(root);
        CHECK(root->status == 200);
        CHECK(root->body.find("/api/bundle") != std::string::npos);

        BundleServer second(text);
        CHECK(!second.bind("127.0.0.1", port));
        std::ostringstream out, err;
        TempDir dir;
        write_text(dir.file("b.json"), text);
        CHECK(cmd_serve(dir.file("b.json"), "127.0.0.1", port, "", out, err) == kExitBadInput);
        CHECK(err.str().find("port") != std::string::npos);

        server.stop();
        worker.join();
    }

    TEST_CASE("static assets are served at the root") {
        TempDir dir;
        write_text(dir.file("index.html"), "<html>plot</html>");
        const GeneratedDataset g = generate(ModelSpec::model2(10, 2, 0.3, 4), 0);
        FitArgs args;
        args.config.repetitions = 5;
        args.config.jobs = 1;
        const std::string text = serialize_bundle(fit_dataset({g.design.X, g.design.y, g.design.names}, args).bundle);
        BundleServer server(text, dir.path.string());
        const int port = server.bind_any("127.0.0.1");
        REQUIRE(port > 0);
        std::thread worker([&] { server.listen(); });
        server.wait_until_ready();
        httplib::Client client("127.0.0.1", port);
        auto page = client.Get("/");
        REQUIRE(page);
        CHECK(page->body == "<html>plot</html>");
        CHECK(client.Get("/missing.js")->status == 404);
        server.stop();
        worker.join();
    }

    TEST_CASE("invalid bundles are refused") {
        CHECK_THROWS_AS(BundleServer("{}"), InvalidInput);
        CHECK_THROWS_AS(BundleServer("not json"), InvalidInput);
        std::ostringstream out, err;
        CHECK(cmd_serve("/nonexistent/bundle.json", "127.0.0.1", 0, "", out, err) == kExitBadInput);
    }
}
