#include <fstream>
#include <iostream>
#include <sstream>

#include "csuv/error.hpp"
#include "csuv_cli/commands.hpp"

#include <httplib.h>

namespace csuv::cli {

namespace {

constexpr const char* kPlaceholderPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>CSUV</title></head>\n"
    "<body><p>No UI assets were given. The bundle is available at <a href=\"/api/bundle\">/api/bundle</a>.</p></body>"
    "</html>\n";

}  // namespace

struct BundleServer::Impl {
    httplib::Server server;
    std::string bundle;
};

std::string health_json() {
    return nlohmann::json{{"status", "ok"}, {"bundle_version", std::string(kBundleVersion)}}.dump();
}

BundleServer::BundleServer(std::string bundle_text, std::string ui_dir) : impl_(std::make_unique<Impl>()) {
    try {
        bundle_from_json(nlohmann::json::parse(bundle_text));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bundle is not valid JSON: ") + e.what());
    }
    impl_->bundle = std::move(bundle_text);

    auto& srv = impl_->server;
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    const std::string* bundle = &impl_->bundle;
    srv.Get("/api/bundle", [bundle](const httplib::Request&, httplib::Response& res) {
        res.set_content(*bundle, "application/json");
    });
    srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(health_json(), "application/json");
    });
    if (!ui_dir.empty()) {
        if (!srv.set_mount_point("/", ui_dir)) throw InvalidInput("UI directory '" + ui_dir + "' does not exist");
    } else {
        srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kPlaceholderPage, "text/html"); });
    }
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.status == 404) res.set_content("{\"error\":\"not found\"}", "application/json");
    });
}

BundleServer::~BundleServer() { stop(); }

bool BundleServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

int BundleServer::bind_any(const std::string& host) { return impl_->server.bind_to_any_port(host); }

void BundleServer::listen() { impl_->server.listen_after_bind(); }

void BundleServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void BundleServer::stop() {
    if (impl_) impl_->server.stop();
}

int cmd_serve(const std::string& bundle_path, const std::string& host, int port, const std::string& ui_dir,
              std::ostream& out, std::ostream& err) {
    std::unique_ptr<BundleServer> server;
    try {
        std::ifstream in(bundle_path, std::ios::binary);
        if (!in) throw InvalidInput("cannot open '" + bundle_path + "'");
        std::ostringstream text;
        text << in.rdbuf();
        server = std::make_unique<BundleServer>(text.str(), ui_dir);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    if (!server->bind(host, port)) {
        err << "error: cannot listen on " << host << ':' << port << " (port in use?)\n";
        return kExitBadInput;
    }
    out << "serving " << bundle_path << " at http://" << host << ':' << port << "/\n" << std::flush;
    server->listen();
    return kExitOk;
}

}  // namespace csuv::cli
