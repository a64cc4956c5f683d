#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "speye/error.hpp"
#include "speye/http.hpp"
#include "speye/registry.hpp"
#include "speye/service.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int)
{
    g_stop = true;
}

}  // namespace

int main(int argc, char** argv)
{
    std::string listen = "127.0.0.1:7465";
    std::string registry_path;
    std::string static_dir;
    bool cors = false;
    bool deterministic = false;

    CLI::App app{"Local HTTP API for the speye dashboard", "speye-service"};
    app.add_option("--listen", listen, "ADDR:PORT");
    app.add_option("--registry", registry_path, "Registry file (default: built-in, or $SPEYE_REGISTRY)");
    app.add_option("--static", static_dir, "Dashboard bundle to serve at /")->check(CLI::ExistingDirectory);
    app.add_flag("--allow-any-origin", cors, "Send permissive CORS headers (dashboard development)");
    app.add_flag("--deterministic", deterministic, "Omit scan timestamps");
    CLI11_PARSE(app, argc, argv);

    try {
        auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw speye::Error("--listen expects ADDR:PORT");
        speye::service::ServiceOptions options;
        options.host = listen.substr(0, colon);
        options.port = std::stoi(listen.substr(colon + 1));
        options.allow_any_origin = cors;
        if (!static_dir.empty()) options.static_dir = static_dir;

        if (registry_path.empty()) {
            if (const char* env = std::getenv("SPEYE_REGISTRY"); env && *env) registry_path = env;
        }
        const speye::Registry registry =
            registry_path.empty() ? speye::Registry::builtin() : speye::Registry::load_file(registry_path);
        auto transport = speye::net::make_http_transport();
        speye::ScanConfig config;
        config.deterministic_mode = deterministic;
        speye::service::Api api(registry, *transport, config);
        speye::service::Server server(api, options);
        std::cerr << "speye-service listening on " << server.origin() << std::endl;

        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
        server.stop();
    } catch (const std::exception& e) {
        std::cerr << "speye-service: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
