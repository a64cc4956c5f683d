#include "speye/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "speye/error.hpp"
#include "speye/fixtures.hpp"
#include "speye/registry.hpp"
#include "speye/report.hpp"
#include "speye/request_driver.hpp"

namespace speye::cli {
namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int)
{
    g_interrupted = true;
}

struct Options {
    std::string format = "text";
    int max_redirects = 5;
    int timeout_ms = 8000;
    int parallel = 3;
    std::string registry;
    bool deterministic = false;
    std::string output;
    std::string url;
    std::string corpus;
    std::string listen = "127.0.0.1:0";
    std::string emit_registry;
};

Registry load_selected_registry(const Options& o)
{
    std::string path = o.registry;
    if (path.empty()) {
        if (const char* env = std::getenv("SPEYE_REGISTRY"); env && *env) path = env;
    }
    return path.empty() ? Registry::builtin() : Registry::load_file(path);
}

void write_output(const Options& o, const std::string& text, std::ostream& out)
{
    if (o.output.empty()) {
        out << text;
        return;
    }
    std::ofstream file(o.output, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + o.output);
    file << text;
}

std::string registry_summary(const Registry& r)
{
    std::ostringstream s;
    for (const auto& idp : r.display_order()) {
        std::size_t endpoints = 0;
        std::size_t scopes = 0;
        for (const auto& e : r.endpoint_patterns()) endpoints += e.idp == idp;
        for (const auto& p : r.permissions()) scopes += p.idp == idp;
        s << idp.display_name() << ": " << endpoints << " endpoint patterns, " << scopes << " scopes\n";
        for (const auto& e : r.endpoint_patterns()) {
            if (e.idp == idp) s << "  " << e.pattern << "\n";
        }
    }
    return s.str();
}

std::pair<std::string, int> split_listen(const std::string& listen)
{
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected ADDR:PORT");
    try {
        return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--listen", "bad port in " + listen);
    }
}

int serve(const Options& o, std::ostream& out)
{
    auto [host, port] = split_listen(o.listen);
    auto server = fixtures::serve_fixtures(fixtures::load_corpus(o.corpus), host, port);
    if (!o.emit_registry.empty()) {
        std::ofstream file(o.emit_registry, std::ios::trunc);
        file << canonical_dump(fixtures::loopback_overlay(Registry::builtin()).to_json());
        if (!file) throw Error("cannot write " + o.emit_registry);
    }
    out << "serving fixtures at " << server->origin() << std::endl;
    g_interrupted = false;
    auto previous_int = std::signal(SIGINT, on_signal);
    auto previous_term = std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::signal(SIGINT, previous_int);
    std::signal(SIGTERM, previous_term);
    server->stop();
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Inspect the permissions requested by single sign-on login options", "speye"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    };
    auto add_registry = [&](CLI::App* cmd) {
        cmd->add_option("--registry", o.registry, "Registry file (default: built-in, or $SPEYE_REGISTRY)");
    };

    auto* scan = app.add_subcommand("scan", "Comparative scan of a relying-party login page");
    scan->add_option("url", o.url, "Relying-party page URL")->required();
    add_format(scan);
    scan->add_option("--max-redirects", o.max_redirects, "Redirects followed per login option")
        ->check(CLI::PositiveNumber);
    scan->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout in milliseconds")->check(CLI::PositiveNumber);
    scan->add_option("--parallel", o.parallel, "Login options resolved concurrently")->check(CLI::PositiveNumber);
    add_registry(scan);
    scan->add_flag("--deterministic", o.deterministic, "Omit the scan timestamp");
    scan->add_option("--output", o.output, "Write the report to a file");

    auto* focused = app.add_subcommand("focused", "Parse an identity-provider authorization URL offline");
    focused->add_option("url", o.url, "Authorization URL")->required();
    add_format(focused);
    add_registry(focused);
    focused->add_option("--output", o.output, "Write the report to a file");

    auto* registry = app.add_subcommand("registry", "Show the endpoint patterns and scope catalog");
    add_format(registry);
    add_registry(registry);
    registry->add_option("--output", o.output, "Write to a file");

    auto* fixtures_cmd = app.add_subcommand("fixtures", "Serve the offline fixture corpus");
    fixtures_cmd->add_option("--corpus", o.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    fixtures_cmd->add_option("--listen", o.listen, "ADDR:PORT (port 0 picks a free one)");
    fixtures_cmd->add_option("--emit-registry", o.emit_registry, "Write a registry that recognizes the mock IdPs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (scan->parsed()) {
            ScanConfig config;
            config.max_redirects = o.max_redirects;
            config.timeout = std::chrono::milliseconds(o.timeout_ms);
            config.parallelism = o.parallel;
            config.deterministic_mode = o.deterministic;
            const Registry reg = load_selected_registry(o);
            auto transport = net::make_http_transport();
            ScanReport report = scan_rp(o.url, config, reg, *transport);
            write_output(o, o.format == "json" ? render_json(report) : render_text(report), out);
            return report.idp_results.empty() && !report.misses.empty() ? kExitOnlyMisses : kExitOk;
        }
        if (focused->parsed()) {
            const Registry reg = load_selected_registry(o);
            FocusedReport report = focused_scan(o.url, reg);
            write_output(o, o.format == "json" ? render_json(report) : render_text(report), out);
            return kExitOk;
        }
        if (registry->parsed()) {
            const Registry reg = load_selected_registry(o);
            write_output(o, o.format == "json" ? canonical_dump(reg.to_json()) : registry_summary(reg), out);
            return kExitOk;
        }
        return serve(o, out);
    } catch (const PageFetchError& e) {
        err << "speye: " << e.what() << "\n";
        return kExitFetchFailed;
    } catch (const CLI::Error& e) {
        err << "speye: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "speye: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace speye::cli
