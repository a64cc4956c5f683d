#include "speye/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "speye/error.hpp"
#include "speye/text.hpp"
#include "speye/url.hpp"

namespace speye::fixtures {
namespace {

using nlohmann::json;

constexpr std::string_view kMockIdpPrefix = "/mock-idp/";

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read fixture file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void replace_all(std::string& s, std::string_view from, std::string_view to)
{
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

std::string expand(std::string s, const std::string& origin, const std::string& site)
{
    replace_all(s, "{origin}", origin);
    replace_all(s, "{site}", origin + "/" + site);
    replace_all(s, "{idp}", origin + std::string(kMockIdpPrefix));
    return s;
}

ResponseRule parse_rule(const json& j)
{
    ResponseRule r;
    r.path = j.at("path").get<std::string>();
    if (auto m = j.find("method"); m != j.end()) {
        r.method = text::iequals(m->get<std::string>(), "GET") ? HttpMethod::Get : HttpMethod::Post;
    }
    if (auto w = j.find("when"); w != j.end()) {
        for (const auto& [name, value] : w->items()) r.when.push_back({name, value.get<std::string>()});
    }
    if (auto h = j.find("require_headers"); h != j.end()) r.require_headers = h->get<std::vector<std::string>>();
    r.status = j.value("status", 302);
    if (auto l = j.find("location"); l != j.end()) r.location = l->get<std::string>();
    r.body = j.value("body", std::string{});
    r.content_type = j.value("content_type", r.content_type);
    if (auto h = j.find("headers"); h != j.end()) {
        for (const auto& [name, value] : h->items()) r.headers.emplace_back(name, value.get<std::string>());
    }
    return r;
}

ExpectedOutcome parse_expected(const json& j)
{
    ExpectedOutcome e;
    if (auto p = j.find("site_pattern"); p != j.end() && !p->is_null()) {
        e.site_pattern = pattern_class_from_string(p->get<std::string>());
        if (!e.site_pattern) throw Error("unknown pattern class " + p->get<std::string>());
    }
    for (const auto& idp : j.value("idps", json::array())) {
        ExpectedIdp x;
        x.idp = *IdpId::from_name(idp.at("idp").get<std::string>());
        std::string source = idp.value("source", "DrivenRedirect");
        x.source = source == "StaticSdkLiteral" ? ResultSource::StaticSdkLiteral
                   : source == "FocusedUrl"     ? ResultSource::FocusedUrl
                                                : ResultSource::DrivenRedirect;
        x.scopes = idp.at("scopes").get<std::vector<std::string>>();
        e.idps.push_back(std::move(x));
    }
    for (const auto& m : j.value("misses", json::array())) {
        auto reason = miss_reason_from_string(m.get<std::string>());
        if (!reason) throw Error("unknown miss reason " + m.get<std::string>());
        e.misses.push_back(*reason);
    }
    if (auto m = j.find("matches"); m != j.end()) {
        std::vector<std::pair<std::string, std::string>> matches;
        for (const auto& pair : *m) matches.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
        e.matches = std::move(matches);
    }
    return e;
}

std::string mock_consent_page(const std::string& path)
{
    return "<!DOCTYPE html><html><head><title>Mock identity provider</title></head><body>"
           "<h1>Mock consent screen</h1><p>" + path + "</p></body></html>";
}

}  // namespace

FixtureSite load_site(const std::filesystem::path& directory)
{
    json meta;
    try {
        meta = json::parse(read_file(directory / "site.json"));
    } catch (const json::exception& e) {
        throw Error("bad fixture " + (directory / "site.json").string() + ": " + e.what());
    }
    FixtureSite site;
    site.name = meta.value("name", directory.filename().string());
    if (auto p = meta.find("pattern"); p != meta.end() && !p->is_null()) {
        site.pattern = pattern_class_from_string(p->get<std::string>());
    }
    site.description = meta.value("description", std::string{});
    const json pages = meta.value("pages", json::object());
    for (const auto& [path, file] : pages.items()) {
        site.pages[path] = read_file(directory / file.get<std::string>());
    }
    for (const auto& rule : meta.value("rules", json::array())) site.redirect_rules.push_back(parse_rule(rule));
    if (auto e = meta.find("expected"); e != meta.end()) site.expected = parse_expected(*e);
    return site;
}

std::vector<FixtureSite> load_corpus(const std::filesystem::path& root)
{
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "site.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<FixtureSite> corpus;
    for (const auto& d : dirs) corpus.push_back(load_site(d));
    return corpus;
}

struct FixtureServer::Impl {
    httplib::Server server;
    std::vector<FixtureSite> corpus;
    mutable std::mutex mutex;
    std::vector<RecordedRequest> requests;
    std::once_flag stopped;

    const FixtureSite* find_site(const std::string& name) const
    {
        for (const auto& s : corpus) {
            if (s.name == name) return &s;
        }
        return nullptr;
    }

    void handle(const httplib::Request& req, httplib::Response& res)
    {
        RecordedRequest record{req.method, req.path, {}, req.body};
        for (const auto& [name, value] : req.headers) record.headers.emplace_back(name, value);
        {
            std::lock_guard lock(mutex);
            requests.push_back(std::move(record));
        }

        if (req.path == "/health") {
            res.set_content("ok\n", "text/plain");
            return;
        }
        if (req.path.starts_with(kMockIdpPrefix)) {
            res.set_content(mock_consent_page(req.path), "text/html; charset=utf-8");
            return;
        }

        std::string_view rest = std::string_view(req.path).substr(1);
        auto slash = rest.find('/');
        std::string name(rest.substr(0, slash));
        std::string local = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
        const FixtureSite* site = find_site(name);
        if (site == nullptr) {
            res.status = 404;
            res.set_content("not found\n", "text/plain");
            return;
        }

        std::vector<QueryParam> fields;
        for (const auto& [k, v] : req.params) fields.push_back({k, v});
        auto content_type = req.get_header_value("Content-Type");
        if (req.method == "POST" && content_type.starts_with("application/x-www-form-urlencoded")) {
            for (const auto& p : split_query(req.body)) {
                fields.push_back({percent_decode(p.name, true), percent_decode(p.value, true)});
            }
        }
        HttpMethod method = req.method == "POST" ? HttpMethod::Post : HttpMethod::Get;

        for (const auto& rule : site->redirect_rules) {
            if (rule.path != local) continue;
            if (rule.method && *rule.method != method) continue;
            bool fields_ok = std::all_of(rule.when.begin(), rule.when.end(), [&](const QueryParam& w) {
                return std::find(fields.begin(), fields.end(), w) != fields.end();
            });
            bool headers_ok = std::all_of(rule.require_headers.begin(), rule.require_headers.end(),
                                          [&](const std::string& h) { return req.has_header(h); });
            if (!fields_ok || !headers_ok) continue;
            res.status = rule.status;
            for (const auto& [k, v] : rule.headers) res.set_header(k, v);
            if (rule.location) res.set_header("Location", *rule.location);
            res.set_content(rule.body, rule.content_type);
            return;
        }
        if (auto page = site->pages.find(local); page != site->pages.end()) {
            res.set_header("Set-Cookie", "fixture_session=" + site->name + "; Path=/; HttpOnly");
            res.set_content(page->second, "text/html; charset=utf-8");
            return;
        }
        res.status = 404;
        res.set_content("not found\n", "text/plain");
    }
};

FixtureServer::FixtureServer(std::vector<FixtureSite> corpus, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()), host_(host)
{
    // httplib's default also sets SO_REUSEPORT, which lets a second server share a busy port.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    port_ = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (port_ <= 0) throw BindError("cannot bind fixture server to " + host + ":" + std::to_string(port));

    const std::string base = origin();
    for (auto& site : corpus) {
        for (auto& [path, body] : site.pages) body = expand(body, base, site.name);
        for (auto& rule : site.redirect_rules) {
            if (rule.location) rule.location = expand(*rule.location, base, site.name);
            rule.body = expand(rule.body, base, site.name);
        }
    }
    impl_->corpus = std::move(corpus);
    auto handler = [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) { impl->handle(req, res); };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    thread_ = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

FixtureServer::~FixtureServer()
{
    stop();
}

std::string FixtureServer::origin() const
{
    return "http://" + host_ + ":" + std::to_string(port_);
}

std::string FixtureServer::site_url(const std::string& name) const
{
    return origin() + "/" + name;
}

void FixtureServer::stop()
{
    std::call_once(impl_->stopped, [this] {
        impl_->server.stop();
        if (thread_.joinable()) thread_.join();
    });
}

std::vector<RecordedRequest> FixtureServer::requests() const
{
    std::lock_guard lock(impl_->mutex);
    return impl_->requests;
}

void FixtureServer::clear_requests()
{
    std::lock_guard lock(impl_->mutex);
    impl_->requests.clear();
}

std::unique_ptr<FixtureServer> serve_fixtures(std::vector<FixtureSite> corpus, const std::string& host, int port)
{
    return std::make_unique<FixtureServer>(std::move(corpus), host, port);
}

Registry loopback_overlay(const Registry& base)
{
    std::vector<EndpointPattern> extra;
    for (const auto& ep : base.endpoint_patterns()) {
        if (!ep.pattern.starts_with("https://")) continue;
        EndpointPattern mirrored;
        mirrored.idp = ep.idp;
        mirrored.pattern = R"(http://127\.0\.0\.1:[0-9]+/mock-idp/)" + ep.pattern.substr(8);
        if (ep.example && ep.example->starts_with("https://")) {
            mirrored.example = "http://127.0.0.1:7000/mock-idp/" + ep.example->substr(8);
        }
        extra.push_back(std::move(mirrored));
    }
    return base.with_extra_endpoints(extra);
}

}  // namespace speye::fixtures
