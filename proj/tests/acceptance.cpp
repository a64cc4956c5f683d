#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "speye/fixtures.hpp"
#include "speye/page_scanner.hpp"
#include "speye/report.hpp"
#include "speye/request_driver.hpp"

#include "pattern_snippets.hpp"
#include "endpoint_vector.hpp"
#include "request_generator.hpp"
#include "test_support.hpp"

using namespace speye;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    /// Wall-clock bound in seconds; 0 when the criterion has none.
    double limit_s;
    std::function<Outcome()> check;
};

std::string ratio(int ok, int total)
{
    return std::to_string(ok) + "/" + std::to_string(total);
}

Outcome endpoint_pattern_fidelity()
{
    int ok = 0;
    int total = 0;
    const auto& reg = Registry::builtin();
    for (const auto& entry : test::endpoint_vector()) {
        ++total;
        auto oracle = test::published_match(entry.url);
        auto got = match_idp_endpoint(reg, entry.url);
        std::optional<std::string> want;
        if (oracle) want = test::published_expressions()[*oracle].idp;
        bool agree = (got ? std::optional<std::string>(got->name()) : std::nullopt) == want && oracle == entry.expression;
        ok += agree;
    }
    std::vector<std::string> patterns;
    for (const auto& ep : reg.endpoint_patterns()) patterns.push_back(ep.pattern);
    bool same_expressions = patterns.size() == test::published_expressions().size();
    for (std::size_t i = 0; same_expressions && i < patterns.size(); ++i) {
        same_expressions = patterns[i] == test::published_expressions()[i].expression;
    }
    return {ok == 14 && total == 14 && same_expressions,
            ratio(ok, total) + " agree" + (same_expressions ? "" : ", registry expressions differ")};
}

Outcome trigger_gallery_coverage(fixtures::FixtureServer& server, net::HttpTransport& transport)
{
    auto corpus = fixtures::load_corpus(test::corpus_dir());
    auto it = std::find_if(corpus.begin(), corpus.end(), [](const auto& s) { return s.name == "site12"; });
    if (it == corpus.end() || !it->expected.matches) return {false, "gallery fixture missing"};
    const std::string url = server.site_url("site12") + "/";
    auto result = transport.send({HttpMethod::Get, url, {}, {}, {}}, std::chrono::seconds(5));
    const auto* page = std::get_if<net::HttpResponse>(&result);
    if (page == nullptr || page->status != 200) return {false, "gallery page not served"};
    auto doc = parse_page(page->body, page->header("Content-Type").value_or(""));
    auto matches = detect_sso_matches(doc, Url::parse(url), test::overlay_registry());
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& m : matches) pairs.emplace_back(m.matched_string, m.element_kind);
    const auto& authored = *it->expected.matches;
    int ok = 0;
    for (std::size_t i = 0; i < std::min(pairs.size(), authored.size()); ++i) ok += pairs[i] == authored[i];
    bool pass = pairs.size() == 19 && authored.size() == 19 && ok == 19;
    return {pass, std::to_string(pairs.size()) + " candidates, " + ratio(ok, 19) + " authored pairs"};
}

Outcome code_pattern_classification()
{
    const auto& reg = Registry::builtin();
    const Url base = Url::parse("https://rp.example/login");
    const char* snippets[] = {test::kHtmlPatternSnippet, test::kJsPatternSnippet, test::kSdkPatternSnippet};
    const PatternClass want[] = {PatternClass::HtmlEmbedded, PatternClass::ScriptDriven, PatternClass::SdkBased};
    std::string detail;
    bool pass = true;
    for (int i = 0; i < 3; ++i) {
        auto doc = html::Document::parse(snippets[i]);
        auto site = classify_pattern(doc, find_sso_candidates(doc, base, reg), reg).site;
        pass = pass && site == want[i];
        detail += (i ? " / " : "") + (site ? std::string(to_string(*site)) : std::string("none"));
    }
    auto findings = extract_sdk_scopes(html::Document::parse(test::kSdkPatternSnippet));
    bool scopes_ok = findings.size() == 1 && findings[0].idp == IdpId::facebook() &&
                     findings[0].scopes == std::vector<std::string>{"user_friends", "user_likes"};
    detail += scopes_ok ? ", SDK scopes [user_friends, user_likes]" : ", SDK scopes wrong";
    return {pass && scopes_ok, detail};
}

Outcome end_to_end(fixtures::FixtureServer& server, net::HttpTransport& transport)
{
    auto corpus = fixtures::load_corpus(test::corpus_dir());
    auto scan = [&](const std::string& name, int parallelism) {
        ScanConfig config;
        config.deterministic_mode = true;
        config.parallelism = parallelism;
        return scan_rp(server.site_url(name) + "/", config, test::overlay_registry(), transport);
    };
    int truth = 0;
    int stable = 0;
    std::string first_failure;
    for (const auto& site : corpus) {
        auto report = scan(site.name, 3);
        auto diff = test::ground_truth_diff(report, site.expected);
        if (diff.empty()) {
            ++truth;
        } else if (first_failure.empty()) {
            first_failure = site.name + ": " + diff;
        }
        auto json = render_json(report);
        if (render_json(scan(site.name, 3)) == json && render_json(scan(site.name, 1)) == json) {
            ++stable;
        } else if (first_failure.empty()) {
            first_failure = site.name + ": JSON differs between runs";
        }
    }
    const int n = static_cast<int>(corpus.size());
    std::string detail = ratio(truth, n) + " ground truth, " + ratio(stable, n) + " byte-identical";
    if (!first_failure.empty()) detail += " (" + first_failure + ")";
    return {n >= 12 && truth == n && stable == n, detail};
}

Outcome focused_zero_traffic()
{
    struct Case {
        std::string url;
        IdpId idp;
        std::vector<std::string> scopes;
        std::string client_id;
    };
    const std::vector<Case> cases = {
        {"https://www.facebook.com/v9.0/dialog/oauth?client_id=1001&redirect_uri=https%3A%2F%2Frp.example%2Fcb"
         "&response_type=code&scope=email,public_profile,user_photos",
         IdpId::facebook(), {"email", "public_profile", "user_photos"}, "1001"},
        {"https://accounts.google.com/o/oauth2/v2/auth?client_id=2002.apps.googleusercontent.com&response_type=code"
         "&scope=openid%20email%20https%3A%2F%2Fwww.googleapis.com%2Fauth%2Fcalendar.readonly",
         IdpId::google(), {"openid", "email", "https://www.googleapis.com/auth/calendar.readonly"},
         "2002.apps.googleusercontent.com"},
        {"https://appleid.apple.com/auth/authorize?client_id=com.rp.web&response_type=code%20id_token"
         "&scope=name%20email&response_mode=form_post",
         IdpId::apple(), {"name", "email"}, "com.rp.web"},
    };
    net::TrafficRecorder recorder;
    int ok = 0;
    for (const auto& c : cases) {
        auto report = focused_scan(c.url, Registry::builtin());
        const auto& req = report.result.request;
        ok += report.idp == c.idp && req && req->scopes == c.scopes && req->client_id == c.client_id &&
              report.result.permissions.size() == c.scopes.size();
    }
    const auto traffic = recorder.count();
    return {traffic == 0 && ok == 3, std::to_string(traffic) + " outbound requests, " + ratio(ok, 3) + " parsed"};
}

Outcome optout_round_trip()
{
    std::mt19937 rng(20231);
    const auto matcher = Registry::builtin().matcher();
    int ok = 0;
    for (int i = 0; i < 100; ++i) {
        auto g = test::random_request(rng);
        auto req = parse_authorization_request(g.url, matcher);
        if (!req) continue;
        OptOutSet optout;
        for (const auto& s : req->scopes) {
            if (std::bernoulli_distribution(0.4)(rng)) optout.scopes.insert(s);
        }
        auto rewritten = parse_authorization_request(rewrite_without_scopes(*req, optout), matcher);
        if (!rewritten) continue;
        std::vector<std::string> expected;
        for (const auto& s : req->scopes) {
            if (!optout.scopes.contains(s)) expected.push_back(s);
        }
        auto others = [](std::vector<std::pair<std::string, std::string>> v) {
            std::erase_if(v, [](const auto& p) { return p.first == "scope"; });
            return v;
        };
        ok += rewritten->scopes == expected && rewritten->endpoint == req->endpoint &&
              others(decoded_query_pairs(rewritten->raw_url)) == others(decoded_query_pairs(g.url));
    }
    return {ok == 100, ratio(ok, 100)};
}

Outcome parse_serialize()
{
    std::mt19937 rng(50023);
    const auto matcher = Registry::builtin().matcher();
    int ok = 0;
    for (int i = 0; i < 500; ++i) {
        auto g = test::random_request(rng);
        auto req = parse_authorization_request(g.url, matcher);
        if (!req) continue;
        ok += test::pair_multiset(to_url(*req)) == test::pair_multiset(g.url);
    }
    return {ok == 500, ratio(ok, 500)};
}

}  // namespace

int main()
{
    auto corpus = fixtures::load_corpus(test::corpus_dir());
    auto server = fixtures::serve_fixtures(corpus);
    auto transport = net::make_http_transport();

    const std::vector<Criterion> criteria = {
        {"endpoint_pattern_fidelity", 1.0, endpoint_pattern_fidelity},
        {"trigger_gallery_coverage", 1.0, [&] { return trigger_gallery_coverage(*server, *transport); }},
        {"code_pattern_classification", 0.0, code_pattern_classification},
        {"end_to_end_corpus", 10.0, [&] { return end_to_end(*server, *transport); }},
        {"focused_zero_traffic", 0.0, focused_zero_traffic},
        {"optout_round_trip", 0.0, optout_round_trip},
        {"parse_serialize_round_trip", 0.0, parse_serialize},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        auto start = Clock::now();
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        char timing[64];
        if (c.limit_s > 0) {
            std::snprintf(timing, sizeof timing, "%.3fs < %.0fs", elapsed, c.limit_s);
            if (elapsed >= c.limit_s) o.pass = false;
        } else {
            std::snprintf(timing, sizeof timing, "%.3fs", elapsed);
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << timing << "]\n";
    }
    server->stop();
    return failures == 0 ? 0 : 1;
}
