#include "speye/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "speye/text.hpp"
#include "speye/url.hpp"

namespace speye {

const std::string_view kIdpPruningDisclaimer =
    "Permissions are read from the relying party's authorization request. The identity provider may "
    "prune or override them, so the consent screen after login can show fewer permissions.";

namespace {

using nlohmann::json;

constexpr std::string_view kAppleEmailRelayNote =
    "Apple can hide your email address by giving this site a unique relay address that forwards to you.";

json optional_string(const std::optional<std::string>& s)
{
    return s ? json(*s) : json(nullptr);
}

int source_rank(ResultSource s)
{
    return static_cast<int>(s);
}

json to_json(const Permission& p)
{
    return {{"scope", p.scope_token},
            {"description", p.description},
            {"category", std::string(to_string(p.category))},
            {"optional", p.optional},
            {"unknown", p.unknown},
            {"privacy_note", optional_string(p.privacy_note)}};
}

json to_json(const FlowKind& f)
{
    std::string kind;
    switch (f.kind) {
    case FlowKind::Kind::AuthorizationCode: kind = "AuthorizationCode"; break;
    case FlowKind::Kind::Implicit: kind = "Implicit"; break;
    case FlowKind::Kind::OidcVariant: kind = "OidcVariant"; break;
    case FlowKind::Kind::Unknown: kind = "Unknown"; break;
    }
    return {{"kind", kind}, {"response_type", f.response_type}};
}

json to_json(const IdpResult& r)
{
    json perms = json::array();
    for (const auto& p : r.permissions) perms.push_back(to_json(p));
    return {{"idp", r.idp.name()},
            {"source", std::string(to_string(r.source))},
            {"flow", to_json(r.flow)},
            {"request", r.request ? speye::to_json(*r.request) : json(nullptr)},
            {"permissions", std::move(perms)},
            {"privacy_notes", r.privacy_notes}};
}

json to_json(const ScanMiss& m)
{
    return {{"candidate", speye::to_json(m.candidate)},
            {"reason", std::string(to_string(m.reason))},
            {"detail", m.detail}};
}

// Greedy word wrap; words longer than `width` are hard-split.
std::vector<std::string> wrap(std::string_view s, std::size_t width)
{
    std::vector<std::string> lines;
    std::string line;
    std::istringstream words{std::string(s)};
    std::string word;
    while (words >> word) {
        while (word.size() > width) {
            if (!line.empty()) {
                lines.push_back(line);
                line.clear();
            }
            lines.push_back(word.substr(0, width));
            word.erase(0, width);
        }
        if (!line.empty() && line.size() + 1 + word.size() > width) {
            lines.push_back(line);
            line.clear();
        }
        if (!line.empty()) line += ' ';
        line += word;
    }
    if (!line.empty()) lines.push_back(line);
    return lines;
}

void emit_wrapped(std::ostream& out, std::string_view first_prefix, std::string_view rest_prefix, std::string_view body)
{
    std::size_t width = kTextWidth - std::max(first_prefix.size(), rest_prefix.size());
    auto lines = wrap(body, width);
    if (lines.empty()) lines.emplace_back();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = std::string(i == 0 ? first_prefix : rest_prefix) + lines[i];
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

std::string pad(std::string_view s, std::size_t width)
{
    std::string out(s);
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
}

std::string flow_label(const IdpResult& r)
{
    if (r.source == ResultSource::StaticSdkLiteral) return "SDK call (statically observed)";
    std::string via = r.source == ResultSource::DrivenRedirect ? "redirect" : "authorization URL";
    return via + ", flow " + r.flow.str();
}

void render_result(std::ostream& out, const IdpResult& r)
{
    std::string header = "[" + r.idp.display_name() + "] " + flow_label(r) + ", " +
                         std::to_string(r.permissions.size()) + " permission" +
                         (r.permissions.size() == 1 ? "" : "s");
    emit_wrapped(out, "", "    ", header);
    constexpr std::size_t kScopeColumn = 34;
    for (const auto& p : r.permissions) {
        std::string category = p.unknown ? "UNKNOWN" : std::string(to_string(p.category));
        std::string scope = p.scope_token + (p.optional ? " (optional)" : "");
        std::string prefix = "  " + pad(category, 9) + " ";
        std::string indent(prefix.size() + kScopeColumn + 1, ' ');
        if (scope.size() > kScopeColumn) {
            emit_wrapped(out, prefix, prefix, scope);
            emit_wrapped(out, indent, indent, p.description);
        } else {
            emit_wrapped(out, prefix + pad(scope, kScopeColumn) + " ", indent, p.description);
        }
    }
    for (const auto& note : r.privacy_notes) emit_wrapped(out, "  note: ", "        ", note);
}

}  // namespace

std::string_view to_string(ResultSource s)
{
    switch (s) {
    case ResultSource::DrivenRedirect: return "DrivenRedirect";
    case ResultSource::StaticSdkLiteral: return "StaticSdkLiteral";
    case ResultSource::FocusedUrl: return "FocusedUrl";
    }
    return "DrivenRedirect";
}

IdpResult make_idp_result(const IdpId& idp, std::optional<AuthorizationRequest> request,
                          const std::vector<std::string>& scopes, FlowKind flow, ResultSource source,
                          const Registry& registry)
{
    IdpResult r;
    r.idp = idp;
    r.request = std::move(request);
    r.flow = std::move(flow);
    r.source = source;
    for (const auto& token : scopes) {
        bool seen = std::any_of(r.permissions.begin(), r.permissions.end(),
                                [&](const Permission& p) { return p.scope_token == token; });
        if (!seen) r.permissions.push_back(registry.describe(idp, token));
    }
    std::sort(r.permissions.begin(), r.permissions.end(), [](const Permission& a, const Permission& b) {
        if (a.category != b.category) return a.category == PermissionCategory::Basic;
        return a.scope_token < b.scope_token;
    });
    for (const auto& p : r.permissions) {
        if (p.privacy_note &&
            std::find(r.privacy_notes.begin(), r.privacy_notes.end(), *p.privacy_note) == r.privacy_notes.end()) {
            r.privacy_notes.push_back(*p.privacy_note);
        }
    }
    bool apple_email = idp == IdpId::apple() && std::any_of(r.permissions.begin(), r.permissions.end(),
                                                             [](const Permission& p) { return p.scope_token == "email"; });
    if (apple_email && r.privacy_notes.empty()) r.privacy_notes.emplace_back(kAppleEmailRelayNote);
    return r;
}

ScanReport build_comparative_report(std::string rp_origin, std::optional<PatternClass> site_pattern,
                                    const ScanEvidence& evidence, const Registry& registry,
                                    std::optional<std::string> scanned_at)
{
    ScanReport report;
    report.rp_origin = std::move(rp_origin);
    report.scanned_at = std::move(scanned_at);
    report.site_pattern = site_pattern;
    report.misses = evidence.misses;

    std::vector<IdpResult> results;
    auto add = [&](IdpResult r) {
        bool duplicate = std::any_of(results.begin(), results.end(), [&](const IdpResult& o) {
            if (o.idp != r.idp || o.source != r.source || o.permissions.size() != r.permissions.size()) return false;
            return std::equal(o.permissions.begin(), o.permissions.end(), r.permissions.begin(),
                              [](const Permission& a, const Permission& b) { return a.scope_token == b.scope_token; });
        });
        if (!duplicate) results.push_back(std::move(r));
    };
    for (const auto& chain : evidence.chains) {
        if (chain.terminal.kind != ChainTerminal::Kind::IdpEndpoint || !chain.terminal.request) continue;
        const auto& req = *chain.terminal.request;
        IdpId idp = req.idp.value_or(*IdpId::from_name("unknown"));
        add(make_idp_result(idp, req, req.scopes, classify_flow(req), ResultSource::DrivenRedirect, registry));
    }
    for (const auto& finding : evidence.findings) {
        add(make_idp_result(finding.idp, std::nullopt, finding.scopes, FlowKind{}, ResultSource::StaticSdkLiteral,
                            registry));
    }
    std::stable_sort(results.begin(), results.end(), [&](const IdpResult& a, const IdpResult& b) {
        auto ra = registry.display_rank(a.idp);
        auto rb = registry.display_rank(b.idp);
        if (ra != rb) return ra < rb;
        if (a.idp != b.idp) return a.idp.name() < b.idp.name();
        return source_rank(a.source) < source_rank(b.source);
    });
    report.idp_results = std::move(results);
    return report;
}

FocusedReport build_focused_report(const AuthorizationRequest& request, const Registry& registry)
{
    FocusedReport report;
    report.idp = request.idp.value_or(*IdpId::from_name("unknown"));
    report.result = make_idp_result(report.idp, request, request.scopes, classify_flow(request),
                                    ResultSource::FocusedUrl, registry);
    std::optional<Url> redirect = request.redirect_uri ? Url::try_parse(*request.redirect_uri) : std::nullopt;
    if (redirect) {
        report.rp_identifier = registrable_domain(redirect->host);
    } else {
        report.rp_identifier = request.client_id.value_or("");
    }
    for (const auto& p : report.result.permissions) {
        if (!p.optional || p.unknown) continue;
        report.optout_previews.push_back({p.scope_token, rewrite_without_scopes(request, OptOutSet{{p.scope_token}})});
    }
    return report;
}

json to_json(const AuthorizationRequest& r)
{
    json extras = json::array();
    for (const auto& p : r.extra_params) extras.push_back({{"name", p.name}, {"value", p.value}});
    return {{"url", r.raw_url},
            {"endpoint", r.endpoint},
            {"idp", r.idp ? json(r.idp->name()) : json(nullptr)},
            {"client_id", optional_string(r.client_id)},
            {"redirect_uri", optional_string(r.redirect_uri)},
            {"response_type", optional_string(r.response_type)},
            {"scopes", r.scopes},
            {"scope_delimiter", std::string(to_string(r.scope_delimiter))},
            {"state", optional_string(r.state)},
            {"nonce", optional_string(r.nonce)},
            {"extra_params", std::move(extras)}};
}

json to_json(const SsoCandidate& c)
{
    json target;
    if (const auto* url = std::get_if<std::string>(&c.target)) {
        target = {{"type", "url"}, {"url", *url}};
    } else if (const auto* handler = std::get_if<HandlerName>(&c.target)) {
        target = {{"type", "handler"}, {"handler", handler->value}};
    } else {
        const auto& form = std::get<FormDescriptor>(c.target);
        json fields = json::array();
        for (const auto& f : form.fields) fields.push_back({{"name", f.name}, {"value", f.value}});
        target = {{"type", "form"},
                  {"action", form.action},
                  {"method", std::string(to_string(form.method))},
                  {"fields", std::move(fields)}};
    }
    return {{"matched_string", c.matched_string},
            {"element_kind", c.element_kind},
            {"attribute_source", std::string(to_string(c.attribute_source))},
            {"target", std::move(target)},
            {"idp_hint", c.idp_hint ? json(c.idp_hint->name()) : json(nullptr)},
            {"dom_locator", c.dom_locator}};
}

json to_json(const ScanReport& report)
{
    json doc = {{"rp_origin", report.rp_origin}, {"disclaimer", report.disclaimer}};
    if (report.scanned_at) doc["scanned_at"] = *report.scanned_at;
    if (report.site_pattern) doc["site_pattern"] = std::string(to_string(*report.site_pattern));
    doc["idp_results"] = json::array();
    for (const auto& r : report.idp_results) doc["idp_results"].push_back(to_json(r));
    doc["misses"] = json::array();
    for (const auto& m : report.misses) doc["misses"].push_back(to_json(m));
    return doc;
}

json to_json(const FocusedReport& report)
{
    json previews = json::array();
    for (const auto& p : report.optout_previews) previews.push_back({{"scope", p.scope_token}, {"url", p.url}});
    return {{"idp", report.idp.name()},
            {"rp_identifier", report.rp_identifier},
            {"result", to_json(report.result)},
            {"optout_previews", std::move(previews)},
            {"disclaimer", report.disclaimer}};
}

std::string canonical_dump(const json& value)
{
    return value.dump(2) + "\n";
}

std::string render_json(const ScanReport& report)
{
    return canonical_dump(to_json(report));
}

std::string render_json(const FocusedReport& report)
{
    return canonical_dump(to_json(report));
}

bool is_canonical_json(std::string_view document)
{
    try {
        return canonical_dump(json::parse(document)) == document;
    } catch (const json::exception&) {
        return false;
    }
}

std::string render_text(const ScanReport& report)
{
    std::ostringstream out;
    emit_wrapped(out, "Relying party: ", "    ", report.rp_origin);
    out << "Code pattern: " << (report.site_pattern ? to_string(*report.site_pattern) : "none detected") << '\n';
    if (report.scanned_at) out << "Scanned at: " << *report.scanned_at << '\n';
    out << '\n';
    if (report.idp_results.empty()) out << "No SSO permissions extracted.\n\n";
    for (const auto& r : report.idp_results) {
        render_result(out, r);
        out << '\n';
    }
    out << "Misses (" << report.misses.size() << ")\n";
    for (const auto& m : report.misses) {
        std::string head = std::string(to_string(m.reason)) + ": \"" + m.candidate.matched_string + "\" <" +
                           m.candidate.element_kind + "> " + std::string(to_string(m.candidate.attribute_source));
        if (m.candidate.idp_hint) head += " (" + m.candidate.idp_hint->display_name() + ")";
        emit_wrapped(out, "  - ", "      ", head);
        emit_wrapped(out, "      ", "      ", m.detail);
    }
    out << '\n';
    emit_wrapped(out, "Note: ", "      ", report.disclaimer);
    return out.str();
}

std::string render_text(const FocusedReport& report)
{
    std::ostringstream out;
    out << "Identity provider: " << report.idp.display_name() << '\n';
    emit_wrapped(out, "Relying party: ", "    ", report.rp_identifier.empty() ? "(unidentified)" : report.rp_identifier);
    out << '\n';
    render_result(out, report.result);
    if (!report.optout_previews.empty()) {
        out << "\nOpt-out previews\n";
        for (const auto& p : report.optout_previews) {
            emit_wrapped(out, "  without ", "    ", p.scope_token + ":");
            emit_wrapped(out, "    ", "    ", p.url);
        }
    }
    out << '\n';
    emit_wrapped(out, "Note: ", "      ", report.disclaimer);
    return out.str();
}

}  // namespace speye
