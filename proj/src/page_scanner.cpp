#include "speye/page_scanner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <set>

#include "speye/error.hpp"
#include "speye/text.hpp"

namespace speye {
namespace {

using html::Node;

constexpr std::string_view kIdpLink = "idp link";

constexpr std::array<std::string_view, 6> kTextTags = {"span", "div", "a", "small", "button", "p"};

template <std::size_t N>
bool one_of(const std::array<std::string_view, N>& set, std::string_view v)
{
    return std::find(set.begin(), set.end(), v) != set.end();
}

std::optional<std::string_view> match_trigger(std::string_view raw)
{
    std::string normalized = text::normalize(raw);
    if (normalized.empty()) return std::nullopt;
    for (std::string_view trigger : sso_trigger_strings()) {
        if (text::find_word(normalized, trigger) != std::string::npos) return trigger;
    }
    return std::nullopt;
}

std::string attr_or_empty(const Node& n, std::string_view name)
{
    const std::string* v = n.attr(name);
    return v ? *v : std::string{};
}

std::string input_type(const Node& n)
{
    std::string type = text::to_lower(text::trim(attr_or_empty(n, "type")));
    return type.empty() ? "text" : type;
}

bool is_submit_control(const Node& n)
{
    if (n.is_element("button")) {
        std::string type = text::to_lower(text::trim(attr_or_empty(n, "type")));
        return type.empty() || type == "submit";
    }
    if (n.is_element("input")) {
        std::string type = input_type(n);
        return type == "submit" || type == "image";
    }
    return false;
}

// Resolves an attribute URL to an absolute http(s) URL; nullopt for
// fragments, javascript: links and unparseable values.
std::optional<std::string> usable_url(const Url& base, const std::string* value)
{
    if (value == nullptr) return std::nullopt;
    std::string_view v = text::trim(*value);
    if (v.empty() || v.front() == '#' || text::istarts_with(v, "javascript:")) return std::nullopt;
    try {
        return base.resolve(v).str();
    } catch (const MalformedUrl&) {
        return std::nullopt;
    }
}

const Node* nearest_ancestor(const Node& n, std::string_view tag)
{
    for (const Node* p = n.parent(); p != nullptr; p = p->parent()) {
        if (p->is_element(tag)) return p;
    }
    return nullptr;
}

const Node* first_descendant_link(const Node& n, const Url& base)
{
    for (const auto& child : n.children()) {
        if (!child->is_element()) continue;
        if (child->is_element("a") && usable_url(base, child->attr("href"))) return child.get();
        if (const Node* found = first_descendant_link(*child, base)) return found;
    }
    return nullptr;
}

void collect_form_fields(const Node& n, const Node* activator, std::vector<QueryParam>& fields)
{
    for (const auto& child_ptr : n.children()) {
        const Node& child = *child_ptr;
        if (!child.is_element()) continue;
        const std::string* name = child.attr("name");
        bool named = name != nullptr && !name->empty() && child.attr("disabled") == nullptr;
        if (child.is_element("input") && named) {
            std::string type = input_type(child);
            if (type == "submit" || type == "image" || type == "button" || type == "reset") {
                if (&child == activator) fields.push_back({*name, attr_or_empty(child, "value")});
            } else if (type == "checkbox" || type == "radio") {
                if (child.attr("checked")) {
                    const std::string* v = child.attr("value");
                    fields.push_back({*name, v ? *v : "on"});
                }
            } else if (type != "file") {
                fields.push_back({*name, attr_or_empty(child, "value")});
            }
            continue;
        }
        if (child.is_element("button")) {
            if (named && &child == activator) fields.push_back({*name, attr_or_empty(child, "value")});
            continue;
        }
        if (child.is_element("textarea") && named) {
            fields.push_back({*name, child.own_text()});
            continue;
        }
        if (child.is_element("select") && named) {
            const Node* chosen = nullptr;
            const Node* first = nullptr;
            std::vector<const Node*> pending = {&child};
            while (!pending.empty()) {
                const Node* cur = pending.back();
                pending.pop_back();
                if (cur->is_element("option")) {
                    if (!first) first = cur;
                    if (!chosen && cur->attr("selected")) chosen = cur;
                }
                for (auto it = cur->children().rbegin(); it != cur->children().rend(); ++it) pending.push_back(it->get());
            }
            if (!chosen) chosen = first;
            if (chosen) {
                const std::string* v = chosen->attr("value");
                fields.push_back({*name, v ? *v : std::string(text::trim(chosen->text_content()))});
            }
            continue;
        }
        collect_form_fields(child, activator, fields);
    }
}

std::optional<FormDescriptor> describe_form(const Node& form, const Node& matched, const Url& base,
                                            const Url& document_url)
{
    FormDescriptor fd;
    const std::string* action = form.attr("action");
    if (action && !text::trim(*action).empty()) {
        auto resolved = usable_url(base, action);
        if (!resolved) return std::nullopt;
        fd.action = *resolved;
    } else {
        Url self = document_url;
        self.fragment.reset();
        fd.action = self.str();
    }
    fd.method = text::iequals(text::trim(attr_or_empty(form, "method")), "get") ? HttpMethod::Get : HttpMethod::Post;

    const Node* activator = nullptr;
    for (const Node* n = &matched; n != nullptr && n != &form; n = n->parent()) {
        if (is_submit_control(*n)) {
            activator = n;
            break;
        }
    }
    collect_form_fields(form, activator, fd.fields);
    return fd;
}

std::vector<IdpId> idp_names_in(std::string_view haystack)
{
    std::string lowered = text::to_lower(haystack);
    std::vector<IdpId> found;
    for (const IdpId& idp : {IdpId::facebook(), IdpId::google(), IdpId::apple()}) {
        if (lowered.find(idp.name()) != std::string::npos) found.push_back(idp);
    }
    return found;
}

std::optional<IdpId> infer_idp_hint(const Node& node, const CandidateTarget& target, const Registry& registry)
{
    if (const auto* url = std::get_if<std::string>(&target)) {
        if (auto idp = registry.match_endpoint(*url)) return idp;
    } else if (const auto* form = std::get_if<FormDescriptor>(&target)) {
        if (auto idp = registry.match_endpoint(form->action)) return idp;
    }

    // Visible label first, then identifying attributes, then the target itself.
    std::string label = node.text_content();
    for (std::string_view a : {"value", "title", "data-text", "aria-label", "alt"}) {
        label += " " + attr_or_empty(node, a);
    }
    std::string attributes;
    for (std::string_view a : {"id", "class", "name", "data-provider", "href", "onclick"}) {
        attributes += " " + attr_or_empty(node, a);
    }
    std::string target_text = describe_target(target);
    for (const std::string* level : {&label, &attributes, &target_text}) {
        auto names = idp_names_in(*level);
        if (names.size() == 1) return names.front();
        if (names.size() > 1) return std::nullopt;
    }
    return std::nullopt;
}

struct NodeMatch {
    std::string_view matched;
    std::optional<AttributeSource> fixed_source;
    std::optional<std::string> fixed_target;
};

std::optional<NodeMatch> match_node(const Node& node, const Url& base, const Registry& registry)
{
    const std::string& tag = node.tag();
    if (one_of(kTextTags, tag)) {
        if (auto t = match_trigger(node.own_text())) return NodeMatch{*t, {}, {}};
    }
    if (tag == "span") {
        if (const std::string* v = node.attr("data-text")) {
            if (auto t = match_trigger(*v)) return NodeMatch{*t, {}, {}};
        }
    }
    if (tag == "button" || (tag == "input" && (input_type(node) == "submit" || input_type(node) == "button"))) {
        if (const std::string* v = node.attr("value")) {
            if (auto t = match_trigger(*v)) return NodeMatch{*t, {}, {}};
        }
    }
    if (tag == "a") {
        if (const std::string* title = node.attr("title")) {
            if (auto t = match_trigger(*title)) return NodeMatch{*t, {}, {}};
            auto url = usable_url(base, title);
            if (url && registry.match_endpoint(*url)) return NodeMatch{kIdpLink, AttributeSource::TitleAttr, url};
        }
        auto href = usable_url(base, node.attr("href"));
        if (href && registry.match_endpoint(*href)) return NodeMatch{kIdpLink, AttributeSource::HrefLink, href};
    }
    if (tag == "iframe") {
        auto src = usable_url(base, node.attr("src"));
        if (src && registry.match_endpoint(*src)) return NodeMatch{kIdpLink, AttributeSource::IframeSrc, src};
    }
    return std::nullopt;
}

std::optional<std::pair<AttributeSource, CandidateTarget>> resolve_target(const Node& node, const Url& base,
                                                                         const Url& document_url)
{
    if (node.is_element("a")) {
        if (auto href = usable_url(base, node.attr("href"))) return std::pair{AttributeSource::HrefLink, CandidateTarget{*href}};
    }
    if (const Node* link = first_descendant_link(node, base)) {
        return std::pair{AttributeSource::HrefLink, CandidateTarget{*usable_url(base, link->attr("href"))}};
    }
    for (const Node* p = node.parent(); p != nullptr; p = p->parent()) {
        if (p->is_element("a")) {
            if (auto href = usable_url(base, p->attr("href"))) return std::pair{AttributeSource::HrefLink, CandidateTarget{*href}};
        }
    }
    if (const Node* form = node.is_element("form") ? &node : nearest_ancestor(node, "form")) {
        if (auto fd = describe_form(*form, node, base, document_url)) {
            return std::pair{AttributeSource::FormSubmit, CandidateTarget{std::move(*fd)}};
        }
    }
    for (const Node* n = &node; n != nullptr && n->is_element(); n = n->parent()) {
        if (const std::string* handler = n->attr("onclick"); handler && !text::trim(*handler).empty()) {
            return std::pair{AttributeSource::ClickHandler, CandidateTarget{HandlerName{std::string(text::trim(*handler))}}};
        }
    }
    return std::nullopt;
}

Url effective_base(const html::Document& document, const Url& base_url)
{
    for (const Node* base : document.elements_by_tag("base")) {
        if (auto href = usable_url(base_url, base->attr("href"))) return Url::parse(*href);
    }
    return base_url;
}

// Index just past the ')' closing the call whose '(' is at `open`, skipping
// string literals and comments; npos when unbalanced.
std::size_t matching_paren(std::string_view src, std::size_t open)
{
    int depth = 0;
    for (std::size_t i = open; i < src.size(); ++i) {
        char c = src[i];
        if (c == '"' || c == '\'' || c == '`') {
            for (++i; i < src.size() && src[i] != c; ++i) {
                if (src[i] == '\\') ++i;
            }
        } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            i = src.find('\n', i);
            if (i == std::string_view::npos) return i;
        } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            i = src.find("*/", i + 2);
            if (i == std::string_view::npos) return i;
            ++i;
        } else if (c == '(') {
            ++depth;
        } else if (c == ')') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::optional<std::string> literal_scope_argument(std::string_view args)
{
    static const std::regex key(R"((?:^|[{,\s])(['"]?)scope\1\s*:\s*)");
    std::string subject(args);
    std::smatch m;
    if (!std::regex_search(subject, m, key)) return std::nullopt;
    std::size_t i = static_cast<std::size_t>(m.position(0) + m.length(0));
    if (i >= subject.size()) return std::nullopt;
    char quote = subject[i];
    if (quote != '"' && quote != '\'' && quote != '`') return std::nullopt;
    std::string value;
    for (++i; i < subject.size() && subject[i] != quote; ++i) {
        if (subject[i] == '\\' && i + 1 < subject.size()) ++i;
        value.push_back(subject[i]);
    }
    if (i >= subject.size()) return std::nullopt;
    if (quote == '`' && value.find("${") != std::string::npos) return std::nullopt;
    // A literal followed by '+' is concatenated with a run-time value.
    std::size_t after = i + 1;
    while (after < subject.size() && std::isspace(static_cast<unsigned char>(subject[after]))) ++after;
    if (after < subject.size() && subject[after] == '+') return std::nullopt;
    return value;
}

struct SdkCall {
    IdpId idp;
    std::string_view callee;
};

const std::vector<SdkCall>& sdk_calls()
{
    static const std::vector<SdkCall> calls = {
        {IdpId::facebook(), "FB.login"},
        {IdpId::google(), "gapi.auth2.init"},
        {IdpId::google(), "gapi.auth2.authorize"},
        {IdpId::google(), "getAuthInstance().signIn"},
        {IdpId::google(), "gapi.signin2.render"},
        {IdpId::google(), "google.accounts.oauth2.initTokenClient"},
        {IdpId::google(), "google.accounts.oauth2.initCodeClient"},
        {IdpId::apple(), "AppleID.auth.init"},
    };
    return calls;
}

}  // namespace

std::string_view to_string(AttributeSource s)
{
    switch (s) {
    case AttributeSource::HrefLink: return "HrefLink";
    case AttributeSource::FormSubmit: return "FormSubmit";
    case AttributeSource::ClickHandler: return "ClickHandler";
    case AttributeSource::SdkCall: return "SdkCall";
    case AttributeSource::IframeSrc: return "IframeSrc";
    case AttributeSource::TitleAttr: return "TitleAttr";
    }
    return "HrefLink";
}

std::string_view to_string(PatternClass p)
{
    switch (p) {
    case PatternClass::HtmlEmbedded: return "HtmlEmbedded";
    case PatternClass::ScriptDriven: return "ScriptDriven";
    case PatternClass::SdkBased: return "SdkBased";
    case PatternClass::Mixed: return "Mixed";
    }
    return "Mixed";
}

std::optional<PatternClass> pattern_class_from_string(std::string_view s)
{
    for (auto p : {PatternClass::HtmlEmbedded, PatternClass::ScriptDriven, PatternClass::SdkBased, PatternClass::Mixed}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

std::string describe_target(const CandidateTarget& target)
{
    if (const auto* url = std::get_if<std::string>(&target)) return *url;
    if (const auto* handler = std::get_if<HandlerName>(&target)) return handler->value;
    const auto& form = std::get<FormDescriptor>(target);
    std::string out = std::string(to_string(form.method)) + " " + form.action;
    for (std::size_t i = 0; i < form.fields.size(); ++i) {
        out += (i == 0 ? " " : "&") + form.fields[i].name + "=" + form.fields[i].value;
    }
    return out;
}

const std::vector<std::string_view>& sso_trigger_strings()
{
    static const std::vector<std::string_view> triggers = {
        "sign in with", "continue with", "connect using", "log in with", "login with", "login via", "sign in", "or use"};
    return triggers;
}

bool is_html_content_type(std::string_view content_type)
{
    std::string type = text::to_lower(text::trim(content_type.substr(0, content_type.find(';'))));
    return type.empty() || type == "text/html" || type == "application/xhtml+xml";
}

html::Document parse_page(std::string_view body, std::string_view content_type)
{
    if (!is_html_content_type(content_type)) throw UnsupportedContentType(std::string(content_type));
    return html::Document::parse(body);
}

std::vector<SsoCandidate> detect_sso_matches(const html::Document& document, const Url& base_url,
                                             const Registry& registry)
{
    const Url base = effective_base(document, base_url);
    std::vector<SsoCandidate> out;
    for (const Node* node : document.elements()) {
        auto match = match_node(*node, base, registry);
        if (!match) continue;
        SsoCandidate c;
        c.matched_string = std::string(match->matched);
        c.element_kind = node->tag();
        c.dom_locator = node->locator();
        if (match->fixed_source) {
            c.attribute_source = *match->fixed_source;
            c.target = *match->fixed_target;
        } else {
            auto resolved = resolve_target(*node, base, base_url);
            if (!resolved) continue;
            c.attribute_source = resolved->first;
            c.target = std::move(resolved->second);
        }
        c.idp_hint = infer_idp_hint(*node, c.target, registry);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SsoCandidate> find_sso_candidates(const html::Document& document, const Url& base_url,
                                              const Registry& registry)
{
    std::vector<SsoCandidate> unique;
    for (auto& c : detect_sso_matches(document, base_url, registry)) {
        bool duplicate = std::any_of(unique.begin(), unique.end(), [&](const SsoCandidate& u) {
            return u.idp_hint == c.idp_hint && u.target == c.target;
        });
        if (!duplicate) unique.push_back(std::move(c));
    }
    return unique;
}

std::vector<IdpId> imported_sdks(const html::Document& document, const Registry& registry)
{
    std::vector<IdpId> out;
    for (const Node* script : document.elements_by_tag("script")) {
        const std::string* src = script->attr("src");
        if (src == nullptr) continue;
        std::string_view s = text::trim(*src);
        std::optional<Url> url = s.starts_with("//") ? Url::try_parse("https:" + std::string(s)) : Url::try_parse(s);
        if (!url) continue;
        if (auto idp = registry.sdk_idp_for_host(url->host)) {
            if (std::find(out.begin(), out.end(), *idp) == out.end()) out.push_back(*idp);
        }
    }
    return out;
}

PatternClassification classify_pattern(const html::Document& document, const std::vector<SsoCandidate>& candidates,
                                       const Registry& registry)
{
    const auto sdks = imported_sdks(document, registry);
    PatternClassification out;
    for (const auto& c : candidates) {
        PatternClass cls = PatternClass::HtmlEmbedded;
        if (c.attribute_source == AttributeSource::ClickHandler || c.attribute_source == AttributeSource::SdkCall) {
            bool sdk = c.idp_hint && std::find(sdks.begin(), sdks.end(), *c.idp_hint) != sdks.end();
            cls = sdk || c.attribute_source == AttributeSource::SdkCall ? PatternClass::SdkBased
                                                                         : PatternClass::ScriptDriven;
        }
        out.per_candidate.push_back(cls);
    }
    if (!out.per_candidate.empty()) {
        std::set<PatternClass> distinct(out.per_candidate.begin(), out.per_candidate.end());
        out.site = distinct.size() == 1 ? *distinct.begin() : PatternClass::Mixed;
    }
    return out;
}

std::vector<SdkScopeFinding> extract_sdk_scopes(const html::Document& document)
{
    std::vector<SdkScopeFinding> out;
    for (const Node* script : document.elements_by_tag("script")) {
        if (script->attr("src") != nullptr) continue;
        const std::string source = script->own_text();
        struct Hit {
            std::size_t pos;
            const SdkCall* call;
        };
        std::vector<Hit> hits;
        for (const auto& call : sdk_calls()) {
            for (std::size_t pos = source.find(call.callee); pos != std::string::npos;
                 pos = source.find(call.callee, pos + 1)) {
                hits.push_back({pos, &call});
            }
        }
        std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
        for (const auto& hit : hits) {
            std::size_t open = hit.pos + hit.call->callee.size();
            while (open < source.size() && std::isspace(static_cast<unsigned char>(source[open]))) ++open;
            if (open >= source.size() || source[open] != '(') continue;
            std::size_t close = matching_paren(source, open);
            if (close == std::string::npos) continue;
            auto literal = literal_scope_argument(std::string_view(source).substr(open + 1, close - open - 2));
            if (!literal) continue;
            SdkScopeFinding finding;
            finding.idp = hit.call->idp;
            std::string token;
            for (char c : *literal + ",") {
                if (c == ',' || c == '+' || std::isspace(static_cast<unsigned char>(c))) {
                    if (!token.empty()) finding.scopes.push_back(std::move(token));
                    token.clear();
                } else {
                    token.push_back(c);
                }
            }
            if (finding.scopes.empty()) continue;
            auto line = 1 + std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(hit.pos), '\n');
            finding.evidence = script->locator() + ":" + std::to_string(line);
            out.push_back(std::move(finding));
        }
    }
    return out;
}

std::vector<std::string> csrf_meta_names(const html::Document& document)
{
    std::vector<std::string> out;
    for (const Node* meta : document.elements_by_tag("meta")) {
        const std::string* name = meta->attr("name");
        if (name == nullptr || meta->attr("content") == nullptr) continue;
        std::string lowered = text::to_lower(*name);
        if (lowered.find("csrf") != std::string::npos || lowered.find("xsrf") != std::string::npos ||
            lowered == "authenticity_token") {
            out.push_back(lowered);
        }
    }
    return out;
}

}  // namespace speye
