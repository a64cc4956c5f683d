#include "speye/registry.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "speye/text.hpp"
#include "speye/url.hpp"

namespace speye {

extern const char* const kBuiltinRegistryJson;

namespace {

using nlohmann::json;

std::string pointer(std::string_view array, std::size_t index, std::string_view field = {})
{
    std::string out = "/" + std::string(array) + "/" + std::to_string(index);
    if (!field.empty()) out += "/" + std::string(field);
    return out;
}

const json& require(const json& object, std::string_view key, json::value_t type, const std::string& where)
{
    auto it = object.find(key);
    if (it == object.end()) {
        throw RegistryError(RegistryError::Kind::Invalid, where, "missing key '" + std::string(key) + "'");
    }
    bool ok = it->type() == type ||
              (type == json::value_t::number_integer && it->is_number_integer());
    if (!ok) {
        throw RegistryError(RegistryError::Kind::Invalid, where + "/" + std::string(key),
                            "unexpected value type");
    }
    return *it;
}

IdpId require_idp(const json& object, const std::string& where)
{
    const auto& name = require(object, "idp", json::value_t::string, where);
    auto idp = IdpId::from_name(name.get<std::string>());
    if (!idp) throw RegistryError(RegistryError::Kind::Invalid, where + "/idp", "empty idp name");
    return *idp;
}

std::size_t line_of(std::string_view doc, std::size_t byte)
{
    byte = std::min(byte, doc.size());
    return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

bool host_matches(std::string_view host, std::string_view sdk_host)
{
    if (host == sdk_host) return true;
    return host.size() > sdk_host.size() && host.ends_with(sdk_host) &&
           host[host.size() - sdk_host.size() - 1] == '.';
}

}  // namespace

std::string_view to_string(PermissionCategory c)
{
    return c == PermissionCategory::Basic ? "Basic" : "Extended";
}

RegistryError::RegistryError(Kind kind, std::string location, const std::string& message)
    : Error("registry " + location + ": " + message), kind_(kind), location_(std::move(location))
{
}

Registry Registry::load(std::istream& source)
{
    std::stringstream buffer;
    buffer << source.rdbuf();
    return load(buffer.str());
}

Registry Registry::load(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw RegistryError(RegistryError::Kind::ParseError, "line " + std::to_string(line_of(document, e.byte)),
                            e.what());
    }
    if (!doc.is_object()) {
        throw RegistryError(RegistryError::Kind::ParseError, "line 1", "top level must be an object");
    }

    Registry reg;
    for (const auto& name : require(doc, "display_order", json::value_t::array, "")) {
        if (!name.is_string()) {
            throw RegistryError(RegistryError::Kind::Invalid, "/display_order", "idp names must be strings");
        }
        auto idp = IdpId::from_name(name.get<std::string>());
        if (!idp || std::find(reg.display_order_.begin(), reg.display_order_.end(), *idp) != reg.display_order_.end()) {
            throw RegistryError(RegistryError::Kind::Invalid, "/display_order", "empty or repeated idp name");
        }
        reg.display_order_.push_back(*idp);
    }
    const std::vector<IdpId> builtins = {IdpId::facebook(), IdpId::google(), IdpId::apple()};
    if (reg.display_order_.size() < builtins.size() ||
        !std::equal(builtins.begin(), builtins.end(), reg.display_order_.begin())) {
        throw RegistryError(RegistryError::Kind::Invalid, "/display_order",
                            "must start with facebook, google, apple");
    }

    const auto& endpoints = require(doc, "endpoints", json::value_t::array, "");
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        const auto& entry = endpoints[i];
        std::string where = pointer("endpoints", i);
        if (!entry.is_object()) throw RegistryError(RegistryError::Kind::Invalid, where, "expected an object");
        EndpointPattern ep;
        ep.idp = require_idp(entry, where);
        ep.pattern = require(entry, "pattern", json::value_t::string, where).get<std::string>();
        if (auto ex = entry.find("example"); ex != entry.end()) {
            if (!ex->is_string()) throw RegistryError(RegistryError::Kind::Invalid, where + "/example", "expected a string");
            ep.example = ex->get<std::string>();
        }
        std::regex compiled;
        try {
            compiled = std::regex(ep.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw RegistryError(RegistryError::Kind::BadPattern, where + "/pattern", e.what());
        }
        if (ep.example && !std::regex_match(*ep.example, compiled)) {
            throw RegistryError(RegistryError::Kind::BadPattern, where + "/example",
                                "pattern does not match its example URL");
        }
        reg.endpoints_.push_back(std::move(ep));
    }

    if (auto hosts = doc.find("sdk_hosts"); hosts != doc.end()) {
        if (!hosts->is_array()) throw RegistryError(RegistryError::Kind::Invalid, "/sdk_hosts", "expected an array");
        for (std::size_t i = 0; i < hosts->size(); ++i) {
            const auto& entry = (*hosts)[i];
            std::string where = pointer("sdk_hosts", i);
            if (!entry.is_object()) throw RegistryError(RegistryError::Kind::Invalid, where, "expected an object");
            SdkHost sh{require_idp(entry, where),
                       text::to_lower(require(entry, "host", json::value_t::string, where).get<std::string>())};
            reg.sdk_hosts_.push_back(std::move(sh));
        }
    }

    std::set<std::pair<std::string, std::string>> seen;
    const auto& perms = require(doc, "permissions", json::value_t::array, "");
    for (std::size_t i = 0; i < perms.size(); ++i) {
        const auto& entry = perms[i];
        std::string where = pointer("permissions", i);
        if (!entry.is_object()) throw RegistryError(RegistryError::Kind::Invalid, where, "expected an object");
        Permission p;
        p.idp = require_idp(entry, where);
        p.scope_token = require(entry, "scope", json::value_t::string, where).get<std::string>();
        p.description = require(entry, "description", json::value_t::string, where).get<std::string>();
        if (p.scope_token.empty() || text::trim(p.description).empty()) {
            throw RegistryError(RegistryError::Kind::Invalid, where, "scope and description must be non-empty");
        }
        std::string category = require(entry, "category", json::value_t::string, where).get<std::string>();
        if (category == "Basic") {
            p.category = PermissionCategory::Basic;
        } else if (category == "Extended") {
            p.category = PermissionCategory::Extended;
        } else {
            throw RegistryError(RegistryError::Kind::Invalid, where + "/category", "expected Basic or Extended");
        }
        p.optional = p.category == PermissionCategory::Extended;
        if (auto opt = entry.find("optional"); opt != entry.end()) {
            if (!opt->is_boolean()) throw RegistryError(RegistryError::Kind::Invalid, where + "/optional", "expected a boolean");
            p.optional = opt->get<bool>();
        }
        if (auto note = entry.find("privacy_note"); note != entry.end() && !note->is_null()) {
            if (!note->is_string()) throw RegistryError(RegistryError::Kind::Invalid, where + "/privacy_note", "expected a string");
            p.privacy_note = note->get<std::string>();
        }
        if (!seen.emplace(p.idp.name(), p.scope_token).second) {
            throw RegistryError(RegistryError::Kind::DuplicateScope, where,
                                "duplicate scope '" + p.scope_token + "' for " + p.idp.name());
        }
        bool has_endpoint = std::any_of(reg.endpoints_.begin(), reg.endpoints_.end(),
                                        [&](const EndpointPattern& ep) { return ep.idp == p.idp; });
        if (!has_endpoint) {
            throw RegistryError(RegistryError::Kind::Invalid, where + "/idp",
                                "no endpoint pattern for idp '" + p.idp.name() + "'");
        }
        reg.permissions_.push_back(std::move(p));
    }

    reg.compile();
    return reg;
}

Registry Registry::load_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RegistryError(RegistryError::Kind::ParseError, path, "cannot open file");
    return load(in);
}

const Registry& Registry::builtin()
{
    static const Registry registry = load(std::string_view(kBuiltinRegistryJson));
    return registry;
}

void Registry::compile()
{
    compiled_.clear();
    for (const auto& ep : endpoints_) {
        compiled_.push_back({ep.idp, std::regex(ep.pattern, std::regex::ECMAScript)});
    }
}

std::optional<IdpId> Registry::match_endpoint(std::string_view url) const
{
    const std::string subject(url);
    for (const auto& c : compiled_) {
        if (std::regex_match(subject, c.regex)) return c.idp;
    }
    return std::nullopt;
}

Permission Registry::describe(const IdpId& idp, std::string_view scope_token) const
{
    for (const auto& p : permissions_) {
        if (p.idp == idp && p.scope_token == scope_token) return p;
    }
    Permission p;
    p.idp = idp;
    p.scope_token = std::string(scope_token);
    p.description = "Unrecognized permission: " + std::string(scope_token);
    p.category = PermissionCategory::Extended;
    p.optional = false;
    p.unknown = true;
    return p;
}

std::optional<IdpId> Registry::sdk_idp_for_host(std::string_view host) const
{
    std::string lowered = text::to_lower(host);
    for (const auto& sh : sdk_hosts_) {
        if (host_matches(lowered, sh.host)) return sh.idp;
    }
    return std::nullopt;
}

std::size_t Registry::display_rank(const IdpId& idp) const
{
    auto it = std::find(display_order_.begin(), display_order_.end(), idp);
    return static_cast<std::size_t>(it - display_order_.begin());
}

IdpMatcher Registry::matcher() const
{
    return [this](std::string_view url) { return match_endpoint(url); };
}

Registry Registry::with_extra_endpoints(const std::vector<EndpointPattern>& extra) const
{
    Registry copy = *this;
    for (const auto& ep : extra) {
        try {
            std::regex check(ep.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw RegistryError(RegistryError::Kind::BadPattern, ep.pattern, e.what());
        }
        copy.endpoints_.push_back(ep);
    }
    copy.compile();
    return copy;
}

nlohmann::json Registry::to_json() const
{
    json doc = json::object();
    doc["display_order"] = json::array();
    for (const auto& idp : display_order_) doc["display_order"].push_back(idp.name());
    doc["endpoints"] = json::array();
    for (const auto& ep : endpoints_) {
        json e = {{"idp", ep.idp.name()}, {"pattern", ep.pattern}};
        if (ep.example) e["example"] = *ep.example;
        doc["endpoints"].push_back(std::move(e));
    }
    doc["sdk_hosts"] = json::array();
    for (const auto& sh : sdk_hosts_) doc["sdk_hosts"].push_back({{"idp", sh.idp.name()}, {"host", sh.host}});
    doc["permissions"] = json::array();
    for (const auto& p : permissions_) {
        json e = {{"idp", p.idp.name()},
                  {"scope", p.scope_token},
                  {"description", p.description},
                  {"category", std::string(to_string(p.category))},
                  {"optional", p.optional}};
        if (p.privacy_note) e["privacy_note"] = *p.privacy_note;
        doc["permissions"].push_back(std::move(e));
    }
    return doc;
}

Registry load_registry(std::istream& source)
{
    return Registry::load(source);
}

std::optional<IdpId> match_idp_endpoint(const Registry& registry, std::string_view url)
{
    return registry.match_endpoint(url);
}

Permission describe_scope(const Registry& registry, const IdpId& idp, std::string_view scope_token)
{
    return registry.describe(idp, scope_token);
}

}  // namespace speye
