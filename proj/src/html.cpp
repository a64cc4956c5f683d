#include "speye/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "speye/text.hpp"

namespace speye::html {
namespace {

constexpr std::array<std::string_view, 14> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 10> kScopeBoundaries = {
    "applet", "button", "caption", "html", "marquee", "object", "table", "td", "template", "th"};

constexpr std::array<std::string_view, 30> kClosesParagraph = {
    "address", "article", "aside", "blockquote", "details", "dialog", "div", "dl", "fieldset", "figcaption",
    "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
    "hgroup", "hr", "main", "menu", "nav", "ol", "p", "section", "table", "ul"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view value)
{
    return std::find(set.begin(), set.end(), value) != set.end();
}

struct NamedEntity {
    std::string_view name;
    std::string_view utf8;
};

constexpr std::array<NamedEntity, 24> kEntities = {{
    {"amp", "&"},           {"lt", "<"},            {"gt", ">"},           {"quot", "\""},
    {"apos", "'"},          {"nbsp", "\xC2\xA0"},   {"copy", "\xC2\xA9"},  {"reg", "\xC2\xAE"},
    {"trade", "\xE2\x84\xA2"}, {"hellip", "\xE2\x80\xA6"}, {"mdash", "\xE2\x80\x94"}, {"ndash", "\xE2\x80\x93"},
    {"laquo", "\xC2\xAB"},  {"raquo", "\xC2\xBB"},  {"lsquo", "\xE2\x80\x98"}, {"rsquo", "\xE2\x80\x99"},
    {"ldquo", "\xE2\x80\x9C"}, {"rdquo", "\xE2\x80\x9D"}, {"middot", "\xC2\xB7"}, {"bull", "\xE2\x80\xA2"},
    {"times", "\xC3\x97"},  {"euro", "\xE2\x82\xAC"}, {"rarr", "\xE2\x86\x92"}, {"larr", "\xE2\x86\x90"},
}};

// References recognized without a trailing semicolon.
constexpr std::array<std::string_view, 4> kLegacyEntities = {"amp", "lt", "gt", "quot"};

void append_utf8(std::string& out, unsigned long cp)
{
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

}  // namespace

std::string decode_entities(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i + 1;
        if (j < s.size() && s[j] == '#') {
            ++j;
            bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
            if (hex) ++j;
            std::size_t digits_start = j;
            while (j < s.size() && (hex ? std::isxdigit(static_cast<unsigned char>(s[j]))
                                        : std::isdigit(static_cast<unsigned char>(s[j])))) {
                ++j;
            }
            if (j > digits_start && j - digits_start <= 8) {
                unsigned long cp = std::stoul(std::string(s.substr(digits_start, j - digits_start)), nullptr,
                                              hex ? 16 : 10);
                append_utf8(out, cp);
                if (j < s.size() && s[j] == ';') ++j;
                i = j;
                continue;
            }
            out.push_back(s[i++]);
            continue;
        }
        while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
        std::string_view name = s.substr(i + 1, j - i - 1);
        bool semicolon = j < s.size() && s[j] == ';';
        const NamedEntity* hit = nullptr;
        for (const auto& e : kEntities) {
            if (e.name == name) hit = &e;
        }
        bool accept = hit != nullptr &&
                      (semicolon || (contains(kLegacyEntities, name) && (j >= s.size() || s[j] != '=')));
        if (!accept) {
            out.push_back(s[i++]);
            continue;
        }
        out += hit->utf8;
        i = semicolon ? j + 1 : j;
    }
    return out;
}

const std::string* Node::attr(std::string_view name) const
{
    for (const auto& a : attributes_) {
        if (a.name == name) return &a.value;
    }
    return nullptr;
}

std::string Node::own_text() const
{
    std::string out;
    for (const auto& child : children_) {
        if (child->kind_ == Kind::Text) out += child->data_;
    }
    return out;
}

std::string Node::text_content() const
{
    std::string out;
    for (const auto& child : children_) {
        if (child->kind_ == Kind::Text) {
            out += child->data_;
        } else if (child->kind_ == Kind::Element && child->tag_ != "script" && child->tag_ != "style") {
            out += child->text_content();
        }
    }
    return out;
}

std::string Node::locator() const
{
    if (kind_ != Kind::Element) return parent_ ? parent_->locator() : "";
    std::vector<std::string> parts;
    for (const Node* n = this; n && n->kind_ == Kind::Element; n = n->parent_) {
        std::size_t index = 1;
        if (n->parent_) {
            for (const auto& sibling : n->parent_->children_) {
                if (sibling.get() == n) break;
                if (sibling->kind_ == Kind::Element && sibling->tag_ == n->tag_) ++index;
            }
        }
        parts.push_back(n->tag_ + "[" + std::to_string(index) + "]");
    }
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += "/" + *it;
    return out;
}

class TreeBuilder {
public:
    explicit TreeBuilder(std::string_view src) : src_(src)
    {
        root_ = std::make_unique<Node>();
        root_->kind_ = Node::Kind::Document;
        stack_.push_back(root_.get());
    }

    std::unique_ptr<Node> build()
    {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<' && markup()) continue;
            std::size_t next = src_.find('<', pos_ + 1);
            if (next == std::string_view::npos) next = src_.size();
            add_text(decode_entities(src_.substr(pos_, next - pos_)));
            pos_ = next;
        }
        return std::move(root_);
    }

private:
    Node* current() { return stack_.back(); }

    void add_text(std::string data)
    {
        if (data.empty()) return;
        Node* parent = current();
        if (!parent->children_.empty() && parent->children_.back()->kind_ == Node::Kind::Text) {
            parent->children_.back()->data_ += data;
            return;
        }
        auto node = std::make_unique<Node>();
        node->kind_ = Node::Kind::Text;
        node->data_ = std::move(data);
        node->parent_ = parent;
        parent->children_.push_back(std::move(node));
    }

    void add_comment(std::string data)
    {
        auto node = std::make_unique<Node>();
        node->kind_ = Node::Kind::Comment;
        node->data_ = std::move(data);
        node->parent_ = current();
        current()->children_.push_back(std::move(node));
    }

    // Returns false when '<' does not start markup and should be read as text.
    bool markup()
    {
        std::string_view rest = src_.substr(pos_);
        if (rest.starts_with("<!--")) {
            std::size_t end = src_.find("-->", pos_ + 4);
            if (end == std::string_view::npos) {
                add_comment(std::string(src_.substr(pos_ + 4)));
                pos_ = src_.size();
            } else {
                add_comment(std::string(src_.substr(pos_ + 4, end - pos_ - 4)));
                pos_ = end + 3;
            }
            return true;
        }
        if (rest.starts_with("<!") || rest.starts_with("<?")) {
            std::size_t end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return true;
        }
        if (rest.size() >= 3 && rest[1] == '/' && std::isalpha(static_cast<unsigned char>(rest[2]))) {
            std::size_t i = pos_ + 2;
            std::size_t name_start = i;
            while (i < src_.size() && !is_space(src_[i]) && src_[i] != '/' && src_[i] != '>') ++i;
            std::string name = text::to_lower(src_.substr(name_start, i - name_start));
            std::size_t end = src_.find('>', i);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            end_tag(name);
            return true;
        }
        if (rest.size() >= 2 && std::isalpha(static_cast<unsigned char>(rest[1]))) {
            start_tag();
            return true;
        }
        return false;
    }

    void start_tag()
    {
        std::size_t i = pos_ + 1;
        std::size_t name_start = i;
        while (i < src_.size() && !is_space(src_[i]) && src_[i] != '/' && src_[i] != '>') ++i;
        auto node = std::make_unique<Node>();
        node->kind_ = Node::Kind::Element;
        node->tag_ = text::to_lower(src_.substr(name_start, i - name_start));

        bool self_closing = false;
        for (;;) {
            while (i < src_.size() && (is_space(src_[i]) || src_[i] == '/')) {
                if (src_[i] == '/' && i + 1 < src_.size() && src_[i + 1] == '>') self_closing = true;
                ++i;
            }
            if (i >= src_.size()) break;
            if (src_[i] == '>') {
                ++i;
                break;
            }
            std::size_t attr_start = i;
            ++i;  // the first character may be anything, including '='
            while (i < src_.size() && !is_space(src_[i]) && src_[i] != '/' && src_[i] != '>' && src_[i] != '=') ++i;
            Attribute attr{text::to_lower(src_.substr(attr_start, i - attr_start)), {}};
            std::size_t j = i;
            while (j < src_.size() && is_space(src_[j])) ++j;
            if (j < src_.size() && src_[j] == '=') {
                i = j + 1;
                while (i < src_.size() && is_space(src_[i])) ++i;
                if (i < src_.size() && (src_[i] == '"' || src_[i] == '\'')) {
                    char quote = src_[i];
                    std::size_t close = src_.find(quote, i + 1);
                    if (close == std::string_view::npos) close = src_.size();
                    attr.value = decode_entities(src_.substr(i + 1, close - i - 1));
                    i = std::min(close + 1, src_.size());
                } else {
                    std::size_t vstart = i;
                    while (i < src_.size() && !is_space(src_[i]) && src_[i] != '>') ++i;
                    attr.value = decode_entities(src_.substr(vstart, i - vstart));
                }
            }
            if (node->attr(attr.name) == nullptr) node->attributes_.push_back(std::move(attr));
        }
        pos_ = i;
        insert_element(std::move(node), self_closing);
    }

    void insert_element(std::unique_ptr<Node> node, bool self_closing)
    {
        const std::string tag = node->tag_;
        if (contains(kClosesParagraph, tag)) close_in_scope("p", {});
        if (tag == "li") close_in_scope("li", {"ul", "ol"});
        if (tag == "dt" || tag == "dd") {
            close_in_scope("dt", {"dl"});
            close_in_scope("dd", {"dl"});
        }
        if (tag == "option" || tag == "optgroup") {
            if (current()->tag_ == "option") stack_.pop_back();
        }
        if (tag == "tr") {
            close_in_scope("td", {"tr", "tbody", "thead", "tfoot"});
            close_in_scope("th", {"tr", "tbody", "thead", "tfoot"});
            close_in_scope("tr", {"tbody", "thead", "tfoot"});
        }
        if (tag == "td" || tag == "th") {
            close_in_scope("td", {"tr"});
            close_in_scope("th", {"tr"});
        }

        Node* raw = node.get();
        node->parent_ = current();
        current()->children_.push_back(std::move(node));
        if (contains(kVoidElements, tag) || self_closing) return;

        if (tag == "script" || tag == "style" || tag == "textarea" || tag == "title") {
            std::size_t end = find_end_tag(tag);
            std::string_view body = src_.substr(pos_, end - pos_);
            if (!body.empty()) {
                auto text_node = std::make_unique<Node>();
                text_node->kind_ = Node::Kind::Text;
                bool raw_text = tag == "script" || tag == "style";
                text_node->data_ = raw_text ? std::string(body) : decode_entities(body);
                text_node->parent_ = raw;
                raw->children_.push_back(std::move(text_node));
            }
            pos_ = end;
            if (pos_ < src_.size()) {
                std::size_t close = src_.find('>', pos_);
                pos_ = close == std::string_view::npos ? src_.size() : close + 1;
            }
            return;
        }
        stack_.push_back(raw);
    }

    std::size_t find_end_tag(std::string_view tag) const
    {
        std::size_t i = pos_;
        for (;;) {
            i = src_.find("</", i);
            if (i == std::string_view::npos) return src_.size();
            std::string_view candidate = src_.substr(i + 2, tag.size());
            std::size_t after = i + 2 + tag.size();
            if (text::iequals(candidate, tag) &&
                (after >= src_.size() || is_space(src_[after]) || src_[after] == '>' || src_[after] == '/')) {
                return i;
            }
            i += 2;
        }
    }

    void close_in_scope(std::string_view tag, std::initializer_list<std::string_view> boundaries)
    {
        for (std::size_t k = stack_.size(); k-- > 1;) {
            const std::string& open = stack_[k]->tag_;
            if (open == tag) {
                stack_.resize(k);
                return;
            }
            if (contains(kScopeBoundaries, open) ||
                std::find(boundaries.begin(), boundaries.end(), open) != boundaries.end()) {
                return;
            }
        }
    }

    void end_tag(const std::string& name)
    {
        for (std::size_t k = stack_.size(); k-- > 1;) {
            if (stack_[k]->tag_ == name) {
                stack_.resize(k);
                return;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::unique_ptr<Node> root_;
    std::vector<Node*> stack_;
};

Document Document::parse(std::string_view source)
{
    if (source.starts_with("\xEF\xBB\xBF")) source.remove_prefix(3);
    Document doc;
    doc.root_ = TreeBuilder(source).build();
    return doc;
}

std::vector<const Node*> Document::elements() const
{
    std::vector<const Node*> out;
    std::vector<const Node*> pending = {root_.get()};
    while (!pending.empty()) {
        const Node* n = pending.back();
        pending.pop_back();
        if (n->is_element()) out.push_back(n);
        for (auto it = n->children().rbegin(); it != n->children().rend(); ++it) {
            if ((*it)->is_element()) pending.push_back(it->get());
        }
    }
    return out;
}

std::vector<const Node*> Document::elements_by_tag(std::string_view tag) const
{
    std::vector<const Node*> out;
    for (const Node* n : elements()) {
        if (n->tag() == tag) out.push_back(n);
    }
    return out;
}

const Node* Document::find_by_locator(std::string_view locator) const
{
    const Node* node = root_.get();
    if (locator.empty() || locator.front() != '/') return nullptr;
    for (const auto& segment : text::split(locator.substr(1), '/')) {
        auto open = segment.find('[');
        if (open == std::string::npos || segment.back() != ']') return nullptr;
        std::string tag = segment.substr(0, open);
        std::size_t wanted = 0;
        try {
            wanted = std::stoul(segment.substr(open + 1, segment.size() - open - 2));
        } catch (const std::exception&) {
            return nullptr;
        }
        const Node* next = nullptr;
        std::size_t seen = 0;
        for (const auto& child : node->children()) {
            if (child->is_element(tag) && ++seen == wanted) {
                next = child.get();
                break;
            }
        }
        if (next == nullptr) return nullptr;
        node = next;
    }
    return node == root_.get() ? nullptr : node;
}

}  // namespace speye::html
