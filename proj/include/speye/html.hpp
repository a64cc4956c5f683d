#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

/// A tolerant HTML parser producing a read-only element tree. It tokenizes,
/// decodes character references, and repairs common mis-nesting; it does
/// not run scripts or apply the full HTML5 tree-construction algorithm.
namespace speye::html {

struct Attribute {
    std::string name;  // lowercased
    std::string value; // character references decoded
};

class Node {
public:
    enum class Kind { Document, Element, Text, Comment };

    Kind kind() const noexcept { return kind_; }
    bool is_element() const noexcept { return kind_ == Kind::Element; }
    bool is_element(std::string_view tag) const noexcept { return kind_ == Kind::Element && tag_ == tag; }

    /// Lowercased tag name; empty for non-elements.
    const std::string& tag() const noexcept { return tag_; }
    /// Character data of Text and Comment nodes (raw text for script/style children).
    const std::string& data() const noexcept { return data_; }

    const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
    const std::string* attr(std::string_view name) const;

    const Node* parent() const noexcept { return parent_; }
    const std::vector<std::unique_ptr<Node>>& children() const noexcept { return children_; }

    /// Concatenated direct Text children, the equivalent of XPath text().
    std::string own_text() const;
    /// All descendant text except script and style content.
    std::string text_content() const;

    /// Path such as "/html[1]/body[1]/div[2]" that identifies this element.
    std::string locator() const;

private:
    friend class Document;
    friend class TreeBuilder;

    Kind kind_ = Kind::Document;
    std::string tag_;
    std::string data_;
    std::vector<Attribute> attributes_;
    Node* parent_ = nullptr;
    std::vector<std::unique_ptr<Node>> children_;
};

class Document {
public:
    static Document parse(std::string_view html);

    Document(Document&&) noexcept = default;
    Document& operator=(Document&&) noexcept = default;

    const Node& root() const noexcept { return *root_; }

    /// Elements in document (pre-)order.
    std::vector<const Node*> elements() const;
    std::vector<const Node*> elements_by_tag(std::string_view tag) const;

    const Node* find_by_locator(std::string_view locator) const;

private:
    Document() = default;

    std::unique_ptr<Node> root_;
};

/// Decodes named and numeric character references.
std::string decode_entities(std::string_view s);

}  // namespace speye::html
