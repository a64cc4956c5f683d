#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace speye {

/// An identity provider. Facebook, Google and Apple are built in; anything
/// else is carried by name.
class IdpId {
public:
    enum class Kind { Facebook, Google, Apple, Other };

    static IdpId facebook() { return IdpId(Kind::Facebook, "facebook"); }
    static IdpId google() { return IdpId(Kind::Google, "google"); }
    static IdpId apple() { return IdpId(Kind::Apple, "apple"); }

    /// Case-insensitive; unknown names become Other with the lowercased name.
    /// Returns nullopt for an empty name.
    static std::optional<IdpId> from_name(std::string_view name);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

    /// "Facebook", "Google", "Apple", or the raw name for Other.
    std::string display_name() const;

    friend bool operator==(const IdpId& a, const IdpId& b) { return a.name_ == b.name_; }
    friend auto operator<=>(const IdpId& a, const IdpId& b) { return a.name_ <=> b.name_; }

private:
    IdpId(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
};

}  // namespace speye
