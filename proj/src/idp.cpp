#include "speye/idp.hpp"

#include "speye/text.hpp"

namespace speye {

std::optional<IdpId> IdpId::from_name(std::string_view name)
{
    std::string lowered = text::to_lower(text::trim(name));
    if (lowered.empty()) {
        return std::nullopt;
    }
    if (lowered == "facebook") return facebook();
    if (lowered == "google") return google();
    if (lowered == "apple") return apple();
    return IdpId(Kind::Other, std::move(lowered));
}

std::string IdpId::display_name() const
{
    switch (kind_) {
    case Kind::Facebook: return "Facebook";
    case Kind::Google: return "Google";
    case Kind::Apple: return "Apple";
    case Kind::Other: break;
    }
    return name_;
}

}  // namespace speye
