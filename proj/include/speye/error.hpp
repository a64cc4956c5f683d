#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace speye {

/// Base class of every error raised by the scanner libraries.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input could not be parsed as an absolute http(s) URL.
class MalformedUrl : public Error {
public:
    explicit MalformedUrl(const std::string& what) : Error("malformed URL: " + what) {}
};

/// An opt-out set names scope tokens that the target request does not carry.
class OptOutNotPresent : public Error {
public:
    explicit OptOutNotPresent(std::vector<std::string> missing);

    const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

/// Focused mode was asked to inspect a URL no endpoint pattern matches.
class NotAnIdpUrl : public Error {
public:
    explicit NotAnIdpUrl(const std::string& url) : Error("not an identity provider URL: " + url) {}
};

/// The relying-party page could not be retrieved (or was not HTML).
class PageFetchError : public Error {
public:
    using Error::Error;
};

/// Content handed to the page scanner is not an HTML document.
class UnsupportedContentType : public PageFetchError {
public:
    explicit UnsupportedContentType(const std::string& type)
        : PageFetchError("unsupported content type: " + type) {}
};

/// The fixture server could not bind its listening socket.
class BindError : public Error {
public:
    using Error::Error;
};

}  // namespace speye
