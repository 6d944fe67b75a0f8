#pragma once

#include <stdexcept>
#include <string>

namespace sa_lab {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error("shape", w) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error("validation", w) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error("numeric", w) {}
};

}  // namespace sa_lab
