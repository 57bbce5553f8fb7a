#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oneat {

enum class ErrorKind {
    InvalidDimension,
    IncompatibleGenome,
    CorruptGenome,
    InvalidInput,
    InvalidRecord,
    NoData,
    EmptyWindow,
    Parse,
    Config,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures surface as this exception; kind() lets callers and
// tests distinguish the contract that was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace oneat
