#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tkeig {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Index out of bounds, inconsistent array sizes, truncated payloads.
class StructuralError : public Error {
public:
    using Error::Error;
};

class InvalidPartitionError : public Error {
public:
    using Error::Error;
};

class InvalidConfigError : public Error {
public:
    using Error::Error;
};

// A precondition the caller was responsible for (symmetry, matching shapes).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace tkeig
