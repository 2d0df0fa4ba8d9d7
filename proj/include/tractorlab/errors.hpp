#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tractorlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Division by a jet whose constant term vanishes. Boundary code relies on
// this to detect 1/rho factors, so it must never degrade to NaN.
class PoleError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class JetOrderError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    enum class Kind { Syntax, UnknownIdentifier, Arity };
    ParseError(Kind kind, std::size_t offset, const std::string& msg)
        : Error(msg + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}
    Kind kind() const { return kind_; }
    std::size_t offset() const { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Tractor metric or boundary Gram data too close to singular.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class CollisionError : public Error {
public:
    using Error::Error;
};

}  // namespace tractorlab
