#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape violations: mismatched dimensions between operands.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Caller broke a contract: empty input, underfull buffer, infeasible plan.
class UsageError : public Error {
public:
    using Error::Error;
};

// A config or domain value failed its invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// File ingestion failed (parse errors name row/column).
class IngestionError : public Error {
public:
    using Error::Error;
};

// Filesystem write/read failures (messages carry the path).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace fedsim
