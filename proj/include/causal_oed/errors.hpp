#pragma once

#include <stdexcept>
#include <string>

namespace causal_oed {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Edge set contains a directed cycle.
class CycleError : public Error {
public:
    using Error::Error;
};

/// Edge (v, v) encountered.
class SelfLoopError : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds a hard cap (enumeration, DP feasibility).
class LimitError : public Error {
public:
    using Error::Error;
};

/// No eligible candidate experiment remains.
class ExhaustedError : public Error {
public:
    using Error::Error;
};

/// Input file could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Parsed input violates a documented constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Two objects that must share a dimension do not.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Requested quantity has no defined value for this input.
class UndefinedError : public Error {
public:
    using Error::Error;
};

/// Fixture name not recognized.
class UnknownFixtureError : public Error {
public:
    using Error::Error;
};

}  // namespace causal_oed
