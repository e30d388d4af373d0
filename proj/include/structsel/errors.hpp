#pragma once

#include <stdexcept>
#include <string>

namespace structsel {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapExceeded : public Error {
public:
    using Error::Error;
};

class RegistryMismatch : public Error {
public:
    using Error::Error;
};

class UnknownVariable : public Error {
public:
    using Error::Error;
};

class CountOutOfRange : public Error {
public:
    using Error::Error;
};

class UnsupportedRuleShape : public Error {
public:
    using Error::Error;
};

class OverlapError : public Error {
public:
    using Error::Error;
};

class InvalidGamma : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateFold : public Error {
public:
    using Error::Error;
};

class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

// Parse diagnostics carry 1-based line/column of the offending token.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, int line, int column)
        : Error("line " + std::to_string(line) + ", col " + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace structsel
