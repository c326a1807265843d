#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmrec {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// DSL source that does not conform to the grammar, or a semantic
/// violation found while building the model from it.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A feature, dimension, user or item name that is not known in context.
class UnknownName : public Error {
public:
    using Error::Error;
};

/// Inputs that are well-formed but violate an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input file or payload (CSV, JSON).
class DataError : public Error {
public:
    using Error::Error;
};

/// Background constraints handed to conflict detection or diagnosis that
/// are unsatisfiable on their own.
class InconsistentBackground : public Error {
public:
    using Error::Error;
};

}  // namespace fmrec
