#pragma once

#include <stdexcept>
#include <string>

namespace cascadelab {

// Invalid user-supplied parameters or configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A generator could not realize the requested graph.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A quantity is undefined for the given input (e.g. a degree distribution of an edgeless graph).
class UndefinedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Iterative solver or integrator failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cascadelab
