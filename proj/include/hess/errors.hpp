#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hess {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: cycle files, config files, rule files, monomer tables.
// The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A plant model could not continue (depleted pack, unavailable bank).
// The CLI maps these to exit code 1.
class SimulationError : public Error {
public:
    using Error::Error;
};

class DepletedPackError : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class SupercapUnavailableError : public SimulationError {
public:
    using SimulationError::SimulationError;
};

// Violated preconditions on numeric routines (length mismatch, bad order).
class ContractError : public Error {
public:
    using Error::Error;
};

// Non-fatal conditions collected while stepping models (stability, calibration range).
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline void warn(Diagnostics* diag, std::string msg) {
    if (diag != nullptr) {
        diag->warn(std::move(msg));
    }
}

} // namespace hess
