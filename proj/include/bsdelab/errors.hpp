#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. Carries the byte offset of the offending token
/// and the set of tokens the parser would have accepted there.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position,
               std::vector<std::string> expected = {});

    std::size_t position() const noexcept { return position_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::vector<std::string> expected_;
};

/// An expression was evaluated outside its natural domain (ln of a
/// non-positive value, sqrt of a negative, overflow, ...).
class DomainError : public Error {
public:
    DomainError(const std::string& message, std::string subexpression);

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

/// Precondition violated by caller-supplied arguments.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Backward ODE left the admissible range (|value| above the blow-up
/// threshold) before reaching t = 0.
class BlowUpError : public Error {
public:
    BlowUpError(double time, double value);

    double time() const noexcept { return time_; }
    double value() const noexcept { return value_; }

private:
    double time_;
    double value_;
};

/// Numerical procedure failed to produce an admissible result.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace bsde
