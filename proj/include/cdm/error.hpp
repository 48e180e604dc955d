#pragma once

#include <stdexcept>
#include <string>

namespace cdm {

// Malformed input: bad documents, dimension mismatches, violated preconditions.
// The CLI maps these to exit status 2 and the service to HTTP 400.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Well-formed input on which the math itself fails (rank deficiency, pole at origin, ...).
// Exit status 1, HTTP 422.
class ComputationError : public std::runtime_error {
public:
    explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cdm
