#pragma once

#include <stdexcept>
#include <string>

namespace sgsf {

// Bad user input: malformed config, violated parameter bounds, broken
// dataset layout. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failures while doing the work: unreadable files, numeric blowups,
// unloadable checkpoints. CLI maps this to exit code 2.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sgsf
