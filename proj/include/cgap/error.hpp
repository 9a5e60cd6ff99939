#pragma once

#include <stdexcept>
#include <string>

namespace cgap {

// Internal/runtime failure (shape mismatch, non-finite value, ...). CLI exit 2.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input (malformed file, out-of-range config, ...). CLI exit 1.
struct validation_error : error {
    explicit validation_error(const std::string& what) : error(what) {}
};

}  // namespace cgap
