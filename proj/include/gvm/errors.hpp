#pragma once

#include <stdexcept>
#include <string>

namespace gvm {

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Series too short for the requested statistic.
struct TooShortSeries : std::length_error {
    using std::length_error::length_error;
};

/// Zero variance, constant |r|, or otherwise unusable input.
struct DegenerateSeries : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration file or flag value.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gvm
