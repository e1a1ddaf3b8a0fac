#pragma once

#include <stdexcept>
#include <string>

namespace tsgan {

// Dimension or layout disagreement between tensors, caches or files.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A NaN/Inf showed up where the math requires finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed a value outside the documented domain.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace tsgan
