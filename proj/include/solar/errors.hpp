#pragma once

#include <stdexcept>
#include <string>

namespace solar {

/// Bad argument, shape mismatch or violated precondition. CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or parsed. CLI exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace solar
