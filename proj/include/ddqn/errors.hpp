#pragma once

#include <stdexcept>
#include <string>

namespace ddqn {

// Invalid architecture, hyper-parameter or config file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor or vector dimensions that do not line up.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure during optimisation (non-finite loss, gradient or output).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An API precondition was violated by the caller.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Analysis could not be carried out on the given run data.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reading or writing an on-disk artifact failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ddqn
