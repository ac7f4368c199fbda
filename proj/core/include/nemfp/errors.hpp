#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nemfp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (bad parameters, empty lattices,
// mismatched grids, unsupported profile kinds).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A caller-side precondition was violated.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A coefficient evaluator returned a non-finite value.
class ModelEvaluationError : public Error {
public:
    using Error::Error;
};

// The PDE scheme left its admissible region (stability rule, positivity).
class SchemeFailure : public Error {
public:
    SchemeFailure(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// The implicit nonlinear solve did not reach its exit tolerance.
class IterationFailure : public Error {
public:
    IterationFailure(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// A stochastic integrator produced a non-finite state. `index` is the time
// step (sde) or the particle index (particles).
class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace nemfp
