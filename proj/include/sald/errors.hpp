#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sald {

// Argument outside the domain of a time-indexed quantity (tau > T, s > S, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid configuration: bad grid, bad sampler/estimator settings, bad config file.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical quantity became non-finite (guide value, probe reward).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A sampler produced a non-finite particle. Carries the step and particle id.
class SamplerAbort : public std::runtime_error {
public:
    SamplerAbort(std::uint64_t step, std::uint64_t particle)
        : std::runtime_error("non-finite particle " + std::to_string(particle) + " at step " +
                             std::to_string(step)),
          step_(step),
          particle_(particle) {}

    std::uint64_t step() const { return step_; }
    std::uint64_t particle() const { return particle_; }

private:
    std::uint64_t step_;
    std::uint64_t particle_;
};

}  // namespace sald
