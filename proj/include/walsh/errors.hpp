#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace walsh {

// Precondition violated by the caller (bad argument shape/ordering).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input lies outside the mathematical domain of the operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A simulated value became non-finite.
struct NumericalBlowup : std::runtime_error {
    std::size_t step;
    explicit NumericalBlowup(std::size_t step_index)
        : std::runtime_error("non-finite value at step " + std::to_string(step_index)),
          step(step_index) {}
};

// The stochastic clock of a source path ran out before covering the target horizon.
struct ClockUnderrun : std::runtime_error {
    double required_factor;
    explicit ClockUnderrun(double factor)
        : std::runtime_error("stochastic clock exhausted; extend source horizon by factor >= " +
                             std::to_string(factor)),
          required_factor(factor) {}
};

// Not enough completed excursions (or samples) to form an estimate.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The mixed-measure experiment never approached its switch point.
struct SwitchNotReached : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace walsh
