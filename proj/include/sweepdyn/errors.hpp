#pragma once

#include <stdexcept>
#include <string>

namespace sweepdyn {

/// Machine-readable failure categories used across the library.
enum class Errc {
    invalid_config,
    out_of_schedule,
    singular_carrying_capacity,
    non_finite_state,
    step_underflow,
    step_budget_exceeded,
    no_interior_equilibrium,
    insufficient_oscillations,
    window_out_of_range,
};

[[nodiscard]] const char* to_string(Errc code) noexcept;

/// Exception carrying an Errc alongside the human-readable message.
class SimError : public std::runtime_error {
public:
    SimError(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw SimError(code, message);
}

} // namespace sweepdyn
