#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridfno {

enum class Errc {
    invalid_argument,
    shape_mismatch,
    numerical_blowup,
    no_equilibrium,
    insufficient_horizon,
    schema_mismatch,
    truncated_payload,
    checksum_mismatch,
    io_failure,
    degenerate_target,
    non_real_inverse,
    training_diverged,
    config,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

} // namespace gridfno
