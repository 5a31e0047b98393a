#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cogtrace {

enum class ErrorCode {
    invalid_argument,
    io_error,
    not_found,
    parse_error,
    out_of_order_event,
    stale_observation,
    no_observation,
    provider_unavailable,
    session_already_active,
    session_not_active,
    missing_description,
    library_exhausted,
    aspect_ratio_mismatch,
    client_error,
    planner_malformed,
    env_error,
    address_in_use,
    store_unavailable,
};

/// Stable identifier used in CLI error lines and HTTP error bodies.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed action text. `position` is a byte offset into the parsed line.
class ParseError : public Error {
public:
    ParseError(std::size_t position, std::string expected, const std::string& input);

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

}  // namespace cogtrace
