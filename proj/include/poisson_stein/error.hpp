#pragma once

#include <stdexcept>
#include <string>

namespace pstein {

// Library failures carry a stable label that the CLI forwards in its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string label, const std::string& message)
        : std::runtime_error(message), label_(std::move(label)) {}
    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

namespace errc {
inline constexpr const char* invalid_index = "invalid-index";
inline constexpr const char* space_mismatch = "space-mismatch";
inline constexpr const char* argument = "argument";
inline constexpr const char* unsupported_order = "unsupported-order";
inline constexpr const char* contract_violation = "contract-violation";
inline constexpr const char* not_centered = "not-centered";
inline constexpr const char* insufficient_samples = "insufficient-samples";
inline constexpr const char* domain = "domain";
inline constexpr const char* accuracy = "accuracy";
inline constexpr const char* resolution = "resolution";
inline constexpr const char* parse = "parse";
inline constexpr const char* io = "io";
}  // namespace errc

[[noreturn]] inline void fail(const char* label, const std::string& message) {
    throw Error(label, message);
}

}  // namespace pstein
