#pragma once

#include <stdexcept>
#include <string>

namespace ef {

// Bad argument shapes: mismatched widths, unknown tags, invalid configs.
struct ParamError : std::invalid_argument {
    explicit ParamError(const std::string& what) : std::invalid_argument(what) {}
};

// Exact mode was requested but the instance is too large to enumerate.
// Callers are expected to retry with a sampling budget.
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

// An adversary emitted something outside the honest generator's support,
// or a transcript failed to replay.
struct ConsistencyError : std::runtime_error {
    explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-order or malformed protocol message; the session is dead.
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ef
