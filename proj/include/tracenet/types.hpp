// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_TYPES_HPP
#define TRACENET_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tracenet {

using Height = int64_t;
using Amount = int64_t;

enum class Actor : uint8_t { Int = 0, Ext = 1 };

inline Actor other(Actor a) { return a == Actor::Int ? Actor::Ext : Actor::Int; }

inline const char* actor_name(Actor a) { return a == Actor::Int ? "int" : "ext"; }

inline Actor actor_from_name(const std::string& s) {
    if (s == "int") return Actor::Int;
    if (s == "ext") return Actor::Ext;
    throw std::runtime_error("unknown actor '" + s + "' (expected 'int' or 'ext')");
}

// Malformed model input (parse errors, schema violations, unresolved refs).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exploration exceeded its configured state budget.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tracenet

#endif // TRACENET_TYPES_HPP
