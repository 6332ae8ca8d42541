// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_UTIL_HPP
#define TRACENET_UTIL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace tracenet {

std::string sha256_hex(const std::string& data);

bool is_hex(const std::string& s);

// Decimal render without locale surprises.
std::string to_dec(int64_t v);

} // namespace tracenet

#endif // TRACENET_UTIL_HPP
