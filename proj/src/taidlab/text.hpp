// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taidlab {

/// Shortest decimal that round-trips to the same double. "nan"/"inf" for
/// non-finite values.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);
std::optional<std::uint64_t> parse_uint(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// FNV-1a 64, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace taidlab
