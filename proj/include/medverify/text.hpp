#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace medverify::text {

/// Canonical composition (NFC). Ill-formed UTF-8 sequences become U+FFFD.
std::string nfc(std::string_view utf8);

/// Locale-independent full lowercase mapping.
std::string lower(std::string_view utf8);

std::size_t codepoint_count(std::string_view utf8);

bool is_valid_utf8(std::string_view bytes);

/// NFC, lowercase, trimmed, inner whitespace runs collapsed to one space.
/// Used to match free-text profile claims against the alias table.
std::string normalize_claim(std::string_view utf8);

}  // namespace medverify::text
