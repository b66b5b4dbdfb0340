#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace maskfill::unicode {

/// Returns the byte offset of the first invalid UTF-8 sequence, or nullopt if
/// `text` is well-formed.
std::optional<std::size_t> find_invalid_utf8(std::string_view text);

inline bool is_valid_utf8(std::string_view text) { return !find_invalid_utf8(text); }

/// NFC-normalizes well-formed UTF-8. ASCII input is returned unchanged without
/// touching ICU.
std::string nfc(std::string_view text);

/// Unicode simple case folding (full folding for non-ASCII via ICU).
std::string fold_case(std::string_view text);

/// True if the first code point of `text` is an uppercase letter.
bool starts_uppercase(std::string_view text);

}  // namespace maskfill::unicode
