#include "medverify/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace medverify::text {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || normalizer == nullptr) {
    throw std::runtime_error(std::string("ICU NFC normalizer unavailable: ") +
                             u_errorName(status));
  }
  return *normalizer;
}

std::string to_utf8(const icu::UnicodeString& value) {
  std::string out;
  value.toUTF8String(out);
  return out;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  const auto input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = nfc_instance().normalize(input, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  return to_utf8(normalized);
}

std::string lower(std::string_view utf8) {
  auto value = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  value.toLower(icu::Locale::getRoot());
  return to_utf8(value);
}

std::size_t codepoint_count(std::string_view utf8) {
  std::size_t count = 0;
  int32_t offset = 0;
  const auto length = static_cast<int32_t>(utf8.size());
  while (offset < length) {
    UChar32 c;
    U8_NEXT(utf8.data(), offset, length, c);
    ++count;
  }
  return count;
}

bool is_valid_utf8(std::string_view bytes) {
  int32_t offset = 0;
  const auto length = static_cast<int32_t>(bytes.size());
  while (offset < length) {
    UChar32 c;
    U8_NEXT(bytes.data(), offset, length, c);
    if (c < 0) return false;
  }
  return true;
}

std::string normalize_claim(std::string_view utf8) {
  const std::string folded = lower(nfc(utf8));
  const auto value = icu::UnicodeString::fromUTF8(folded);
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < value.length();) {
    const UChar32 c = value.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  return to_utf8(out);
}

}  // namespace medverify::text
