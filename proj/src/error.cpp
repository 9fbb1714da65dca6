#include "a2p/error.hpp"

#include <cstdio>

namespace a2p {

namespace {
std::string format_codepoint(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}
}  // namespace

UnmappedCodepoint::UnmappedCodepoint(char32_t codepoint, std::size_t position)
    : DataError("unmapped codepoint " + format_codepoint(codepoint) + " at position " +
                std::to_string(position)),
      codepoint_(codepoint),
      position_(position) {}

NonAsciiInput::NonAsciiInput(std::size_t position)
    : DataError("non-ASCII input at byte " + std::to_string(position)), position_(position) {}

LengthMismatch::LengthMismatch(std::size_t lhs, std::size_t rhs)
    : DataError("length mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t actual)
    : DataError("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}

}  // namespace a2p
