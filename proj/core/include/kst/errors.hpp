#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kst {

/// Error categories used across the library. The first five map 1:1 onto
/// the wire error tokens; the rest are client/local conditions.
enum class Errc {
  bad_args,
  bad_mode,
  limit,
  unreachable,
  unknown_cmd,
  invalid_tag,
  non_finite,
  parse,
  connect_failed,
  version_mismatch,
  disconnected,
  timeout,
  protocol,
  io,
};

class KstError : public std::runtime_error {
 public:
  KstError(Errc code, std::string what) : std::runtime_error(std::move(what)), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Malformed wire input. `offset` is the byte position of the first
/// offending token in the input line.
class ParseError : public KstError {
 public:
  ParseError(std::size_t offset, std::string what)
      : KstError(Errc::parse, std::move(what)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Wire token for an error category (collapses local categories into BAD_ARGS).
std::string_view wire_error_code(Errc code);

/// Inverse of wire_error_code for the five wire tokens; throws ParseError otherwise.
Errc errc_from_wire(std::string_view token);

}  // namespace kst
