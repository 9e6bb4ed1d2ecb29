#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kst/errors.hpp"

namespace kst::protocol {

inline constexpr int kProtocolVersion = 1;

/// One request or report message. Encodes to a single LF-terminated ASCII
/// line: `seq SP tag [SP arg]* LF`. Angles are radians, positions mm,
/// forces N, moments N*m.
struct WireFrame {
  std::uint64_t seq = 0;
  std::string tag;
  std::vector<double> args;

  /// Field-exact equality; args compare bit-for-bit (distinguishes -0.0).
  bool operator==(const WireFrame& other) const;
};

enum class Status { ok, err };

/// Reply to one request: `seq SP OK [SP payload]* LF` or `seq SP ERR SP code LF`.
struct Response {
  std::uint64_t seq = 0;
  Status status = Status::ok;
  std::vector<double> payload;
  std::string err_code;  // one of the wire error tokens, set iff status == err

  bool operator==(const Response& other) const;
};

/// Canonical decimal rendering of a finite double: shortest text that parses
/// back to the same bits (std::to_chars). Throws KstError(non_finite) on
/// NaN/Inf.
std::string render_real(double value);

/// Strict inverse of render_real: the token must be the canonical rendering
/// of the value it denotes, otherwise ParseError. `offset` seeds error positions.
double parse_real(std::string_view token, std::size_t offset = 0);

bool valid_tag(std::string_view tag);

std::string encode_frame(const WireFrame& frame);
WireFrame decode_frame(std::string_view line);

std::string encode_response(const Response& response);
Response decode_response(std::string_view line);

/// True if the line's second token is OK or ERR (i.e. it parses as a
/// Response rather than a command/report frame).
bool is_response_line(std::string_view line);

}  // namespace kst::protocol
