#include "kst/protocol/frame.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

namespace kst {

std::string_view wire_error_code(Errc code) {
  switch (code) {
    case Errc::bad_mode:
      return "BAD_MODE";
    case Errc::limit:
      return "LIMIT";
    case Errc::unreachable:
      return "UNREACHABLE";
    case Errc::unknown_cmd:
      return "UNKNOWN_CMD";
    default:
      return "BAD_ARGS";
  }
}

Errc errc_from_wire(std::string_view token) {
  if (token == "BAD_ARGS") return Errc::bad_args;
  if (token == "BAD_MODE") return Errc::bad_mode;
  if (token == "LIMIT") return Errc::limit;
  if (token == "UNREACHABLE") return Errc::unreachable;
  if (token == "UNKNOWN_CMD") return Errc::unknown_cmd;
  throw ParseError(0, "unknown error code token: " + std::string(token));
}

}  // namespace kst

namespace kst::protocol {

namespace {

constexpr std::size_t kMaxTagLength = 64;
constexpr std::size_t kMaxLineLength = 1 << 20;

bool tag_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

/// Splits a LF-terminated line into space-separated tokens with their byte
/// offsets. Rejects empty tokens (leading/trailing/double spaces) and
/// missing LF so that re-encoding a decoded message reproduces the input.
struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view line) {
  if (line.size() > kMaxLineLength) throw ParseError(kMaxLineLength, "line exceeds maximum length");
  if (line.empty() || line.back() != '\n') throw ParseError(line.size(), "missing LF terminator");
  std::string_view body = line.substr(0, line.size() - 1);
  if (body.find('\n') != std::string_view::npos)
    throw ParseError(body.find('\n'), "embedded LF inside frame");

  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (true) {
    std::size_t sp = body.find(' ', pos);
    std::string_view tok = body.substr(pos, sp == std::string_view::npos ? sp : sp - pos);
    if (tok.empty()) throw ParseError(pos, "empty token (stray or repeated separator)");
    tokens.push_back({tok, pos});
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
    if (pos >= body.size()) throw ParseError(pos, "trailing separator");
  }
  return tokens;
}

std::uint64_t parse_seq(const Token& tok) {
  std::uint64_t value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(tok.offset, "malformed sequence counter");
  // canonical: no leading zeros, no sign
  if (tok.text.size() > 1 && tok.text.front() == '0')
    throw ParseError(tok.offset, "non-canonical sequence counter");
  return value;
}

std::string_view parse_tag(const Token& tok) {
  if (tok.text.size() > kMaxTagLength) throw ParseError(tok.offset, "tag longer than 64 chars");
  for (char c : tok.text)
    if (!tag_char(c)) throw ParseError(tok.offset, "tag contains invalid character");
  return tok.text;
}

void append_real(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

}  // namespace

bool WireFrame::operator==(const WireFrame& other) const {
  if (seq != other.seq || tag != other.tag || args.size() != other.args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (bits(args[i]) != bits(other.args[i])) return false;
  return true;
}

bool Response::operator==(const Response& other) const {
  if (seq != other.seq || status != other.status || err_code != other.err_code ||
      payload.size() != other.payload.size())
    return false;
  for (std::size_t i = 0; i < payload.size(); ++i)
    if (bits(payload[i]) != bits(other.payload[i])) return false;
  return true;
}

std::string render_real(double value) {
  if (!std::isfinite(value)) throw KstError(Errc::non_finite, "non-finite value in frame");
  std::string out;
  append_real(out, value);
  return out;
}

double parse_real(std::string_view token, std::size_t offset) {
  double value = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ParseError(offset, "malformed numeric argument");
  // Only the canonical rendering is accepted; guarantees that re-encoding a
  // decoded frame reproduces the input byte for byte.
  char buf[32];
  auto [end, ec2] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec2;
  if (std::string_view(buf, end - buf) != token)
    throw ParseError(offset, "non-canonical numeric argument");
  return value;
}

bool valid_tag(std::string_view tag) {
  if (tag.empty() || tag.size() > kMaxTagLength) return false;
  for (char c : tag)
    if (!tag_char(c)) return false;
  return true;
}

std::string encode_frame(const WireFrame& frame) {
  if (!valid_tag(frame.tag)) throw KstError(Errc::invalid_tag, "invalid command tag: " + frame.tag);
  std::string out;
  out.reserve(16 + frame.tag.size() + 20 * frame.args.size());
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, frame.seq);
  (void)ec;
  out.append(buf, ptr);
  out.push_back(' ');
  out.append(frame.tag);
  for (double a : frame.args) {
    if (!std::isfinite(a)) throw KstError(Errc::non_finite, "non-finite argument in frame");
    out.push_back(' ');
    append_real(out, a);
  }
  out.push_back('\n');
  return out;
}

WireFrame decode_frame(std::string_view line) {
  auto tokens = tokenize(line);
  if (tokens.size() < 2) throw ParseError(tokens.empty() ? 0 : tokens[0].offset, "frame needs seq and tag");
  WireFrame frame;
  frame.seq = parse_seq(tokens[0]);
  frame.tag = std::string(parse_tag(tokens[1]));
  frame.args.reserve(tokens.size() - 2);
  for (std::size_t i = 2; i < tokens.size(); ++i)
    frame.args.push_back(parse_real(tokens[i].text, tokens[i].offset));
  return frame;
}

std::string encode_response(const Response& response) {
  std::string out;
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, response.seq);
  (void)ec;
  out.append(buf, ptr);
  if (response.status == Status::ok) {
    out.append(" OK");
    for (double v : response.payload) {
      if (!std::isfinite(v)) throw KstError(Errc::non_finite, "non-finite payload value");
      out.push_back(' ');
      append_real(out, v);
    }
  } else {
    if (response.err_code.empty() || !valid_tag(response.err_code))
      throw KstError(Errc::bad_args, "response error code missing or invalid");
    out.append(" ERR ");
    out.append(response.err_code);
  }
  out.push_back('\n');
  return out;
}

Response decode_response(std::string_view line) {
  auto tokens = tokenize(line);
  if (tokens.size() < 2) throw ParseError(0, "response needs seq and status");
  Response r;
  r.seq = parse_seq(tokens[0]);
  if (tokens[1].text == "OK") {
    r.status = Status::ok;
    for (std::size_t i = 2; i < tokens.size(); ++i)
      r.payload.push_back(parse_real(tokens[i].text, tokens[i].offset));
  } else if (tokens[1].text == "ERR") {
    r.status = Status::err;
    if (tokens.size() != 3) throw ParseError(tokens[1].offset, "ERR response carries exactly one code");
    errc_from_wire(tokens[2].text);  // validates the token
    r.err_code = std::string(tokens[2].text);
  } else {
    throw ParseError(tokens[1].offset, "status token must be OK or ERR");
  }
  return r;
}

bool is_response_line(std::string_view line) {
  std::size_t first_sp = line.find(' ');
  if (first_sp == std::string_view::npos) return false;
  std::string_view rest = line.substr(first_sp + 1);
  return rest.starts_with("OK\n") || rest.starts_with("OK ") || rest.starts_with("ERR ");
}

}  // namespace kst::protocol
