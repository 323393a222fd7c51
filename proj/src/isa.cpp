#include "meshfab/isa.hpp"

#include "meshfab/numfmt.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace meshfab {

namespace {

constexpr std::array<std::string_view, kOpcodeCount> kNames = {
    "PROG", "UPDATE", "A_ADD", "A_SUB", "A_MUL",
    "A_DIV", "A_ADDS", "A_SUBS", "A_MULS", "A_DIVS",
};

constexpr std::uint64_t kNibbleMask = 0xf;
constexpr std::uint64_t kAddrMask = 0xfff;
constexpr std::uint64_t kValueMask = 0xffffffff;

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view opcode_name(Opcode op) {
  return kNames[static_cast<std::size_t>(op)];
}

std::optional<Opcode> parse_opcode(std::string_view name) {
  const std::string u = upper(name);
  for (int i = 0; i < kOpcodeCount; ++i) {
    if (u == kNames[static_cast<std::size_t>(i)]) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

std::uint64_t encode(const MessageWord& m) {
  if (m.destination > kMaxSiteAddress) {
    throw EncodeError("destination address " + std::to_string(m.destination) +
                      " exceeds 12 bits");
  }
  if (m.next_destination > kMaxSiteAddress) {
    throw EncodeError("next destination address " +
                      std::to_string(m.next_destination) + " exceeds 12 bits");
  }
  const auto value_bits =
      static_cast<std::uint64_t>(std::bit_cast<std::uint32_t>(m.value));
  return static_cast<std::uint64_t>(m.opcode) |
         (static_cast<std::uint64_t>(m.destination) << 4) |
         (value_bits << 16) |
         (static_cast<std::uint64_t>(m.next_opcode) << 48) |
         (static_cast<std::uint64_t>(m.next_destination) << 52);
}

MessageWord decode(std::uint64_t word) {
  const auto op_code = static_cast<std::uint8_t>(word & kNibbleMask);
  const auto next_code = static_cast<std::uint8_t>((word >> 48) & kNibbleMask);
  if (!valid_opcode_code(op_code)) {
    throw DecodeError("invalid instruction code " + std::to_string(op_code) +
                      " in opcode field");
  }
  if (!valid_opcode_code(next_code)) {
    throw DecodeError("invalid instruction code " + std::to_string(next_code) +
                      " in next-opcode field");
  }
  MessageWord m;
  m.opcode = static_cast<Opcode>(op_code);
  m.destination = static_cast<std::uint16_t>((word >> 4) & kAddrMask);
  m.value = std::bit_cast<float>(static_cast<std::uint32_t>((word >> 16) & kValueMask));
  m.next_opcode = static_cast<Opcode>(next_code);
  m.next_destination = static_cast<std::uint16_t>((word >> 52) & kAddrMask);
  return m;
}

ApplyResult apply_instruction(Opcode op, float incoming, float stored) {
  ApplyResult r;
  float combined = 0.0f;
  switch (op) {
    case Opcode::Update:
      r.stored = incoming;
      return r;
    case Opcode::Add:
    case Opcode::AddS:
      combined = stored + incoming;
      break;
    case Opcode::Sub:
    case Opcode::SubS:
      combined = stored - incoming;
      break;
    case Opcode::Mul:
    case Opcode::MulS:
      combined = stored * incoming;
      break;
    case Opcode::Div:
    case Opcode::DivS:
      combined = stored / incoming;
      break;
    case Opcode::Prog:
      throw std::logic_error("Prog is handled by the site state machine");
  }
  r.nonfinite = !std::isfinite(combined);
  if (is_streaming(op)) {
    r.stored = stored;
    r.emitted = combined;
  } else {
    r.stored = combined;
  }
  return r;
}

std::string format_message(const MessageWord& m) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s dest=%u val=%s next=%s ndest=%u",
                std::string(opcode_name(m.opcode)).c_str(), m.destination,
                format_f32(m.value).c_str(),
                std::string(opcode_name(m.next_opcode)).c_str(),
                m.next_destination);
  return buf;
}

namespace {

std::string_view strip(std::string_view s) {
  const auto hash = s.find('#');
  if (hash != std::string_view::npos) s = s.substr(0, hash);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint16_t parse_addr(std::string_view text, std::string_view field) {
  unsigned long v = 0;
  const std::string tmp(text);
  char* end = nullptr;
  v = std::strtoul(tmp.c_str(), &end, 10);
  if (end == tmp.c_str() || *end != '\0') {
    throw DecodeError("bad " + std::string(field) + " value '" + tmp + "'");
  }
  if (v > kMaxSiteAddress) {
    throw DecodeError(std::string(field) + " address " + tmp + " exceeds 12 bits");
  }
  return static_cast<std::uint16_t>(v);
}

float parse_f32(std::string_view text, std::string_view field) {
  const std::string tmp(text);
  char* end = nullptr;
  const float v = std::strtof(tmp.c_str(), &end);
  if (end == tmp.c_str() || *end != '\0') {
    throw DecodeError("bad " + std::string(field) + " value '" + tmp + "'");
  }
  return v;
}

std::string_view expect_key(std::string_view tok, std::string_view key) {
  if (tok.size() <= key.size() + 1 || tok.substr(0, key.size()) != key ||
      tok[key.size()] != '=') {
    throw DecodeError("expected " + std::string(key) + "=<...>, got '" +
                      std::string(tok) + "'");
  }
  return tok.substr(key.size() + 1);
}

}  // namespace

MessageWord parse_message(std::string_view line) {
  const auto toks = split_ws(strip(line));
  if (toks.size() != 5) {
    throw DecodeError("message line needs 5 fields "
                      "(OPCODE dest=.. val=.. next=.. ndest=..)");
  }
  MessageWord m;
  const auto op = parse_opcode(toks[0]);
  if (!op) throw DecodeError("unknown opcode '" + std::string(toks[0]) + "'");
  m.opcode = *op;
  m.destination = parse_addr(expect_key(toks[1], "dest"), "dest");
  m.value = parse_f32(expect_key(toks[2], "val"), "val");
  const auto next = parse_opcode(expect_key(toks[3], "next"));
  if (!next) throw DecodeError("unknown opcode in next=");
  m.next_opcode = *next;
  m.next_destination = parse_addr(expect_key(toks[4], "ndest"), "ndest");
  return m;
}

std::string format_word_hex(std::uint64_t word) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(word));
  return buf;
}

std::uint64_t parse_word_hex(std::string_view text) {
  const auto s = strip(text);
  if (s.size() != 16) {
    throw DecodeError("hex word must be exactly 16 digits, got '" +
                      std::string(s) + "'");
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DecodeError("bad hex word '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace meshfab
