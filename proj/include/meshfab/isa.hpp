#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace meshfab {

// The ten fabric instructions. Numeric codes are frozen: they are the 4-bit
// opcode values carried in every message word.
enum class Opcode : std::uint8_t {
  Prog = 0,  // program a site: store value, latch next opcode / destination
  Update = 1,
  Add = 2,   // terminal forms: stored = stored op incoming, nothing emitted
  Sub = 3,
  Mul = 4,
  Div = 5,
  AddS = 6,  // streaming forms: stored unchanged, stored op incoming emitted
  SubS = 7,
  MulS = 8,
  DivS = 9,
};

inline constexpr int kOpcodeCount = 10;
inline constexpr std::uint16_t kMaxSiteAddress = 4095;  // 12-bit address space

constexpr bool valid_opcode_code(std::uint8_t code) { return code < kOpcodeCount; }

constexpr bool is_streaming(Opcode op) {
  return op == Opcode::AddS || op == Opcode::SubS || op == Opcode::MulS ||
         op == Opcode::DivS;
}

constexpr bool is_terminal_arith(Opcode op) {
  return op == Opcode::Add || op == Opcode::Sub || op == Opcode::Mul ||
         op == Opcode::Div;
}

std::string_view opcode_name(Opcode op);

// Case-insensitive mnemonic lookup; nullopt for unknown names.
std::optional<Opcode> parse_opcode(std::string_view name);

// One 64-bit message. Bit 0 is the least-significant bit of the word:
//   bits  0-3   opcode
//   bits  4-15  destination site address
//   bits 16-47  binary32 payload
//   bits 48-51  next opcode
//   bits 52-63  next destination site address
struct MessageWord {
  Opcode opcode = Opcode::Prog;
  std::uint16_t destination = 0;
  float value = 0.0f;
  Opcode next_opcode = Opcode::Prog;
  std::uint16_t next_destination = 0;

  bool operator==(const MessageWord&) const = default;
};

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Packs the five fields into the unique 64-bit word. Throws EncodeError when
// either address exceeds 4095.
std::uint64_t encode(const MessageWord& m);

// Field decomposition of an arbitrary 64-bit word. Throws DecodeError naming
// the offending field when either opcode nibble is 10..15.
MessageWord decode(std::uint64_t word);

// Result of executing one operational instruction at a site.
//   stored   the site's register after the instruction
//   emitted  present for streaming forms: the value to forward
//   nonfinite set when the arithmetic produced inf/nan (run continues)
struct ApplyResult {
  float stored = 0.0f;
  std::optional<float> emitted;
  bool nonfinite = false;
};

// Pure semantics of the nine operational instructions. Prog is handled by the
// site state machine, not here, and is rejected. Operand order for the
// noncommutative pairs is stored-on-the-left: stored - incoming,
// stored / incoming.
ApplyResult apply_instruction(Opcode op, float incoming, float stored);

// Textual assembly for single messages:
//   OPCODE dest=<u12> val=<f32> next=<OPCODE> ndest=<u12>
// Opcodes are case-insensitive; '#' starts a comment.
std::string format_message(const MessageWord& m);
MessageWord parse_message(std::string_view line);

// 16 lowercase hex digits, the whole word, most-significant digit first.
std::string format_word_hex(std::uint64_t word);
std::uint64_t parse_word_hex(std::string_view text);

}  // namespace meshfab
