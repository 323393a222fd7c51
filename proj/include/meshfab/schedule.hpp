#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "meshfab/fabric.hpp"
#include "meshfab/isa.hpp"

namespace meshfab {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One scheduled fabric action. Injections feed edge ports; the bus directives
// mirror the Fabric bus transactions.
struct InjectAction {
  Port port;
  MessageWord word;
};
struct BroadcastAction {
  std::uint16_t col = 0;
  MessageWord word;
  std::uint32_t row_limit = Fabric::kAllRows;
};
struct ReduceAction {
  std::uint16_t row = 0;
  Opcode op = Opcode::Add;
  std::uint16_t sink = 0;
};
struct OffloadAction {
  std::vector<std::uint16_t> sites;
};

struct ScheduledAction {
  std::uint64_t timestep = 0;
  std::variant<InjectAction, BroadcastAction, ReduceAction, OffloadAction> act;
};

// A complete per-timestep program for one kernel run. Builders declare the
// timestep count the analytic model predicts for the kernel.
struct InjectionSchedule {
  std::vector<ScheduledAction> actions;  // nondecreasing timesteps
  std::uint64_t expected_timesteps = 0;

  // Timesteps must be nondecreasing and contiguous (no silent idle gaps
  // between the first and last scheduled step).
  void validate() const;
  std::uint64_t first_timestep() const;
  std::uint64_t last_timestep() const;
};

// Text form: injection lines are
//   @<cycle> left=<row>|top=<col> OPCODE dest=<u12> val=<f32> next=<OP> ndest=<u12>
// bus directives are
//   @<cycle> .vbcast col=<c> op=<OPCODE> val=<f32> [rows=<n>]
//   @<cycle> .hreduce row=<r> sink=<addr>
//   @<cycle> .offload [sites=<a>:<b>:...]
// plus an optional leading ".expect <timesteps>". '#' starts a comment.
std::string serialize_schedule(const InjectionSchedule& s);
InjectionSchedule parse_schedule(std::string_view text);

struct OffloadRecord {
  std::uint64_t cycle = 0;
  std::uint16_t site = 0;
  float value = 0.0f;
};

struct RunResult {
  std::vector<float> final_values;
  std::uint64_t timesteps = 0;
  std::vector<TraceEvent> trace;
  std::vector<OffloadRecord> offloads;
};

// Drives the fabric cycle by cycle until every action has been issued and the
// fabric is quiescent. Returns the executed timestep count for comparison
// against the analytic model. Watchdog expiry raises SimError; the partial
// trace stays on the fabric.
RunResult run_schedule(Fabric& fabric, const InjectionSchedule& schedule);

}  // namespace meshfab
