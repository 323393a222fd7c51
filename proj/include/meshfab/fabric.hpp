#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "meshfab/isa.hpp"

namespace meshfab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised on FIFO overflow, watchdog expiry, and other conditions that make a
// run unrecoverable. The fabric keeps its (partial) trace when this fires.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FabricConfig {
  std::uint16_t rows = 64;
  std::uint16_t cols = 64;
  std::uint32_t fifo_depth = 4;
  std::uint64_t clock_hz = 200'000'000;
  std::uint64_t max_cycles = 1'000'000;

  std::uint32_t site_count() const {
    return static_cast<std::uint32_t>(rows) * cols;
  }
  std::uint16_t site(std::uint16_t row, std::uint16_t col) const {
    return static_cast<std::uint16_t>(row * cols + col);
  }
  std::uint16_t row_of(std::uint16_t addr) const { return addr / cols; }
  std::uint16_t col_of(std::uint16_t addr) const { return addr % cols; }

  // rows, cols >= 1 and rows*cols <= 4096 (12-bit addresses).
  void validate() const;
};

// key=value lines: rows, cols, fifo_depth, clock_hz, max_cycles. '#' comments.
FabricConfig parse_fabric_config(std::string_view text);
FabricConfig load_fabric_config(const std::string& path);
std::string format_fabric_config(const FabricConfig& cfg);

enum class EventKind : std::uint8_t {
  RouteRight,
  RouteDown,
  ConsumeProg,
  Execute,
  Emit,
  BusBroadcast,
  BusReduce,
  Offload,
};

std::string_view event_kind_name(EventKind k);

struct TraceEvent {
  std::uint64_t cycle = 0;
  std::uint16_t site = 0;
  EventKind kind = EventKind::Execute;
  std::uint64_t word = 0;
  float value = 0.0f;

  bool operator==(const TraceEvent&) const = default;
};

// cycle=<u64> site=<u12> event=<kind> word=<16 hex> value=<f32>
std::string format_trace_line(const TraceEvent& e);
std::string format_trace_csv_row(const TraceEvent& e);
inline constexpr std::string_view kTraceCsvHeader = "cycle,site,event,word,value";

// Injection port on the fabric boundary: the left edge of a row feeds that
// row's first site, the top edge of a column feeds that column's first site.
struct Port {
  enum class Side : std::uint8_t { LeftEdge, TopEdge };
  Side side = Side::TopEdge;
  std::uint16_t index = 0;

  bool operator==(const Port&) const = default;
};

enum class RouteChoice : std::uint8_t { Consume, Right, Down };

// Pure routing rule: consume at the destination, hop down while the row is
// wrong, otherwise hop right. Both moves wrap (torus), so any pair is
// reachable within (rows-1) + (cols-1) hops.
RouteChoice route_decision(std::uint16_t current, std::uint16_t dest,
                           const FabricConfig& grid);

struct SiteState {
  float stored = 0.0f;
  Opcode next_opcode = Opcode::Update;
  std::uint16_t next_destination = 0;
  std::deque<MessageWord> in_left;
  std::deque<MessageWord> in_top;
  // Product parked by a streaming instruction delivered over the vertical
  // bus, waiting for a horizontal-bus reduce.
  std::optional<float> pending;
  bool nonfinite = false;
};

class Fabric {
 public:
  explicit Fabric(FabricConfig cfg);

  const FabricConfig& config() const { return cfg_; }
  std::uint64_t cycle() const { return cycle_; }
  const SiteState& site(std::uint16_t addr) const { return sites_[addr]; }
  std::vector<float> site_values() const;

  // Queue a message for delivery into an edge FIFO at the given cycle (which
  // must not be in the past). The message becomes visible to that cycle's
  // dequeue phase.
  void inject(std::uint64_t cycle, Port port, const MessageWord& m);

  // Drop a message directly into a site's input FIFO at the current cycle.
  // Fixture surface for routing studies; kernels go through inject().
  void seed_message(std::uint16_t addr, bool left_port, const MessageWord& m);

  // Bus transactions commit during the next step(), after link traffic.
  // A broadcast delivers the word to the first row_limit sites of the column
  // as if each were the destination; one cycle regardless of height.
  void column_broadcast(std::uint16_t col, const MessageWord& m,
                        std::uint32_t row_limit = kAllRows);
  // Folds every pending value in the row into the sink's stored value in
  // ascending column order; one cycle regardless of width.
  void row_reduce(std::uint16_t row, Opcode op, std::uint16_t sink);
  // Counted read-out of the given sites.
  void offload(std::vector<std::uint16_t> sites);

  // Advance exactly one cycle. Phases: deliver this cycle's injections,
  // process site link traffic in ascending address order (left before top at
  // each site, at most one departure per output link), commit bus
  // transactions, then release routed messages to their neighbors.
  void step();

  // No queued or staged messages, no future injections, no bus transactions.
  bool quiescent() const;

  bool tracing = true;
  const std::vector<TraceEvent>& trace() const { return trace_; }
  // Offload read-outs are recorded even when tracing is off.
  const std::vector<TraceEvent>& offload_log() const { return offload_log_; }

  std::uint64_t injected_count() const { return injected_; }
  std::uint64_t emitted_count() const { return emitted_; }
  std::uint64_t consumed_count() const { return consumed_; }
  std::uint64_t nonfinite_count() const { return nonfinite_; }
  std::uint64_t reduce_warning_count() const { return reduce_warnings_; }
  std::uint64_t in_flight() const;

  static constexpr std::uint32_t kAllRows = 0xffffffff;

 private:
  struct Broadcast {
    std::uint16_t col;
    MessageWord word;
    std::uint32_t row_limit;
  };
  struct Reduce {
    std::uint16_t row;
    Opcode op;
    std::uint16_t sink;
  };
  struct OffloadRead {
    std::vector<std::uint16_t> sites;
  };
  using BusAction = std::variant<Broadcast, Reduce, OffloadRead>;

  struct Delivery {
    std::uint16_t addr;
    bool left_port;
    MessageWord word;
  };

  void record(std::uint16_t site, EventKind kind, std::uint64_t word, float value);
  void push_fifo(std::uint16_t addr, bool left_port, const MessageWord& m);
  void process_port(std::uint16_t addr, bool left_port, bool& right_used,
                    bool& down_used);
  void execute_at(std::uint16_t addr, const MessageWord& m, bool via_bus);
  void commit_bus(const BusAction& action);

  FabricConfig cfg_;
  std::vector<SiteState> sites_;
  std::uint64_t cycle_ = 0;
  std::map<std::uint64_t, std::vector<std::pair<Port, MessageWord>>> injections_;
  std::vector<BusAction> bus_queue_;
  std::vector<Delivery> staged_;
  std::vector<TraceEvent> trace_;
  std::vector<TraceEvent> offload_log_;
  std::uint64_t injected_ = 0;
  std::uint64_t emitted_ = 0;
  std::uint64_t consumed_ = 0;
  std::uint64_t nonfinite_ = 0;
  std::uint64_t reduce_warnings_ = 0;
};

}  // namespace meshfab
