#include "meshfab/fabric.hpp"

#include "meshfab/numfmt.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace meshfab {

void FabricConfig::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("fabric needs rows >= 1 and cols >= 1");
  if (site_count() > kMaxSiteAddress + 1) {
    throw ConfigError("fabric of " + std::to_string(site_count()) +
                      " sites exceeds the 4096-site address space");
  }
  if (fifo_depth < 1) throw ConfigError("fifo_depth must be >= 1");
  if (clock_hz == 0) throw ConfigError("clock_hz must be > 0");
}

FabricConfig parse_fabric_config(std::string_view text) {
  FabricConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::string s(line);
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("fabric config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = s.substr(0, eq);
    const std::string val = s.substr(eq + 1);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(val.c_str(), &end, 10);
    if (end == val.c_str() || *end != '\0') {
      throw ConfigError("fabric config line " + std::to_string(line_no) +
                        ": bad number '" + val + "'");
    }
    if (key == "rows") cfg.rows = static_cast<std::uint16_t>(v);
    else if (key == "cols") cfg.cols = static_cast<std::uint16_t>(v);
    else if (key == "fifo_depth") cfg.fifo_depth = static_cast<std::uint32_t>(v);
    else if (key == "clock_hz") cfg.clock_hz = v;
    else if (key == "max_cycles") cfg.max_cycles = v;
    else {
      throw ConfigError("fabric config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

FabricConfig load_fabric_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fabric config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fabric_config(ss.str());
}

std::string format_fabric_config(const FabricConfig& cfg) {
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "rows=%u\ncols=%u\nfifo_depth=%u\nclock_hz=%llu\nmax_cycles=%llu\n",
                cfg.rows, cfg.cols, cfg.fifo_depth,
                static_cast<unsigned long long>(cfg.clock_hz),
                static_cast<unsigned long long>(cfg.max_cycles));
  return buf;
}

namespace {
constexpr std::array<std::string_view, 8> kEventNames = {
    "route-right", "route-down", "consume-prog", "execute",
    "emit",        "bus-broadcast", "bus-reduce", "offload",
};
}

std::string_view event_kind_name(EventKind k) {
  return kEventNames[static_cast<std::size_t>(k)];
}

std::string format_trace_line(const TraceEvent& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "cycle=%llu site=%u event=%s word=%s value=%s",
                static_cast<unsigned long long>(e.cycle), e.site,
                std::string(event_kind_name(e.kind)).c_str(),
                format_word_hex(e.word).c_str(), format_f32(e.value).c_str());
  return buf;
}

std::string format_trace_csv_row(const TraceEvent& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%llu,%u,%s,%s,%s",
                static_cast<unsigned long long>(e.cycle), e.site,
                std::string(event_kind_name(e.kind)).c_str(),
                format_word_hex(e.word).c_str(), format_f32(e.value).c_str());
  return buf;
}

RouteChoice route_decision(std::uint16_t current, std::uint16_t dest,
                           const FabricConfig& grid) {
  if (current == dest) return RouteChoice::Consume;
  if (grid.row_of(dest) != grid.row_of(current)) return RouteChoice::Down;
  return RouteChoice::Right;
}

Fabric::Fabric(FabricConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  sites_.resize(cfg_.site_count());
  for (std::uint32_t a = 0; a < cfg_.site_count(); ++a) {
    sites_[a].next_destination = static_cast<std::uint16_t>(a);
  }
}

std::vector<float> Fabric::site_values() const {
  std::vector<float> out(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) out[i] = sites_[i].stored;
  return out;
}

void Fabric::inject(std::uint64_t cycle, Port port, const MessageWord& m) {
  if (cycle < cycle_) throw SimError("injection scheduled in the past");
  if (port.side == Port::Side::LeftEdge && port.index >= cfg_.rows) {
    throw SimError("left-edge port row " + std::to_string(port.index) +
                   " out of range");
  }
  if (port.side == Port::Side::TopEdge && port.index >= cfg_.cols) {
    throw SimError("top-edge port col " + std::to_string(port.index) +
                   " out of range");
  }
  injections_[cycle].emplace_back(port, m);
}

void Fabric::seed_message(std::uint16_t addr, bool left_port,
                          const MessageWord& m) {
  if (addr >= sites_.size()) throw SimError("seed address out of range");
  push_fifo(addr, left_port, m);
  ++injected_;
}

void Fabric::column_broadcast(std::uint16_t col, const MessageWord& m,
                              std::uint32_t row_limit) {
  if (col >= cfg_.cols) {
    throw SimError("broadcast column " + std::to_string(col) + " out of range");
  }
  bus_queue_.push_back(Broadcast{col, m, row_limit});
}

void Fabric::row_reduce(std::uint16_t row, Opcode op, std::uint16_t sink) {
  if (row >= cfg_.rows) {
    throw SimError("reduce row " + std::to_string(row) + " out of range");
  }
  if (cfg_.row_of(sink) != row) throw SimError("reduce sink not in its row");
  if (op != Opcode::Add) throw SimError("row reduce supports A_ADD only");
  bus_queue_.push_back(Reduce{row, op, sink});
}

void Fabric::offload(std::vector<std::uint16_t> sites) {
  for (auto s : sites) {
    if (s >= sites_.size()) throw SimError("offload site out of range");
  }
  bus_queue_.push_back(OffloadRead{std::move(sites)});
}

void Fabric::record(std::uint16_t site, EventKind kind, std::uint64_t word,
                    float value) {
  if (tracing) trace_.push_back({cycle_, site, kind, word, value});
  if (kind == EventKind::Offload) {
    offload_log_.push_back({cycle_, site, kind, word, value});
  }
}

void Fabric::push_fifo(std::uint16_t addr, bool left_port, const MessageWord& m) {
  auto& fifo = left_port ? sites_[addr].in_left : sites_[addr].in_top;
  if (fifo.size() >= cfg_.fifo_depth) {
    throw SimError("FIFO overflow at site " + std::to_string(addr) +
                   " (" + (left_port ? "left" : "top") + " port, cycle " +
                   std::to_string(cycle_) + ")");
  }
  fifo.push_back(m);
}

void Fabric::execute_at(std::uint16_t addr, const MessageWord& m, bool via_bus) {
  SiteState& s = sites_[addr];
  const std::uint64_t w = encode(m);
  if (m.opcode == Opcode::Prog) {
    s.stored = m.value;
    s.next_opcode = m.next_opcode;
    s.next_destination = m.next_destination;
    if (!via_bus) ++consumed_;
    record(addr, via_bus ? EventKind::BusBroadcast : EventKind::ConsumeProg, w,
           s.stored);
    return;
  }
  const ApplyResult r = apply_instruction(m.opcode, m.value, s.stored);
  if (r.nonfinite) {
    s.nonfinite = true;
    ++nonfinite_;
  }
  s.stored = r.stored;
  if (!via_bus) {
    ++consumed_;
    record(addr, EventKind::Execute, w, r.emitted ? *r.emitted : s.stored);
    return;
  }
  record(addr, EventKind::BusBroadcast, w, r.emitted ? *r.emitted : s.stored);
  if (r.emitted) {
    if (s.pending) {
      throw SimError("pending value at site " + std::to_string(addr) +
                     " overwritten before a reduce collected it");
    }
    s.pending = *r.emitted;
    ++emitted_;
  }
}

void Fabric::process_port(std::uint16_t addr, bool left_port, bool& right_used,
                          bool& down_used) {
  SiteState& s = sites_[addr];
  auto& fifo = left_port ? s.in_left : s.in_top;
  if (fifo.empty()) return;
  const MessageWord m = fifo.front();
  const RouteChoice route = route_decision(addr, m.destination, cfg_);

  if (route != RouteChoice::Consume) {
    bool& used = route == RouteChoice::Right ? right_used : down_used;
    if (used) return;  // one departure per link per cycle; head stays queued
    used = true;
    fifo.pop_front();
    const std::uint16_t row = cfg_.row_of(addr);
    const std::uint16_t col = cfg_.col_of(addr);
    std::uint16_t to;
    if (route == RouteChoice::Right) {
      to = cfg_.site(row, static_cast<std::uint16_t>((col + 1) % cfg_.cols));
    } else {
      to = cfg_.site(static_cast<std::uint16_t>((row + 1) % cfg_.rows), col);
    }
    staged_.push_back({to, route == RouteChoice::Right, m});
    record(addr,
           route == RouteChoice::Right ? EventKind::RouteRight : EventKind::RouteDown,
           encode(m), m.value);
    return;
  }

  if (m.opcode == Opcode::Prog || !is_streaming(m.opcode)) {
    fifo.pop_front();
    execute_at(addr, m, /*via_bus=*/false);
    return;
  }

  // Streaming consume: the emitted message departs this cycle, so the link it
  // needs must still be free, else the incoming message waits.
  MessageWord out;
  out.opcode = s.next_opcode;
  out.destination = s.next_destination;
  out.next_opcode = Opcode::Prog;
  out.next_destination = 0;
  const RouteChoice eroute = route_decision(addr, out.destination, cfg_);
  if (eroute == RouteChoice::Right && right_used) return;
  if (eroute == RouteChoice::Down && down_used) return;

  fifo.pop_front();
  const ApplyResult r = apply_instruction(m.opcode, m.value, s.stored);
  if (r.nonfinite) {
    s.nonfinite = true;
    ++nonfinite_;
  }
  s.stored = r.stored;
  ++consumed_;
  record(addr, EventKind::Execute, encode(m), *r.emitted);
  out.value = *r.emitted;
  ++emitted_;
  const std::uint16_t row = cfg_.row_of(addr);
  const std::uint16_t col = cfg_.col_of(addr);
  switch (eroute) {
    case RouteChoice::Consume:
      // Self-addressed continuation: loops back through the own left FIFO.
      staged_.push_back({addr, true, out});
      break;
    case RouteChoice::Right:
      right_used = true;
      staged_.push_back(
          {cfg_.site(row, static_cast<std::uint16_t>((col + 1) % cfg_.cols)),
           true, out});
      break;
    case RouteChoice::Down:
      down_used = true;
      staged_.push_back(
          {cfg_.site(static_cast<std::uint16_t>((row + 1) % cfg_.rows), col),
           false, out});
      break;
  }
  record(addr, EventKind::Emit, encode(out), out.value);
}

void Fabric::commit_bus(const BusAction& action) {
  if (const auto* b = std::get_if<Broadcast>(&action)) {
    const std::uint32_t limit = std::min<std::uint32_t>(b->row_limit, cfg_.rows);
    for (std::uint32_t r = 0; r < limit; ++r) {
      execute_at(cfg_.site(static_cast<std::uint16_t>(r), b->col), b->word,
                 /*via_bus=*/true);
    }
    return;
  }
  if (const auto* rd = std::get_if<Reduce>(&action)) {
    SiteState& sink = sites_[rd->sink];
    bool any = false;
    for (std::uint16_t c = 0; c < cfg_.cols; ++c) {
      SiteState& contrib = sites_[cfg_.site(rd->row, c)];
      if (!contrib.pending) continue;
      any = true;
      const ApplyResult r = apply_instruction(rd->op, *contrib.pending, sink.stored);
      if (r.nonfinite) {
        sink.nonfinite = true;
        ++nonfinite_;
      }
      sink.stored = r.stored;
      contrib.pending.reset();
      ++consumed_;
    }
    if (!any) ++reduce_warnings_;
    record(rd->sink, EventKind::BusReduce, 0, sink.stored);
    return;
  }
  const auto& off = std::get<OffloadRead>(action);
  for (const auto addr : off.sites) {
    record(addr, EventKind::Offload, 0, sites_[addr].stored);
  }
}

void Fabric::step() {
  if (cycle_ >= cfg_.max_cycles) {
    throw SimError("watchdog: exceeded max_cycles=" +
                   std::to_string(cfg_.max_cycles));
  }

  // Phase 0: this cycle's injections land in their edge FIFOs.
  if (const auto it = injections_.find(cycle_); it != injections_.end()) {
    for (const auto& [port, word] : it->second) {
      const std::uint16_t addr = port.side == Port::Side::LeftEdge
                                     ? cfg_.site(port.index, 0)
                                     : cfg_.site(0, port.index);
      push_fifo(addr, port.side == Port::Side::LeftEdge, word);
      ++injected_;
    }
    injections_.erase(it);
  }

  // Phases 1-2: link traffic, ascending site address, left before top.
  for (std::uint32_t a = 0; a < sites_.size(); ++a) {
    bool right_used = false;
    bool down_used = false;
    process_port(static_cast<std::uint16_t>(a), true, right_used, down_used);
    process_port(static_cast<std::uint16_t>(a), false, right_used, down_used);
  }

  // Phase 3: bus transactions commit in registration order.
  for (const auto& action : bus_queue_) commit_bus(action);
  bus_queue_.clear();

  // Routed messages become visible to the next cycle.
  for (const auto& d : staged_) push_fifo(d.addr, d.left_port, d.word);
  staged_.clear();

  ++cycle_;
}

std::uint64_t Fabric::in_flight() const {
  std::uint64_t n = staged_.size();
  for (const auto& s : sites_) n += s.in_left.size() + s.in_top.size();
  return n;
}

bool Fabric::quiescent() const {
  return in_flight() == 0 && injections_.empty() && bus_queue_.empty();
}

}  // namespace meshfab
