#include "meshfab/schedule.hpp"

#include "meshfab/numfmt.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace meshfab {

void InjectionSchedule::validate() const {
  std::uint64_t prev = 0;
  bool first = true;
  for (const auto& a : actions) {
    if (!first && a.timestep < prev) {
      throw ParseError("schedule timesteps must be nondecreasing");
    }
    if (!first && a.timestep > prev + 1) {
      throw ParseError("schedule timesteps must be dense (gap before step " +
                       std::to_string(a.timestep) + ")");
    }
    prev = a.timestep;
    first = false;
  }
}

std::uint64_t InjectionSchedule::first_timestep() const {
  return actions.empty() ? 0 : actions.front().timestep;
}

std::uint64_t InjectionSchedule::last_timestep() const {
  return actions.empty() ? 0 : actions.back().timestep;
}

namespace {

struct LineScanner {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  bool next(std::string_view& line) {
    if (pos > text.size()) return false;
    const auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      line = text.substr(pos);
      pos = text.size() + 1;
    } else {
      line = text.substr(pos, eol - pos);
      pos = eol + 1;
    }
    ++line_no;
    return true;
  }
};

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  if (hash != std::string_view::npos) s = s.substr(0, hash);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> tokens_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

unsigned long long parse_u64(const std::string& s, std::size_t line_no,
                             const char* what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " '" + s + "'");
  }
  return v;
}

std::string take_key(const std::string& tok, const char* key,
                     std::size_t line_no) {
  const std::string prefix = std::string(key) + "=";
  if (tok.rfind(prefix, 0) != 0) {
    throw ParseError("line " + std::to_string(line_no) + ": expected " +
                     prefix + "<...>, got '" + tok + "'");
  }
  return tok.substr(prefix.size());
}

}  // namespace

std::string serialize_schedule(const InjectionSchedule& s) {
  std::ostringstream out;
  out << ".expect " << s.expected_timesteps << "\n";
  for (const auto& a : s.actions) {
    out << "@" << a.timestep << " ";
    if (const auto* inj = std::get_if<InjectAction>(&a.act)) {
      if (inj->port.side == Port::Side::LeftEdge) {
        out << "left=" << inj->port.index;
      } else {
        out << "top=" << inj->port.index;
      }
      out << " " << format_message(inj->word);
    } else if (const auto* b = std::get_if<BroadcastAction>(&a.act)) {
      out << ".vbcast col=" << b->col << " op=" << opcode_name(b->word.opcode)
          << " val=" << format_f32(b->word.value);
      if (b->row_limit != Fabric::kAllRows) out << " rows=" << b->row_limit;
    } else if (const auto* r = std::get_if<ReduceAction>(&a.act)) {
      out << ".hreduce row=" << r->row << " sink=" << r->sink;
    } else {
      const auto& off = std::get<OffloadAction>(a.act);
      out << ".offload";
      if (!off.sites.empty()) {
        out << " sites=";
        for (std::size_t i = 0; i < off.sites.size(); ++i) {
          if (i) out << ":";
          out << off.sites[i];
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

InjectionSchedule parse_schedule(std::string_view text) {
  InjectionSchedule sched;
  LineScanner scanner{text};
  std::string_view raw;
  while (scanner.next(raw)) {
    const std::string_view line = strip_comment(raw);
    if (line.empty()) continue;
    auto toks = tokens_of(line);
    std::size_t i = 0;

    if (toks[i] == ".expect") {
      if (toks.size() != 2) {
        throw ParseError("line " + std::to_string(scanner.line_no) +
                         ": .expect takes one number");
      }
      sched.expected_timesteps = parse_u64(toks[1], scanner.line_no, "step count");
      continue;
    }

    if (toks[i][0] != '@') {
      throw ParseError("line " + std::to_string(scanner.line_no) +
                       ": schedule lines start with @<cycle>");
    }
    ScheduledAction action;
    action.timestep = parse_u64(toks[i].substr(1), scanner.line_no, "cycle");
    ++i;
    if (i >= toks.size()) {
      throw ParseError("line " + std::to_string(scanner.line_no) +
                       ": missing action after @cycle");
    }

    if (toks[i] == ".vbcast") {
      BroadcastAction b;
      ++i;
      if (i + 2 > toks.size()) {
        throw ParseError("line " + std::to_string(scanner.line_no) +
                         ": .vbcast needs col= op= val=");
      }
      b.col = static_cast<std::uint16_t>(
          parse_u64(take_key(toks[i++], "col", scanner.line_no), scanner.line_no, "col"));
      const auto op = parse_opcode(take_key(toks[i++], "op", scanner.line_no));
      if (!op) {
        throw ParseError("line " + std::to_string(scanner.line_no) +
                         ": unknown opcode in .vbcast");
      }
      b.word.opcode = *op;
      if (i >= toks.size()) {
        throw ParseError("line " + std::to_string(scanner.line_no) +
                         ": .vbcast needs val=");
      }
      {
        const std::string v = take_key(toks[i++], "val", scanner.line_no);
        char* end = nullptr;
        b.word.value = std::strtof(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') {
          throw ParseError("line " + std::to_string(scanner.line_no) +
                           ": bad val '" + v + "'");
        }
      }
      if (i < toks.size()) {
        b.row_limit = static_cast<std::uint32_t>(parse_u64(
            take_key(toks[i++], "rows", scanner.line_no), scanner.line_no, "rows"));
      }
      action.act = b;
    } else if (toks[i] == ".hreduce") {
      ReduceAction r;
      ++i;
      if (i + 2 != toks.size()) {
        throw ParseError("line " + std::to_string(scanner.line_no) +
                         ": .hreduce needs row= sink=");
      }
      r.row = static_cast<std::uint16_t>(parse_u64(
          take_key(toks[i], "row", scanner.line_no), scanner.line_no, "row"));
      ++i;
      r.sink = static_cast<std::uint16_t>(parse_u64(
          take_key(toks[i], "sink", scanner.line_no), scanner.line_no, "sink"));
      action.act = r;
    } else if (toks[i] == ".offload") {
      OffloadAction off;
      ++i;
      if (i < toks.size()) {
        const std::string list = take_key(toks[i], "sites", scanner.line_no);
        std::size_t p = 0;
        while (p <= list.size()) {
          const auto colon = list.find(':', p);
          const std::string item =
              list.substr(p, colon == std::string::npos ? std::string::npos
                                                        : colon - p);
          if (!item.empty()) {
            off.sites.push_back(static_cast<std::uint16_t>(
                parse_u64(item, scanner.line_no, "offload site")));
          }
          if (colon == std::string::npos) break;
          p = colon + 1;
        }
      }
      action.act = off;
    } else {
      // Port-prefixed injection line.
      InjectAction inj;
      const std::string& port_tok = toks[i];
      if (port_tok.rfind("left=", 0) == 0) {
        inj.port.side = Port::Side::LeftEdge;
        inj.port.index = static_cast<std::uint16_t>(
            parse_u64(port_tok.substr(5), scanner.line_no, "port row"));
      } else if (port_tok.rfind("top=", 0) == 0) {
        inj.port.side = Port::Side::TopEdge;
        inj.port.index = static_cast<std::uint16_t>(
            parse_u64(port_tok.substr(4), scanner.line_no, "port col"));
      } else {
        throw ParseError("line " + std::to_string(scanner.line_no) +
                         ": expected left=<row> or top=<col>");
      }
      ++i;
      std::string rest;
      for (; i < toks.size(); ++i) {
        if (!rest.empty()) rest += " ";
        rest += toks[i];
      }
      try {
        inj.word = parse_message(rest);
      } catch (const DecodeError& e) {
        throw ParseError("line " + std::to_string(scanner.line_no) + ": " +
                         e.what());
      }
      action.act = inj;
    }
    sched.actions.push_back(std::move(action));
  }
  std::stable_sort(sched.actions.begin(), sched.actions.end(),
                   [](const ScheduledAction& a, const ScheduledAction& b) {
                     return a.timestep < b.timestep;
                   });
  sched.validate();
  return sched;
}

RunResult run_schedule(Fabric& fabric, const InjectionSchedule& schedule) {
  schedule.validate();
  RunResult result;
  const std::uint64_t start_cycle = fabric.cycle();
  const std::size_t trace_start = fabric.trace().size();
  const std::size_t offload_start = fabric.offload_log().size();

  // Injections can be queued up front; bus actions are registered on the
  // cycle they belong to.
  std::size_t next = 0;
  const auto issue_until = [&](std::uint64_t cycle) {
    while (next < schedule.actions.size() &&
           schedule.actions[next].timestep + start_cycle <= cycle) {
      const auto& a = schedule.actions[next];
      if (const auto* inj = std::get_if<InjectAction>(&a.act)) {
        fabric.inject(a.timestep + start_cycle, inj->port, inj->word);
      } else if (const auto* b = std::get_if<BroadcastAction>(&a.act)) {
        fabric.column_broadcast(b->col, b->word, b->row_limit);
      } else if (const auto* r = std::get_if<ReduceAction>(&a.act)) {
        fabric.row_reduce(r->row, r->op, r->sink);
      } else {
        fabric.offload(std::get<OffloadAction>(a.act).sites);
      }
      ++next;
    }
  };

  while (true) {
    issue_until(fabric.cycle());
    if (next >= schedule.actions.size() && fabric.quiescent()) break;
    fabric.step();
  }

  result.timesteps = fabric.cycle() - start_cycle;
  result.final_values = fabric.site_values();
  result.trace.assign(fabric.trace().begin() + trace_start, fabric.trace().end());
  for (std::size_t i = offload_start; i < fabric.offload_log().size(); ++i) {
    const auto& e = fabric.offload_log()[i];
    result.offloads.push_back({e.cycle - start_cycle, e.site, e.value});
  }
  return result;
}

}  // namespace meshfab
