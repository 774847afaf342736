#include "dsc/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dsc/util.hpp"

namespace dsc {

bool is_two_qubit(Op op) { return op == Op::CNOT || op == Op::CXSWAP || op == Op::SWAPCX; }
bool is_measurement(Op op) { return op == Op::MR || op == Op::MRX; }
bool is_reset(Op op) { return op == Op::R || op == Op::RX; }
bool is_noise(Op op) {
  return op == Op::Depolarize1 || op == Op::Depolarize2 || op == Op::XError || op == Op::ZError;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::CNOT: return "CX";
    case Op::CXSWAP: return "CXSWAP";
    case Op::SWAPCX: return "SWAPCX";
    case Op::H: return "H";
    case Op::R: return "R";
    case Op::RX: return "RX";
    case Op::MR: return "MR";
    case Op::MRX: return "MRX";
    case Op::Tick: return "TICK";
    case Op::Depolarize1: return "DEPOLARIZE1";
    case Op::Depolarize2: return "DEPOLARIZE2";
    case Op::XError: return "X_ERROR";
    case Op::ZError: return "Z_ERROR";
    case Op::Detector: return "DETECTOR";
    case Op::ObservableInclude: return "OBSERVABLE_INCLUDE";
    case Op::QubitCoords: return "QUBIT_COORDS";
  }
  throw std::logic_error("bad op");
}

uint32_t Circuit::num_qubits() const {
  uint32_t n = 0;
  for (const auto& ins : instructions)
    for (uint32_t q : ins.qubits) n = std::max(n, q + 1);
  return n;
}

size_t Circuit::num_measurements() const {
  size_t n = 0;
  for (const auto& ins : instructions)
    if (is_measurement(ins.op)) n += ins.qubits.size();
  return n;
}

size_t Circuit::num_detectors() const { return count_op(Op::Detector); }
size_t Circuit::num_observables() const {
  std::set<int> ids;
  for (const auto& ins : instructions)
    if (ins.op == Op::ObservableInclude) ids.insert(int(ins.args.at(0)));
  return ids.size();
}

size_t Circuit::count_op(Op op) const {
  size_t n = 0;
  for (const auto& ins : instructions)
    if (ins.op == op) ++n;
  return n;
}

void validate_ticks(const Circuit& c) {
  // state per qubit within current tick: 0 none, 1 gate, 2 measured, 3 post-measure tail
  std::map<uint32_t, int> state;
  size_t tick = 0;
  for (const auto& ins : c.instructions) {
    if (ins.op == Op::Tick) {
      state.clear();
      ++tick;
      continue;
    }
    if (is_noise(ins.op) || ins.op == Op::Detector || ins.op == Op::ObservableInclude ||
        ins.op == Op::QubitCoords)
      continue;
    for (uint32_t q : ins.qubits) {
      int& s = state[q];
      if (is_measurement(ins.op)) {
        if (s != 0) throw std::runtime_error("tick " + std::to_string(tick) + ": qubit " +
                                             std::to_string(q) + " measured after another op");
        s = 2;
      } else if (is_reset(ins.op) || ins.op == Op::H) {
        if (s == 1) throw std::runtime_error("tick " + std::to_string(tick) + ": qubit " +
                                             std::to_string(q) + " reset/H after a gate");
        if (s == 0) s = 1;  // standalone single-qubit op occupies the slot
      } else {
        if (s != 0) throw std::runtime_error("tick " + std::to_string(tick) + ": qubit " +
                                             std::to_string(q) + " in two operations");
        s = 1;
      }
    }
  }
}

static std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string export_text(const Circuit& c) {
  std::ostringstream out;
  for (const auto& [q, xy] : c.coords)
    out << "QUBIT_COORDS(" << xy.x << ", " << xy.y << ") " << q << "\n";
  for (const auto& ins : c.instructions) {
    switch (ins.op) {
      case Op::Tick:
        out << "TICK\n";
        break;
      case Op::Detector: {
        out << "DETECTOR(";
        for (size_t i = 0; i < ins.args.size(); ++i)
          out << (i ? ", " : "") << fmt_double(ins.args[i]);
        out << ")";
        for (int32_t r : ins.rec) out << " rec[" << r << "]";
        out << "\n";
        break;
      }
      case Op::ObservableInclude: {
        out << "OBSERVABLE_INCLUDE(" << int(ins.args.at(0)) << ")";
        for (int32_t r : ins.rec) out << " rec[" << r << "]";
        out << "\n";
        break;
      }
      case Op::Depolarize1:
      case Op::Depolarize2:
      case Op::XError:
      case Op::ZError: {
        out << op_name(ins.op) << "(" << fmt_double(ins.args.at(0)) << ")";
        for (uint32_t q : ins.qubits) out << " " << q;
        out << "\n";
        break;
      }
      case Op::QubitCoords:
        break;  // emitted from the coordinate table
      default: {
        out << op_name(ins.op);
        for (uint32_t q : ins.qubits) out << " " << q;
        out << "\n";
        break;
      }
    }
  }
  return out.str();
}

namespace {

Op op_from_name(const std::string& name, int line) {
  static const std::map<std::string, Op> table = {
      {"CX", Op::CNOT},         {"CNOT", Op::CNOT},       {"CXSWAP", Op::CXSWAP},
      {"SWAPCX", Op::SWAPCX},   {"H", Op::H},             {"R", Op::R},
      {"RX", Op::RX},           {"MR", Op::MR},           {"MRX", Op::MRX},
      {"TICK", Op::Tick},       {"DEPOLARIZE1", Op::Depolarize1},
      {"DEPOLARIZE2", Op::Depolarize2},                   {"X_ERROR", Op::XError},
      {"Z_ERROR", Op::ZError},  {"DETECTOR", Op::Detector},
      {"OBSERVABLE_INCLUDE", Op::ObservableInclude},      {"QUBIT_COORDS", Op::QubitCoords},
  };
  auto it = table.find(name);
  if (it == table.end())
    throw std::runtime_error("line " + std::to_string(line) + ": unknown instruction '" + name + "'");
  return it->second;
}

}  // namespace

Circuit import_text(const std::string& text) {
  Circuit c;
  int line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    size_t sp = line.find_first_of(" (");
    std::string name = sp == std::string::npos ? line : line.substr(0, sp);
    Instruction ins;
    ins.op = op_from_name(name, line_no);
    std::string rest = sp == std::string::npos ? "" : line.substr(sp);
    rest = trim(rest);
    if (!rest.empty() && rest[0] == '(') {
      size_t close = rest.find(')');
      if (close == std::string::npos)
        throw std::runtime_error("line " + std::to_string(line_no) + ": missing ')'");
      for (auto& tok : split(rest.substr(1, close - 1), ',')) {
        tok = trim(tok);
        if (!tok.empty()) ins.args.push_back(std::stod(tok));
      }
      rest = trim(rest.substr(close + 1));
    }
    for (auto& tok : split(rest, ' ')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      if (tok.rfind("rec[", 0) == 0) {
        if (tok.back() != ']')
          throw std::runtime_error("line " + std::to_string(line_no) + ": bad record target " + tok);
        ins.rec.push_back(int32_t(std::stol(tok.substr(4, tok.size() - 5))));
      } else {
        try {
          ins.qubits.push_back(uint32_t(std::stoul(tok)));
        } catch (const std::exception&) {
          throw std::runtime_error("line " + std::to_string(line_no) + ": bad qubit target '" + tok + "'");
        }
      }
    }
    if (ins.op == Op::QubitCoords) {
      if (ins.args.size() != 2 || ins.qubits.size() != 1)
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad QUBIT_COORDS");
      c.coords[ins.qubits[0]] = Coord{int(ins.args[0]), int(ins.args[1])};
      continue;
    }
    c.append(std::move(ins));
  }
  return c;
}

}  // namespace dsc
