#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dsc/geom.hpp"

namespace dsc {

enum class Op : uint8_t {
  CNOT,
  CXSWAP,
  SWAPCX,
  H,
  R,
  RX,
  MR,
  MRX,
  Tick,
  Depolarize1,
  Depolarize2,
  XError,
  ZError,
  Detector,
  ObservableInclude,
  QubitCoords,
};

bool is_two_qubit(Op op);
bool is_measurement(Op op);
bool is_reset(Op op);
bool is_noise(Op op);
const char* op_name(Op op);

struct Instruction {
  Op op;
  std::vector<uint32_t> qubits;     // qubit ids
  std::vector<int32_t> rec;         // backwards record offsets (negative)
  std::vector<double> args;         // probability or coordinates
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Circuit {
  std::vector<Instruction> instructions;
  std::map<uint32_t, Coord> coords;  // qubit id -> lattice coordinate

  uint32_t num_qubits() const;
  size_t num_measurements() const;
  size_t num_detectors() const;
  size_t num_observables() const;
  size_t count_op(Op op) const;

  void append(Instruction ins) { instructions.push_back(std::move(ins)); }
  void tick() { instructions.push_back({Op::Tick, {}, {}, {}}); }

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

// Checks the tick discipline: per tick a qubit sees at most one gate, or a
// measurement followed by resets or an H. Throws on violation.
void validate_ticks(const Circuit& c);

std::string export_text(const Circuit& c);
Circuit import_text(const std::string& text);  // throws with line numbers

}  // namespace dsc
