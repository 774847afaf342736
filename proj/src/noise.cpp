#include "dsc/noise.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"

namespace dsc {

void NoiseBudget::validate() const {
  for (double p : {p2, p1, p_idle, p_meas, p_reset})
    if (p < 0 || p > 1) throw std::invalid_argument("noise probability out of [0,1]");
}

std::string NoiseBudget::json() const {
  nlohmann::ordered_json j;
  j["p2"] = p2;
  j["p1"] = p1;
  j["p_idle"] = p_idle;
  j["p_meas"] = p_meas;
  j["p_reset"] = p_reset;
  return j.dump(2) + "\n";
}

NoiseBudget NoiseBudget::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  NoiseBudget b;
  b.p2 = j.at("p2").get<double>();
  b.p1 = j.at("p1").get<double>();
  b.p_idle = j.at("p_idle").get<double>();
  b.p_meas = j.at("p_meas").get<double>();
  b.p_reset = j.at("p_reset").get<double>();
  b.validate();
  return b;
}

Circuit apply_noise(const Circuit& clean, const NoiseBudget& budget, bool perfect_init_final) {
  budget.validate();
  // split into ticks
  std::vector<std::vector<Instruction>> ticks(1);
  std::vector<Instruction> trailer;  // detectors and observables at the end
  for (const auto& ins : clean.instructions) {
    if (ins.op == Op::Tick) ticks.emplace_back();
    else if (ins.op == Op::Detector || ins.op == Op::ObservableInclude) trailer.push_back(ins);
    else ticks.back().push_back(ins);
  }
  while (!ticks.empty() && ticks.back().empty()) ticks.pop_back();

  std::set<uint32_t> all_qubits;
  for (const auto& tk : ticks)
    for (const auto& ins : tk)
      for (uint32_t q : ins.qubits) all_qubits.insert(q);

  size_t last_tick = ticks.size() - 1;
  Circuit out;
  out.coords = clean.coords;
  for (size_t t = 0; t < ticks.size(); ++t) {
    bool init_tick = t == 0;
    bool final_tick = t == last_tick;
    bool perfect = perfect_init_final && (init_tick || final_tick);
    std::set<uint32_t> busy;
    for (const auto& ins : ticks[t]) {
      if (is_measurement(ins.op) && !perfect) {
        Op flip = ins.op == Op::MR ? Op::XError : Op::ZError;
        if (budget.p_meas > 0) out.append({flip, ins.qubits, {}, {budget.p_meas}});
      }
      out.append(ins);
      for (uint32_t q : ins.qubits) busy.insert(q);
      if (perfect) continue;
      switch (ins.op) {
        case Op::CNOT:
        case Op::CXSWAP:
        case Op::SWAPCX:
          if (budget.p2 > 0) out.append({Op::Depolarize2, ins.qubits, {}, {budget.p2}});
          break;
        case Op::H:
          if (budget.p1 > 0) out.append({Op::Depolarize1, ins.qubits, {}, {budget.p1}});
          break;
        case Op::R:
        case Op::MR:
          if (budget.p_reset > 0) out.append({Op::XError, ins.qubits, {}, {budget.p_reset}});
          break;
        case Op::RX:
        case Op::MRX:
          if (budget.p_reset > 0) out.append({Op::ZError, ins.qubits, {}, {budget.p_reset}});
          break;
        default:
          break;
      }
    }
    if (!perfect && budget.p_idle > 0) {
      std::vector<uint32_t> idle;
      for (uint32_t q : all_qubits)
        if (!busy.count(q)) idle.push_back(q);
      if (!idle.empty()) out.append({Op::Depolarize1, idle, {}, {budget.p_idle}});
    }
    if (t != last_tick) out.tick();
  }
  for (auto& ins : trailer) out.append(std::move(ins));
  return out;
}

}  // namespace dsc
