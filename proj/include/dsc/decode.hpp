#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsc/circuit.hpp"

namespace dsc {

struct Mechanism {
  double p = 0;
  std::vector<uint32_t> dets;  // sorted detector ids
  uint32_t obs = 0;            // observable flip mask
};

struct Dem {
  size_t num_dets = 0;
  size_t num_obs = 0;
  std::vector<Mechanism> mechanisms;
};

// Propagates every elementary error of each noise channel to its detector
// and observable signature; identical signatures merge with p+q-2pq.
Dem extract_dem(const Circuit& noisy);

std::string dem_text(const Dem& dem);
Dem dem_from_text(const std::string& text);

struct GraphEdge {
  int u = 0, v = 0;  // node ids; num_dets acts as the boundary node
  double p = 0;
  int weight = 1;  // integer growth length
  uint32_t obs = 0;
};

struct MatchingGraph {
  int num_dets = 0;
  int num_obs = 0;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> adj;  // node -> edge indices
  double dropped_mass = 0;            // probability mass of undecomposable hyperedges
  int boundary() const { return num_dets; }
};

// Decomposes mechanisms into graph edges; hyperedges split against existing
// two-detector signatures, leftovers are dropped and accounted.
MatchingGraph build_graph(const Dem& dem);

// Weighted union-find decoder with peeling.
class UfDecoder {
 public:
  explicit UfDecoder(const MatchingGraph& g) : g_(&g) {}
  uint32_t decode(const std::vector<uint8_t>& syndrome) const;

 private:
  const MatchingGraph* g_;
};

// Exact maximum-likelihood oracle over all subsets (meet in the middle);
// refuses DEMs beyond max_mechanisms.
uint32_t decode_ml(const Dem& dem, const std::vector<uint8_t>& syndrome,
                   size_t max_mechanisms = 25);

// Smallest number of graph edges forming an undetectable observable flip,
// or cap when none is found below it.
struct MinWeightResult {
  bool found = false;
  int weight = 0;
};
MinWeightResult min_weight_logical(const Dem& dem, int weight_cap);

}  // namespace dsc
