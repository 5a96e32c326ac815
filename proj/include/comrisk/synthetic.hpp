#pragma once

#include <cstddef>
#include <cstdint>

#include "comrisk/ekg.hpp"

namespace comrisk {

/// Planted-signal graph generator.
///
/// About a third of the industries are distressed (at least one). Every
/// enterprise has a latent distress a = N(0, 1) + 0.75 [industry distressed],
/// and its attributes and lawsuits are noisy functions of a (low capital,
/// recent lost lawsuits for high a, dated closer to the observation time as
/// a grows). The label thresholds
///   s * R + (1 - s) * noise,   R = [a] + [industry distressed] + [investor mean of a]
/// (each bracket standardized and present only when its channel is on) at
/// the quantile giving `bankrupt_fraction`. Area and stakeholder hyperedges,
/// person links, branch edges and old lawsuits carry no signal.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_enterprises = 60;
  std::size_t n_persons = 0;  // 0 means n_enterprises / 2
  double signal_strength = 1.0;
  bool intra_channel = true;      // own latent
  bool hyper_channel = true;      // industry distress
  bool contagion_channel = true;  // holder_investor neighbors
  double bankrupt_fraction = 0.5;
};

/// Throws ConfigError for fewer than 10 enterprises, a strength outside
/// [0, 1] or a fraction outside (0, 1).
EnterpriseKG gen_synthetic(const SynthConfig& cfg);

/// Small graph for gradient checks: `n_nodes` nodes of which max(3, n/4)
/// are persons, relations manager, shareholder and holder_investor only,
/// industry and area hyperedges only. Needs n_nodes >= 9; built by the same
/// generator below its usual size floor.
EnterpriseKG gen_gradcheck_graph(std::size_t n_nodes, std::uint64_t seed);

}  // namespace comrisk
