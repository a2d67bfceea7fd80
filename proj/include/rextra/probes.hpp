#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rextra/manifold.hpp"
#include "rextra/topology.hpp"

namespace rextra {

/// Result of one randomized inequality check: `worst` is the extremal
/// measured value over `samples` draws, `bound` the value it must stay on the
/// right side of. `pass` records worst <= bound (or >= for lower bounds,
/// already folded in by the probe).
struct ProbeResult {
  std::string name;
  int samples = 0;
  double worst = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Geometry of the projection near St(d, r): second-order accuracy of the
/// tangent step, nonexpansiveness inside the tube of radius 1/2, boundedness
/// of projected gradients, curvature constant of the polar retraction.
std::vector<ProbeResult> manifold_probe_suite(int samples, std::uint64_t seed);

/// Mixing-matrix structure on random connected graphs: row sums, symmetry,
/// spectrum inside (-1, 1], contraction of the consensus error by sigma2.
std::vector<ProbeResult> mixing_probe_suite(int samples, std::uint64_t seed);

/// Inequalities the convergence argument leans on, sampled over random
/// stacks: the consensus-gradient bound, the tracking identity, descent of
/// the projected step, and contraction of the coupled error recursion at
/// theta = 1/2.
std::vector<ProbeResult> lemma_probe_suite(int samples, std::uint64_t seed);

std::string format_probe_table(const std::vector<ProbeResult>& results);

}  // namespace rextra
