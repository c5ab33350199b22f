#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "maple/agent.hpp"

namespace maple {

struct GradCheckCase {
  std::string name;
  double max_rel_err = 0.0;
  double tol = 1e-4;
  bool pass() const { return max_rel_err < tol; }
};

// Central finite differences (h = 1e-5) against the analytic gradients, one
// case per loss surface, aggregated over `instances` randomly built agents
// and minibatches. Relative error uses max(1e-3, |a|, |n|) in the
// denominator so near-zero coordinates are judged absolutely.
std::vector<GradCheckCase> run_gradient_checks(uint64_t seed, int instances,
                                               std::ostream* log);

// Convenience wrapper: true when every case passes.
bool gradient_checks_ok(uint64_t seed, int instances, std::ostream* log);

}  // namespace maple
