#pragma once

#include <string>
#include <vector>

namespace sngp::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Minimax and max-entropy enumeration (K = 2, 3; step 0.05; Brier and log),
/// strict propriety on random pairs, mixture simplex preservation.
std::vector<Check> theory_suite();
/// Distance-ratio bounds (1 - c)^L <= ratio <= (1 + c)^L on a spectrally
/// normalized depth-3 residual stack, and sigma_max <= c per layer.
std::vector<Check> lipschitz_suite();
/// RFF inner products against the RBF kernel (D = 4096, l = 1).
std::vector<Check> kernel_suite();

std::vector<Check> run_suite(const std::string& name);

}  // namespace sngp::verify
