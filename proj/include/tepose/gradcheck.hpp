#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tepose/train.hpp"

namespace tepose {

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  long coords_checked = 0;
  bool pass = false;
};

// |a - n| / max(|a|, |n|, 1e-3)
double gradcheck_rel_err(double analytic, double numeric);

struct GradProbe {
  std::function<double()> loss;   // evaluated with the current parameters
  std::vector<TensorRef> values;  // perturbation targets
  std::vector<TensorRef> analytic;  // matching analytic gradients
};

// Central finite differences on randomly sampled coordinates of each
// tensor; updates the running maximum relative error.
void probe_gradients(const GradProbe& probe, Rng& rng, int coords_per_tensor,
                     double step, double& max_rel_err, long& coords_checked);

// One named suite over `instances` random instantiations of an operation.
using InstanceFn = std::function<GradProbe(Rng&)>;
GradCheckResult run_instances(const std::string& name, int instances,
                              const InstanceFn& make, Rng& rng,
                              int coords_per_tensor = 6, double step = 1e-5,
                              double tol = 1e-5);

// Finite-difference suites for every learnable operation. Deterministic
// given the seed.
std::vector<GradCheckResult> run_gradcheck_suites(std::uint64_t seed,
                                                  int instances = 20);

}  // namespace tepose
