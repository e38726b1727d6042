#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wforget::eval {

// Empirical check of the recovery step's second-order guarantee: along the
// projected direction, the anchored forget loss and the remote loss move at
// most O(eta^2) (log-log slope across the eta grid close to 2), while the
// adjacent loss strictly decreases for small enough eta.
struct Prop1Config {
  std::size_t instances = 20;       // clean instances required
  std::vector<double> etas = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  double alpha = 0.5;
  double min_slope = 1.8;           // acceptance floor for both slopes
  std::uint64_t seed = 0;
  std::size_t max_attempts = 400;   // redraw budget for degenerate instances
};

struct Prop1Instance {
  double slope_forget = 0.0;
  double slope_remote = 0.0;
  double adjacent_eta = 0.0;        // step at which strict decrease held
  bool adjacent_decreased = false;
};

struct Prop1Report {
  std::vector<Prop1Instance> instances;
  std::size_t attempts = 0;
  double min_slope = 0.0;           // over both losses, all instances
  bool passed = false;
};

// Random full-batch tanh instances; numerically degenerate draws (vanishing
// projected direction, sort ties in the anchored term, sub-noise deltas) are
// redrawn, but slope shortfalls and non-decreasing adjacent losses are
// reported as failures, never filtered.
Prop1Report verify_prop1(const Prop1Config& cfg = {});

// Randomized equivalence of the sorted closed form for the squared transport
// distance against brute-force search over all pairings.
struct W2OracleReport {
  std::size_t trials = 0;
  double max_abs_diff = 0.0;
  bool passed = false;
};

W2OracleReport verify_w2_oracle(std::size_t trials = 500, std::uint64_t seed = 0);

}  // namespace wforget::eval
