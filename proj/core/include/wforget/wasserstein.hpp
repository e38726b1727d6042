#pragma once

#include <vector>

namespace wforget::lossdist {

// Squared 2-Wasserstein distance between two empirical distributions of equal
// size on the real line. The optimal coupling pairs the sorted samples, so the
// value is the mean squared gap between order statistics.
double w2_squared(std::vector<double> a, std::vector<double> b);

// The same quantity as an explicit minimum over all pairings. Factorial cost,
// guarded to small inputs; exists purely as a cross-check for w2_squared.
double w2_squared_bruteforce(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace wforget::lossdist
