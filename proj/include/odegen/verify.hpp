#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "odegen/lipfun.hpp"

namespace odegen::verify {

struct SuiteResult {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    // Smallest slack (bound - value) seen; negative means a violation.
    double worst_margin = 0.0;
    std::vector<std::string> notes;

    bool passed() const { return violations == 0; }
    std::string summary() const;
};

// ODE output and parameter-Lipschitz bounds on random (theta, theta~, x),
// m <= 4, d <= 8, rk4 at 512 steps.
SuiteResult run_prop2(std::size_t samples, std::uint64_t seed);

// Residual-network analogue on random (w, w~, x), projections disabled.
SuiteResult run_prop5(std::size_t samples, std::uint64_t seed);

// Embedding isometry/linearity/Lipschitz transfer plus the Euler equivalence
// between the embedded flow and the residual forward pass.
SuiteResult run_isometry(std::size_t samples, std::uint64_t seed);

// Reverse-mode gradients of tanh models against central finite differences.
SuiteResult run_gradients(std::size_t samples, std::uint64_t seed);

// Builds the (R, K, eps) cover, then checks that random admissible functions
// all sit within eps and that the measured log size respects the bound.
SuiteResult run_cover(double R, double K, double eps, std::size_t samples,
                      std::uint64_t seed);

// Random point in the l2 ball of the given radius.
std::vector<double> random_ball_point(std::size_t dim, double radius, Rng& rng);

SuiteResult run_suite_by_name(const std::string& name, std::size_t samples,
                              std::uint64_t seed);

}  // namespace odegen::verify
