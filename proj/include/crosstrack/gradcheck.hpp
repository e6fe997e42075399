#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "crosstrack/matrix.hpp"

namespace crosstrack {

/// Central finite differences of a scalar function at x, step h per entry.
std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x, double h = 1e-5);

/// Relative error between an analytic gradient and its finite-difference
/// estimate: ||g - g_fd|| / max(||g||, ||g_fd||, eps).
double gradient_rel_error(const std::vector<double>& analytic,
                          const std::vector<double>& numeric);

struct GradCheckReport {
    std::size_t instances = 0;
    std::size_t failures = 0;
    double worst_rel_error = 0.0;

    bool passed() const { return failures == 0; }
};

/// Each suite draws #instances random problems (shapes up to 8x8) and
/// compares the analytic gradient against central differences at 1e-4
/// relative tolerance.
GradCheckReport check_cross_softmax_grad(std::uint64_t seed, std::size_t instances = 100);
GradCheckReport check_fast_focal_grad(std::uint64_t seed, std::size_t instances = 100);
GradCheckReport check_composed_grad(std::uint64_t seed, std::size_t instances = 100);
GradCheckReport check_loss_balance_grad(std::uint64_t seed, std::size_t instances = 100);

/// Runs every suite, printing one line per suite. True iff all pass.
bool run_all_gradchecks(std::uint64_t seed, std::ostream& log);

} // namespace crosstrack
