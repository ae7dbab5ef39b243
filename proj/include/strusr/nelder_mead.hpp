#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace strusr {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Nelder-Mead simplex minimisation with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). The initial
/// simplex offsets coordinate i by steps[i]. Stops after max_evaluations
/// objective calls, or earlier when the simplex values spread less than
/// tolerance. The returned point is never worse than x0.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective, std::vector<double> x0,
                          std::span<const double> steps, std::size_t max_evaluations, double tolerance = 0.0);

}  // namespace strusr
