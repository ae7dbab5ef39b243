#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "strusr/expr.hpp"
#include "strusr/pde.hpp"
#include "strusr/prior.hpp"

namespace strusr {

struct Sensitivity {
    SubtreeHandle handle;
    double structural = 0.0;
    double residual = 0.0;
    double total = 0.0;
};

/// Masking sensitivities of every subtree, in pre-order.
struct SensitivityReport {
    std::vector<Sensitivity> entries;
    double beta = 0.5;
    double base_taylor_loss = 0.0;
    double base_phys_loss = 0.0;
    /// Standardisation applied before the softmax: z = (total - shift) / scale.
    /// scale is 0 when the totals are (numerically) all equal.
    double shift = 0.0;
    double scale = 0.0;

    std::size_t size() const { return entries.size(); }
};

/// Standardisation record for a list of totals: mean and sample standard
/// deviation, with scale 0 below 1e-12 or for a single entry.
void standardize(SensitivityReport& report);

/// Delta_struct = L_Taylor(f masked at s) - L_Taylor(f), Delta_res likewise for
/// the residual loss, Delta_total = beta * Delta_res + (1 - beta) * Delta_struct.
/// Without a prior the structural deltas are 0. Throws std::invalid_argument
/// for beta outside [0, 1].
SensitivityReport sensitivities(const Expr& f, const TaylorPrior* prior, const CollocationSet& points, double beta);
SensitivityReport sensitivities(const Expr& f, const TaylorPrior& prior, const PdeProblem& problem,
                                const PointSet& points, double beta);

/// p_j proportional to exp(-z_j / temperature) over the standardised totals;
/// uniform when the report's scale is 0. Every entry stays strictly positive.
std::vector<double> sampling_distribution(const SensitivityReport& report, double temperature);

/// Index drawn from a probability vector.
std::size_t sample_index(std::span<const double> probabilities, Rng& rng);

}  // namespace strusr
