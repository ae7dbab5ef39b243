#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "strusr/jet_source.hpp"
#include "strusr/pde.hpp"
#include "strusr/point_set.hpp"

namespace strusr {

enum class PriorSource { AnalyticOracle, Pinn };

const char* to_string(PriorSource s);
PriorSource prior_source_from_string(const std::string& s);

/// Per-axis Taylor coefficient vectors of a reference solution at a set of
/// anchor points. Coefficients are stored anchor-major, then axis, then
/// order: anchors x axes x (K + 1).
class TaylorPrior {
public:
    TaylorPrior(PointSet anchors, int order, std::vector<double> coefficients, PriorSource source,
                std::size_t dropped_anchors = 0);

    const PointSet& anchors() const { return anchors_; }
    int order() const { return order_; }
    std::size_t dimension() const { return anchors_.dimension(); }
    std::size_t anchor_count() const { return anchors_.size(); }
    PriorSource source() const { return source_; }
    /// Anchors discarded during extraction because the source produced an
    /// invalid jet there.
    std::size_t dropped_anchors() const { return dropped_; }

    std::span<const double> coefficients(std::size_t anchor, std::size_t axis) const;
    const std::vector<double>& all_coefficients() const { return coefficients_; }

    nlohmann::json to_json() const;
    static TaylorPrior from_json(const nlohmann::json& j);

    void save(const std::filesystem::path& path) const;
    static TaylorPrior load(const std::filesystem::path& path);

private:
    PointSet anchors_;
    int order_;
    std::vector<double> coefficients_;
    PriorSource source_;
    std::size_t dropped_;
};

/// n points drawn uniformly from the domain box shrunk by 5% of each side.
PointSet select_anchors(const PdeProblem& problem, std::size_t n, Rng& rng);

/// Fills the coefficient array with taylor_coeffs per anchor and axis.
/// Anchors with any invalid jet are dropped; throws std::runtime_error when
/// none survive.
TaylorPrior extract_prior(const JetSource& source, const PointSet& anchors, int order, PriorSource tag);

/// Mean over (anchor, axis) pairs of sum_k (c_k(f) - c_k(prior))^2.
/// Returns kPenalty when f yields an invalid jet at any anchor.
double taylor_loss(const JetSource& f, const TaylorPrior& prior);
double taylor_loss(const Expr& f, const TaylorPrior& prior);

}  // namespace strusr
