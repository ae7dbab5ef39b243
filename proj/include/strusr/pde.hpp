#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strusr/expr.hpp"
#include "strusr/expr_text.hpp"
#include "strusr/jet_source.hpp"
#include "strusr/point_set.hpp"

namespace strusr {

/// Loss value standing in for a non-finite evaluation. It also caps every
/// per-point term so that fitness stays totally ordered.
inline constexpr double kPenalty = 1e12;

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

/// coefficient * d^order u / d(axis)^order
struct DerivativeTerm {
    std::size_t axis = 0;
    int order = 1;
    double coefficient = 1.0;
};

enum class ConditionKind { Initial, Boundary };

/// Deterministic data: u = target on the initial slice or on the spatial
/// boundary faces.
struct Condition {
    ConditionKind kind = ConditionKind::Initial;
    Expr target;
    std::string description;
};

/// A benchmark PDE. The residual operator is
///   N[u](x) = sum_terms c * D u + reaction_coefficient * u^reaction_power - source(x)
/// Spatial axes come first; the time axis, when present, is last.
struct PdeProblem {
    std::string name;
    std::size_t spatial_dim = 1;
    bool has_time = false;
    std::vector<Interval> box;
    std::vector<DerivativeTerm> terms;
    double reaction_coefficient = 0.0;
    int reaction_power = 1;
    Expr source = Expr::constant(0.0);
    std::vector<Condition> conditions;
    std::optional<Expr> ground_truth;
    /// Set by the operator self-check when the registry is built.
    bool truth_verified = false;
    double self_check_residual = 0.0;
    std::string operator_text;

    std::size_t dimension() const { return spatial_dim + (has_time ? 1 : 0); }
    std::optional<std::size_t> time_axis() const
    {
        return has_time ? std::optional<std::size_t>(spatial_dim) : std::nullopt;
    }
    VariableNaming naming() const { return VariableNaming{time_axis()}; }

    /// One request per differentiated axis at the highest order it needs.
    std::vector<JetRequest> jet_requests() const;

    /// Throws std::invalid_argument when the box or terms are malformed.
    void validate() const;
};

/// The eight benchmark problems: Advection, Diffusion, Poisson2D, Poisson3D,
/// Heat2D, Heat3D, Wave2D, Wave3D.
const std::vector<PdeProblem>& registry();

/// Throws std::invalid_argument for an unknown name.
const PdeProblem& find_problem(std::string_view name);

/// Builds a problem and runs the operator self-check on its ground truth.
PdeProblem finalize_problem(PdeProblem p);

/// Uniform points in the domain box.
PointSet sample_collocation(const PdeProblem& problem, std::size_t n, Rng& rng);

/// Uniform points in the box shrunk by a relative margin on every side.
PointSet sample_interior(const PdeProblem& problem, std::size_t n, double margin, Rng& rng);

struct ConditionSamples {
    PointSet points;
    std::vector<double> targets;
};

/// Points drawn from the deterministic conditions, each condition equally
/// likely; boundary samples pick a spatial face uniformly.
ConditionSamples sample_conditions(const PdeProblem& problem, std::size_t n, Rng& rng);

/// Collocation points with the source term evaluated once.
class CollocationSet {
public:
    CollocationSet(const PdeProblem& problem, PointSet points);

    const PdeProblem& problem() const { return *problem_; }
    const PointSet& points() const { return points_; }
    const std::vector<double>& source_values() const { return source_; }
    const std::vector<JetRequest>& requests() const { return requests_; }

    /// Pointwise residuals; NaN where the candidate's jets are invalid.
    std::vector<double> residuals(const JetSource& f) const;

    /// Mean of squared residuals; non-finite or oversized terms count as
    /// kPenalty.
    double loss(const JetSource& f) const;

private:
    const PdeProblem* problem_;
    PointSet points_;
    std::vector<double> source_;
    std::vector<JetRequest> requests_;
};

double phys_loss(const JetSource& f, const PdeProblem& problem, const PointSet& points);
double phys_loss(const Expr& f, const PdeProblem& problem, const PointSet& points);

/// Mean squared mismatch to the condition targets, capped like phys_loss.
double condition_loss(const JetSource& f, const ConditionSamples& samples);

/// Uniform grid including the box corners, `per_axis` points per axis reduced
/// until the total stays within `cap`.
PointSet mae_grid(const PdeProblem& problem, std::size_t per_axis = 32, std::size_t cap = 20000);

/// Mean absolute error against the ground truth on mae_grid. Throws
/// std::invalid_argument when the problem has no ground truth; returns
/// infinity when f is non-finite anywhere on the grid.
double mae(const JetSource& f, const PdeProblem& problem, std::size_t per_axis = 32);
double mae(const Expr& f, const PdeProblem& problem, std::size_t per_axis = 32);

struct SelfCheck {
    double max_abs_residual = 0.0;
    bool passed = false;
};

/// |N[u_true]| at n uniform points must stay below tolerance.
SelfCheck self_check(const PdeProblem& problem, std::size_t n, Rng& rng, double tolerance = 1e-6);

}  // namespace strusr
