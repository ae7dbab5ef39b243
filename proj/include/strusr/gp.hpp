#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "strusr/attribution.hpp"
#include "strusr/expr.hpp"
#include "strusr/pde.hpp"
#include "strusr/prior.hpp"

namespace strusr {

struct GpConfig {
    std::size_t population = 500;
    double p_cross = 0.9;
    double p_mut = 0.15;
    double lambda = 1.0;
    double beta = 0.5;
    double temperature = 1.0;
    int taylor_order = 5;
    std::size_t anchors = 8;
    std::size_t collocation = 512;
    std::size_t tournament = 5;
    std::size_t elitism = 2;
    std::size_t max_generations = 200;
    std::size_t patience = 40;
    bool tune_constants = true;
    std::size_t tune_budget = 200;
    std::size_t tune_top = 5;
    std::size_t max_depth = 10;
    std::size_t max_size = 80;
    int init_max_depth = 6;
    int mutation_depth = 3;
    /// Leading collocation points used for masking attribution.
    std::size_t attribution_points = 128;
    /// Weights of the residual and condition-data terms. The defaults give
    /// F = L_phys + lambda * L_Taylor.
    double physics_weight = 1.0;
    double condition_weight = 0.0;
    std::size_t condition_points = 256;
    /// Sensitivity-weighted subtree choice; false samples sites uniformly.
    bool guided = true;
    /// Constant-fold new offspring.
    bool simplify = true;
    std::size_t threads = 1;
    double fitness_threshold = 1e-12;
    std::uint64_t seed = 0;

    TreeLimits limits() const { return {max_depth, max_size}; }
    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    nlohmann::json to_json() const;
    /// Overrides the fields present in j; unknown keys throw.
    void apply_json(const nlohmann::json& j);
};

struct Losses {
    double phys = 0.0;
    double taylor = 0.0;
    double condition = 0.0;
    double fitness = 0.0;
};

struct Individual {
    Expr expr;
    std::optional<Losses> losses;
    std::shared_ptr<const SensitivityReport> report;
    std::size_t birth = 0;
    /// Constants already polished by tune_constants.
    bool tuned = false;

    Individual() = default;
    explicit Individual(Expr e, std::size_t generation = 0) : expr(std::move(e)), birth(generation) {}

    /// Replaces the expression and drops every cached quantity.
    void set_expr(Expr e);
    bool evaluated() const { return losses.has_value(); }
    /// Throws std::logic_error when the losses have not been computed.
    double fitness() const;
};

/// Everything a run evaluates candidates against: the problem, optional
/// prior, collocation points, attribution subset and condition samples.
class FitnessContext {
public:
    FitnessContext(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg, Rng& rng);
    FitnessContext(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg, PointSet collocation);

    const PdeProblem& problem() const { return *problem_; }
    const TaylorPrior* prior() const { return prior_; }
    const CollocationSet& collocation() const { return collocation_; }

    Losses evaluate(const Expr& f) const;
    SensitivityReport attribute(const Expr& f) const;

private:
    const PdeProblem* problem_;
    const TaylorPrior* prior_;
    double lambda_;
    double beta_;
    double physics_weight_;
    double condition_weight_;
    CollocationSet collocation_;
    CollocationSet attribution_;
    std::optional<ConditionSamples> conditions_;
};

/// L_phys + lambda * L_Taylor; the Taylor term is dropped without a prior.
double fitness(const Individual& ind, const TaylorPrior* prior, const PdeProblem& problem, const PointSet& points,
               double lambda);

/// Best of k distinct individuals drawn uniformly; k >= size scans everyone. Ties go to the lower
/// complexity, then to the lower index. Every individual must be evaluated.
std::size_t tournament_select(const std::vector<Individual>& population, std::size_t k, Rng& rng);

/// Site choice for one parent: sensitivity-weighted when a report is given,
/// uniform otherwise.
SubtreeHandle sample_site(const Expr& e, const SensitivityReport* report, double temperature, Rng& rng);

/// Swaps one sampled subtree of each parent. A rejected swap is retried up to
/// five more times; after that the parents are returned unchanged.
std::pair<Expr, Expr> crossover(const Individual& a, const Individual& b, double temperature,
                                const TreeLimits& limits, Rng& rng);

/// Replaces one sampled subtree with random_expr(lib, depth). Retries like
/// crossover and returns the parent when every attempt breaks the limits.
Expr mutate(const Individual& ind, const SymbolLibrary& lib, double temperature, const TreeLimits& limits,
            int depth, Rng& rng);

/// Nelder-Mead over the constants of f. Never returns a worse expression.
Expr tune_constants(const Expr& f, const std::function<double(const Expr&)>& objective, std::size_t budget);
Expr tune_constants(const Expr& f, const PdeProblem& problem, const TaylorPrior* prior, const PointSet& points,
                    double lambda, std::size_t budget);

struct GenerationRecord {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_taylor_loss = 0.0;
    double best_phys_loss = 0.0;
    std::size_t best_complexity = 0;
    std::string best_expr;
};

/// One JSON object per line, doubles at 17 significant digits.
std::string to_jsonl(const GenerationRecord& r);

struct EvolveOptions {
    /// Starting population; random when empty.
    std::vector<Expr> initial;
    /// Prior used only for the logged Taylor loss when the fitness prior is
    /// absent or lambda is 0.
    const TaylorPrior* monitor_prior = nullptr;
    /// Called after every generation.
    std::function<void(const GenerationRecord&)> on_generation;
};

struct EvolveResult {
    Individual best;
    std::vector<GenerationRecord> log;
    /// "threshold", "stagnation" or "max-generations".
    std::string termination;
    std::size_t evaluations = 0;
};

EvolveResult evolve(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg,
                    const EvolveOptions& options = {});

/// SplitMix64-derived seed for an independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace strusr
