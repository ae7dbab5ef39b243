#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "strusr/gp.hpp"
#include "strusr/pinn.hpp"
#include "strusr/prior.hpp"

namespace strusr {

enum class PriorKind { Analytic, Pinn, PinnCheckpoint };

const char* to_string(PriorKind k);
PriorKind prior_kind_from_string(const std::string& s);

struct RunSpec {
    std::string problem;
    PriorKind prior = PriorKind::Analytic;
    /// Network to load for PriorKind::PinnCheckpoint.
    std::filesystem::path checkpoint;
    GpConfig gp;
    TrainConfig pinn;
    std::size_t repetitions = 10;
    /// Repetition i runs with seed + i.
    std::uint64_t seed = 0;
    /// Repetitions run concurrently.
    std::size_t jobs = 1;
    std::filesystem::path out;

    /// Throws std::invalid_argument for an unknown problem, zero repetitions
    /// or zero jobs.
    void validate() const;
};

struct RunRecord {
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    std::string best_expr;
    /// NaN when the problem has no ground truth.
    double mae = 0.0;
    double fitness = 0.0;
    double phys_loss = 0.0;
    double taylor_loss = 0.0;
    std::size_t complexity = 0;
    std::size_t generations = 0;
    std::string termination;
    double wall_seconds = 0.0;
    std::vector<GenerationRecord> log;
};

struct RunReport {
    std::vector<RunRecord> runs;
    nlohmann::json summary;
};

/// Summary statistics over the runs: mean and sample standard deviation of
/// the MAE, mean complexity, mean final fitness. Wall time is kept out so
/// that the summary is reproducible byte for byte.
nlohmann::json summarize(const std::string& problem, const std::vector<RunRecord>& runs);

/// Builds the prior for one repetition: anchors from the repetition seed,
/// coefficients from the ground truth or the network.
TaylorPrior build_prior(const PdeProblem& problem, const JetSource& source, PriorSource tag, std::uint64_t seed,
                        const GpConfig& gp);

/// Trains or loads the network when the spec asks for a PINN prior.
std::optional<Mlp> prepare_network(const RunSpec& spec, const PdeProblem& problem);

/// Runs every repetition and writes, under spec.out:
///   run_<i>.jsonl   per-generation log
///   run_<i>.json    best expression, metrics, config echo and seed
///   prior_<i>.json  the prior used
///   summary.csv / summary.json
///   timing.csv      wall time per run
///   pinn.json, pinn_loss.csv when a network is trained
RunReport run(const RunSpec& spec);

/// One full pipeline per K; writes ablation_k.csv / ablation_k.json with
/// the median and mean final structure loss and MAE per K.
nlohmann::json ablation_k(const RunSpec& spec, const std::vector<int>& k_values);

/// The three search modes of the structure-loss comparison. Every mode logs
/// the best individual's Taylor loss against the same prior; traces are
/// divided by the largest value seen across the three traces of a seed.
///   vanilla   fits the condition data only, uniform site choice
///   pi-gp     residual plus condition data, lambda 0, uniform site choice
///   strusr    the configured hybrid fitness with guided operators
nlohmann::json ablation_modes(const RunSpec& spec);

/// Mode configuration derived from a base config.
GpConfig mode_config(const std::string& mode, const GpConfig& base);

/// Name, dimension, box, operator, condition descriptions, ground truth and
/// self-check verdict of every registered problem.
nlohmann::json registry_json();

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace strusr
