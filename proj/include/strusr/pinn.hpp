#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "strusr/jet_source.hpp"
#include "strusr/pde.hpp"

namespace strusr {

/// Fully connected tanh network with a linear output. Inputs are mapped
/// affinely from the problem box onto [-1, 1] before the first layer.
class Mlp final : public JetSource {
public:
    /// layer_sizes = {input, hidden..., 1}. Parameters start at zero and the
    /// input map is the identity.
    explicit Mlp(std::vector<std::size_t> layer_sizes);

    /// Xavier-normal weights, zero biases, inputs scaled from the box.
    static Mlp initialized(const PdeProblem& problem, const std::vector<std::size_t>& hidden, Rng& rng);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t input_dimension() const { return sizes_.front(); }
    std::size_t layer_count() const { return weights_.size(); }
    std::size_t parameter_count() const;

    Eigen::MatrixXd& weight(std::size_t layer) { return weights_[layer]; }
    const Eigen::MatrixXd& weight(std::size_t layer) const { return weights_[layer]; }
    Eigen::VectorXd& bias(std::size_t layer) { return biases_[layer]; }
    const Eigen::VectorXd& bias(std::size_t layer) const { return biases_[layer]; }
    const Eigen::VectorXd& input_scale() const { return scale_; }
    const Eigen::VectorXd& input_shift() const { return shift_; }
    void set_input_map(Eigen::VectorXd scale, Eigen::VectorXd shift);

    /// Flat parameter vector: per layer the weights in column-major order,
    /// then the biases.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);

    double forward(std::span<const double> point) const;
    /// Order-K jet of the network along one input axis.
    Jet forward_jet(std::span<const double> point, std::size_t axis, int order) const;

    double value(std::span<const double> point) const override { return forward(point); }
    Jet jet(std::span<const double> point, std::size_t axis, int order) const override
    {
        return forward_jet(point, axis, order);
    }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static Mlp load(const std::filesystem::path& path);

private:
    std::vector<std::size_t> sizes_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    Eigen::VectorXd scale_;
    Eigen::VectorXd shift_;
};

struct TrainConfig {
    std::vector<std::size_t> hidden{32, 32, 32};
    /// Pools the minibatches are drawn from.
    std::size_t collocation = 2000;
    std::size_t condition_samples = 1000;
    std::size_t batch_collocation = 256;
    std::size_t batch_condition = 128;
    double learning_rate = 2e-3;
    /// The step size decays geometrically to this value over the run.
    double final_learning_rate = 1e-4;
    std::size_t steps = 60000;
    std::uint64_t seed = 0;
    double residual_weight = 1.0;
    double data_weight = 10.0;
    /// Decay of the exponential moving average of the parameters. The
    /// averaged parameters are what the traces measure and what train
    /// returns; 0 disables averaging.
    double average_decay = 0.995;
    /// Interval, in steps, at which the loss over the full pools is recorded.
    std::size_t trace_every = 100;

    void validate() const;
    nlohmann::json to_json() const;
    /// Overrides the fields present in j; unknown keys throw.
    void apply_json(const nlohmann::json& j);
};

/// One training batch: collocation points with their source values, and
/// condition samples.
struct PinnBatch {
    PointSet collocation;
    std::vector<double> source;
    ConditionSamples conditions;
};

PinnBatch make_batch(const PdeProblem& problem, PointSet collocation, ConditionSamples conditions);

/// w_r * mean(residual^2) + w_d * mean((u - target)^2) over the batch. When
/// gradient is non-null it receives d loss / d parameters in the layout of
/// Mlp::parameters().
double pinn_loss(const Mlp& model, const PdeProblem& problem, const PinnBatch& batch, double residual_weight,
                 double data_weight, std::vector<double>* gradient = nullptr);

struct TrainResult {
    Mlp model;
    /// Minibatch loss at every step.
    std::vector<double> loss_trace;
    /// Loss over the full pools before step 0, trace_every, 2 * trace_every, ...
    /// and after the last step.
    std::vector<double> pool_trace;
    /// Loss over the full pools after the last step.
    double final_loss = 0.0;
};

/// Adam on resampled minibatches. Throws std::runtime_error when the loss
/// turns non-finite.
TrainResult train(const PdeProblem& problem, const TrainConfig& cfg);
TrainResult train(const PdeProblem& problem, const TrainConfig& cfg, Rng& rng);

}  // namespace strusr
