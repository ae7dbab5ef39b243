#include "strusr/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <type_traits>

namespace strusr {

namespace {

using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXXd;

void check_sizes(const std::vector<std::size_t>& sizes)
{
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output layers");
    for (const auto s : sizes) {
        if (s == 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
    }
    if (sizes.back() != 1) throw std::invalid_argument("Mlp: output layer must have one unit");
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes))
{
    check_sizes(sizes_);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
        const auto in = static_cast<Eigen::Index>(sizes_[l]);
        weights_.push_back(Matrix::Zero(out, in));
        biases_.push_back(Eigen::VectorXd::Zero(out));
    }
    scale_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sizes_.front()));
    shift_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sizes_.front()));
}

Mlp Mlp::initialized(const PdeProblem& problem, const std::vector<std::size_t>& hidden, Rng& rng)
{
    std::vector<std::size_t> sizes{problem.dimension()};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    Mlp m(sizes);
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const double sd = std::sqrt(2.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        std::normal_distribution<double> normal(0.0, sd);
        auto& w = m.weights_[l];
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = normal(rng);
        }
    }
    const auto d = static_cast<Eigen::Index>(problem.dimension());
    Eigen::VectorXd scale(d), shift(d);
    for (Eigen::Index a = 0; a < d; ++a) {
        const auto& iv = problem.box[static_cast<std::size_t>(a)];
        scale[a] = 2.0 / (iv.upper - iv.lower);
        shift[a] = -(iv.upper + iv.lower) / (iv.upper - iv.lower);
    }
    m.set_input_map(std::move(scale), std::move(shift));
    return m;
}

void Mlp::set_input_map(Eigen::VectorXd scale, Eigen::VectorXd shift)
{
    if (scale.size() != scale_.size() || shift.size() != shift_.size()) {
        throw std::invalid_argument("Mlp: input map has wrong dimension");
    }
    scale_ = std::move(scale);
    shift_ = std::move(shift);
}

std::size_t Mlp::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    }
    return n;
}

std::vector<double> Mlp::parameters() const
{
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < layer_count(); ++l) {
        out.insert(out.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        out.insert(out.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return out;
}

void Mlp::set_parameters(std::span<const double> values)
{
    if (values.size() != parameter_count()) throw std::invalid_argument("Mlp: wrong parameter count");
    std::size_t pos = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        for (Eigen::Index i = 0; i < weights_[l].size(); ++i) weights_[l].data()[i] = values[pos++];
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l][i] = values[pos++];
    }
}

double Mlp::forward(std::span<const double> point) const
{
    if (point.size() != input_dimension()) throw std::invalid_argument("Mlp: point has wrong dimension");
    Eigen::VectorXd a(static_cast<Eigen::Index>(point.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = scale_[i] * point[static_cast<std::size_t>(i)] + shift_[i];
    for (std::size_t l = 0; l < layer_count(); ++l) {
        Eigen::VectorXd z = weights_[l] * a + biases_[l];
        a = (l + 1 < layer_count()) ? Eigen::VectorXd(z.array().tanh()) : z;
    }
    return a[0];
}

Jet Mlp::forward_jet(std::span<const double> point, std::size_t axis, int order) const
{
    if (point.size() != input_dimension()) throw std::invalid_argument("Mlp: point has wrong dimension");
    if (axis >= input_dimension()) throw std::invalid_argument("Mlp: axis out of range");
    if (order < 2 || order > kMaxJetOrder) throw std::invalid_argument("forward_jet: order must be in [2, 8]");
    std::vector<Jet> a(input_dimension());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        a[i] = Jet(scale_[ii] * point[i] + shift_[ii], order);
        if (i == axis) a[i][1] = scale_[ii];
    }
    for (std::size_t l = 0; l < layer_count(); ++l) {
        const auto& w = weights_[l];
        std::vector<Jet> z(static_cast<std::size_t>(w.rows()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            Jet acc(biases_[l][r], order);
            for (Eigen::Index c = 0; c < w.cols(); ++c) acc = acc + w(r, c) * a[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = (l + 1 < layer_count()) ? tanh(acc) : acc;
        }
        a = std::move(z);
    }
    return a[0];
}

nlohmann::json Mlp::to_json() const
{
    nlohmann::json j;
    j["layer_sizes"] = sizes_;
    j["activation"] = "tanh";
    auto& ws = j["weights"] = nlohmann::json::array();
    auto& bs = j["biases"] = nlohmann::json::array();
    for (std::size_t l = 0; l < layer_count(); ++l) {
        // row-major in the file
        std::vector<double> w;
        for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) w.push_back(weights_[l](r, c));
        }
        ws.push_back(std::move(w));
        bs.push_back(std::vector<double>(biases_[l].data(), biases_[l].data() + biases_[l].size()));
    }
    j["input_scale"] = std::vector<double>(scale_.data(), scale_.data() + scale_.size());
    j["input_shift"] = std::vector<double>(shift_.data(), shift_.data() + shift_.size());
    return j;
}

Mlp Mlp::from_json(const nlohmann::json& j)
{
    if (j.at("activation").get<std::string>() != "tanh") throw std::invalid_argument("Mlp: unsupported activation");
    Mlp m(j.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    if (ws.size() != m.layer_count() || bs.size() != m.layer_count()) {
        throw std::invalid_argument("Mlp: layer count mismatch");
    }
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const auto w = ws[l].get<std::vector<double>>();
        const auto b = bs[l].get<std::vector<double>>();
        auto& W = m.weights_[l];
        if (w.size() != static_cast<std::size_t>(W.size()) || b.size() != static_cast<std::size_t>(m.biases_[l].size())) {
            throw std::invalid_argument("Mlp: parameter shape mismatch");
        }
        std::size_t pos = 0;
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = w[pos++];
        }
        for (std::size_t i = 0; i < b.size(); ++i) m.biases_[l][static_cast<Eigen::Index>(i)] = b[i];
    }
    const auto scale = j.at("input_scale").get<std::vector<double>>();
    const auto shift = j.at("input_shift").get<std::vector<double>>();
    m.set_input_map(Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size())),
                    Eigen::Map<const Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size())));
    for (const double p : m.parameters()) {
        if (!std::isfinite(p)) throw std::invalid_argument("Mlp: non-finite parameter");
    }
    return m;
}

void Mlp::save(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json().dump() << '\n';
}

Mlp Mlp::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return from_json(nlohmann::json::parse(in));
}

void TrainConfig::validate() const
{
    if (collocation == 0 || condition_samples == 0 || batch_collocation == 0 || batch_condition == 0) {
        throw std::invalid_argument("TrainConfig: sample counts must be positive");
    }
    if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0)) {
        throw std::invalid_argument("TrainConfig: step sizes must be positive");
    }
    if (!(average_decay >= 0.0 && average_decay < 1.0)) {
        throw std::invalid_argument("TrainConfig: average_decay must be in [0, 1)");
    }
    if (residual_weight < 0.0 || data_weight < 0.0) throw std::invalid_argument("TrainConfig: negative loss weight");
    for (const auto h : hidden) {
        if (h == 0) throw std::invalid_argument("TrainConfig: hidden sizes must be positive");
    }
}

nlohmann::json TrainConfig::to_json() const
{
    return {{"hidden", hidden},
            {"collocation", collocation},
            {"condition_samples", condition_samples},
            {"batch_collocation", batch_collocation},
            {"batch_condition", batch_condition},
            {"learning_rate", learning_rate},
            {"final_learning_rate", final_learning_rate},
            {"steps", steps},
            {"seed", seed},
            {"residual_weight", residual_weight},
            {"data_weight", data_weight},
            {"average_decay", average_decay},
            {"trace_every", trace_every}};
}

void TrainConfig::apply_json(const nlohmann::json& j)
{
    const nlohmann::json known = to_json();
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("TrainConfig: unknown key '" + key + "'");
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("hidden", hidden);
    get("collocation", collocation);
    get("condition_samples", condition_samples);
    get("batch_collocation", batch_collocation);
    get("batch_condition", batch_condition);
    get("learning_rate", learning_rate);
    get("final_learning_rate", final_learning_rate);
    get("steps", steps);
    get("seed", seed);
    get("residual_weight", residual_weight);
    get("data_weight", data_weight);
    get("average_decay", average_decay);
    get("trace_every", trace_every);
}

PinnBatch make_batch(const PdeProblem& problem, PointSet collocation, ConditionSamples conditions)
{
    const CollocationSet set(problem, collocation);
    return {std::move(collocation), set.source_values(), std::move(conditions)};
}

namespace {

// Activations of one layer: value plus, per differentiated axis, first and
// (when needed) second input derivatives.
struct Channels {
    Matrix v;
    std::vector<Matrix> g;
    std::vector<Matrix> h;
};

struct Tape {
    std::vector<Channels> inputs;  // input to each layer
    std::vector<Array> y;          // tanh outputs of hidden layers
    std::vector<Array> s;          // 1 - y^2
    std::vector<std::vector<Array>> zg;
    std::vector<std::vector<Array>> zh;
    Channels out;
};

// Forward pass over a batch; requests give the axes and orders needed.
void forward_batch(const Mlp& m, const PointSet& pts, std::span<const JetRequest> req, Tape& tape)
{
    const auto n = static_cast<Eigen::Index>(pts.size());
    const auto d = static_cast<Eigen::Index>(m.input_dimension());
    Channels a;
    a.v.resize(d, n);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto col = pts.column(static_cast<std::size_t>(k));
        for (Eigen::Index i = 0; i < n; ++i) {
            a.v(k, i) = m.input_scale()[k] * col[static_cast<std::size_t>(i)] + m.input_shift()[k];
        }
    }
    for (const auto& r : req) {
        Matrix g = Matrix::Zero(d, n);
        g.row(static_cast<Eigen::Index>(r.axis)).setConstant(m.input_scale()[static_cast<Eigen::Index>(r.axis)]);
        a.g.push_back(std::move(g));
        a.h.push_back(r.order >= 2 ? Matrix::Zero(d, n) : Matrix());
    }
    tape.inputs.clear();
    tape.y.clear();
    tape.s.clear();
    tape.zg.clear();
    tape.zh.clear();
    const std::size_t layers = m.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        tape.inputs.push_back(a);
        const auto& W = m.weight(l);
        Channels z;
        z.v = (W * a.v).colwise() + m.bias(l);
        for (std::size_t q = 0; q < req.size(); ++q) {
            z.g.push_back(W * a.g[q]);
            z.h.push_back(req[q].order >= 2 ? Matrix(W * a.h[q]) : Matrix());
        }
        if (l + 1 == layers) {
            tape.out = std::move(z);
            return;
        }
        Array y = z.v.array().tanh();
        Array s = 1.0 - y.square();
        Channels next;
        next.v = y.matrix();
        std::vector<Array> zg, zh;
        for (std::size_t q = 0; q < req.size(); ++q) {
            const Array g = z.g[q].array();
            next.g.push_back((s * g).matrix());
            if (req[q].order >= 2) {
                const Array h = z.h[q].array();
                next.h.push_back((s * h - 2.0 * y * s * g.square()).matrix());
                zh.push_back(h);
            } else {
                next.h.emplace_back();
                zh.emplace_back();
            }
            zg.push_back(g);
        }
        tape.y.push_back(std::move(y));
        tape.s.push_back(std::move(s));
        tape.zg.push_back(std::move(zg));
        tape.zh.push_back(std::move(zh));
        a = std::move(next);
    }
}

// Reverse sweep. `seed` holds adjoints of the output channels.
void backward_batch(const Mlp& m, std::span<const JetRequest> req, const Tape& tape, Channels seed,
                    std::vector<double>& grad)
{
    const std::size_t layers = m.layer_count();
    std::vector<std::size_t> offset(layers);
    std::size_t pos = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offset[l] = pos;
        pos += static_cast<std::size_t>(m.weight(l).size() + m.bias(l).size());
    }
    Channels zbar = std::move(seed);
    for (std::size_t l = layers; l-- > 0;) {
        const auto& W = m.weight(l);
        const Channels& in = tape.inputs[l];
        Matrix wbar = zbar.v * in.v.transpose();
        for (std::size_t q = 0; q < req.size(); ++q) {
            wbar.noalias() += zbar.g[q] * in.g[q].transpose();
            if (req[q].order >= 2) wbar.noalias() += zbar.h[q] * in.h[q].transpose();
        }
        const Eigen::VectorXd bbar = zbar.v.rowwise().sum();
        Eigen::Map<Matrix>(grad.data() + offset[l], W.rows(), W.cols()) += wbar;
        Eigen::Map<Eigen::VectorXd>(grad.data() + offset[l] + static_cast<std::size_t>(W.size()), bbar.size()) += bbar;
        if (l == 0) break;

        // adjoints of the previous layer's outputs
        Array ybar = (W.transpose() * zbar.v).array();
        std::vector<Array> ygbar, yhbar;
        for (std::size_t q = 0; q < req.size(); ++q) {
            ygbar.push_back((W.transpose() * zbar.g[q]).array());
            yhbar.push_back(req[q].order >= 2 ? Array((W.transpose() * zbar.h[q]).array()) : Array());
        }
        // through y = tanh(z) with its derivative channels
        const Array& y = tape.y[l - 1];
        const Array& s = tape.s[l - 1];
        Array sbar = Array::Zero(y.rows(), y.cols());
        Channels next;
        for (std::size_t q = 0; q < req.size(); ++q) {
            const Array& g = tape.zg[l - 1][q];
            sbar += ygbar[q] * g;
            Array gbar = ygbar[q] * s;
            if (req[q].order >= 2) {
                const Array& h = tape.zh[l - 1][q];
                sbar += yhbar[q] * (h - 2.0 * y * g.square());
                ybar += yhbar[q] * (-2.0 * s * g.square());
                gbar += yhbar[q] * (-4.0 * y * s * g);
                next.h.push_back((yhbar[q] * s).matrix());
            } else {
                next.h.emplace_back();
            }
            next.g.push_back(gbar.matrix());
        }
        ybar += -2.0 * y * sbar;
        next.v = (ybar * s).matrix();
        zbar = std::move(next);
    }
}

}  // namespace

double pinn_loss(const Mlp& model, const PdeProblem& problem, const PinnBatch& batch, double residual_weight,
                 double data_weight, std::vector<double>* gradient)
{
    const std::vector<JetRequest> req = problem.jet_requests();
    if (gradient) gradient->assign(model.parameter_count(), 0.0);
    double total = 0.0;

    if (residual_weight > 0.0 && !batch.collocation.empty()) {
        Tape tape;
        forward_batch(model, batch.collocation, req, tape);
        const auto n = static_cast<Eigen::Index>(batch.collocation.size());
        Eigen::ArrayXd r = -Eigen::Map<const Eigen::ArrayXd>(batch.source.data(), n);
        const Eigen::ArrayXd u = tape.out.v.row(0).transpose().array();
        for (const auto& term : problem.terms) {
            std::size_t q = 0;
            while (req[q].axis != term.axis) ++q;
            const Matrix& ch = term.order == 2 ? tape.out.h[q] : tape.out.g[q];
            r += term.coefficient * ch.row(0).transpose().array();
        }
        const int p = problem.reaction_power;
        if (problem.reaction_coefficient != 0.0) r += problem.reaction_coefficient * u.pow(p);
        total += residual_weight * r.square().mean();

        if (gradient) {
            const Eigen::ArrayXd rbar = (2.0 * residual_weight / static_cast<double>(n)) * r;
            Channels seed;
            seed.v = Matrix::Zero(1, n);
            if (problem.reaction_coefficient != 0.0) {
                seed.v.row(0) = (rbar * problem.reaction_coefficient * p * u.pow(p - 1)).matrix().transpose();
            }
            for (std::size_t q = 0; q < req.size(); ++q) {
                seed.g.push_back(Matrix::Zero(1, n));
                seed.h.push_back(req[q].order >= 2 ? Matrix(Matrix::Zero(1, n)) : Matrix());
            }
            for (const auto& term : problem.terms) {
                std::size_t q = 0;
                while (req[q].axis != term.axis) ++q;
                Matrix& ch = term.order == 2 ? seed.h[q] : seed.g[q];
                ch.row(0) += (term.coefficient * rbar).matrix().transpose();
            }
            backward_batch(model, req, tape, std::move(seed), *gradient);
        }
    }

    if (data_weight > 0.0 && !batch.conditions.targets.empty()) {
        Tape tape;
        forward_batch(model, batch.conditions.points, {}, tape);
        const auto n = static_cast<Eigen::Index>(batch.conditions.targets.size());
        const Eigen::ArrayXd diff = tape.out.v.row(0).transpose().array() -
                                    Eigen::Map<const Eigen::ArrayXd>(batch.conditions.targets.data(), n);
        total += data_weight * diff.square().mean();
        if (gradient) {
            Channels seed;
            seed.v = ((2.0 * data_weight / static_cast<double>(n)) * diff).matrix().transpose();
            backward_batch(model, {}, tape, std::move(seed), *gradient);
        }
    }
    return total;
}

namespace {

PointSet pick_rows(const PointSet& pool, const std::vector<std::size_t>& idx)
{
    const std::size_t d = pool.dimension();
    std::vector<double> data;
    data.reserve(idx.size() * d);
    for (const auto i : idx) {
        const auto p = pool.point(i);
        data.insert(data.end(), p.begin(), p.end());
    }
    return PointSet(d, std::move(data));
}

}  // namespace

TrainResult train(const PdeProblem& problem, const TrainConfig& cfg)
{
    Rng rng(cfg.seed);
    return train(problem, cfg, rng);
}

TrainResult train(const PdeProblem& problem, const TrainConfig& cfg, Rng& rng)
{
    cfg.validate();
    Mlp model = Mlp::initialized(problem, cfg.hidden, rng);
    const PointSet colloc_pool = sample_collocation(problem, cfg.collocation, rng);
    const ConditionSamples cond_pool = sample_conditions(problem, cfg.condition_samples, rng);
    const CollocationSet colloc_set(problem, colloc_pool);

    std::vector<double> params = model.parameters();
    std::vector<double> avg = params;
    Mlp averaged = model;
    std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0), grad;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uniform_int_distribution<std::size_t> pick_c(0, colloc_pool.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_d(0, cond_pool.targets.size() - 1);

    const PinnBatch full = make_batch(problem, colloc_pool, cond_pool);
    TrainResult result{model, {}, {}, 0.0};
    result.loss_trace.reserve(cfg.steps);
    std::vector<std::size_t> ic(cfg.batch_collocation), id(cfg.batch_condition);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        if (cfg.trace_every > 0 && step % cfg.trace_every == 0) {
            averaged.set_parameters(avg);
            result.pool_trace.push_back(pinn_loss(averaged, problem, full, cfg.residual_weight, cfg.data_weight));
        }
        for (auto& i : ic) i = pick_c(rng);
        for (auto& i : id) i = pick_d(rng);
        PinnBatch batch;
        batch.collocation = pick_rows(colloc_pool, ic);
        batch.source.resize(ic.size());
        for (std::size_t k = 0; k < ic.size(); ++k) batch.source[k] = colloc_set.source_values()[ic[k]];
        batch.conditions.points = pick_rows(cond_pool.points, id);
        batch.conditions.targets.resize(id.size());
        for (std::size_t k = 0; k < id.size(); ++k) batch.conditions.targets[k] = cond_pool.targets[id[k]];

        const double loss = pinn_loss(model, problem, batch, cfg.residual_weight, cfg.data_weight, &grad);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("PINN training diverged at step " + std::to_string(step) + " on " +
                                     problem.name);
        }
        result.loss_trace.push_back(loss);

        const double frac = cfg.steps > 1 ? static_cast<double>(step) / static_cast<double>(cfg.steps - 1) : 0.0;
        const double lr = cfg.learning_rate * std::pow(cfg.final_learning_rate / cfg.learning_rate, frac);
        const double t = static_cast<double>(step + 1);
        const double c1 = 1.0 - std::pow(beta1, t);
        const double c2 = 1.0 - std::pow(beta2, t);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
            m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
        }
        model.set_parameters(params);
        // bias-corrected running average
        const double decay = std::min(cfg.average_decay, t / (t + 10.0));
        for (std::size_t i = 0; i < params.size(); ++i) avg[i] = decay * avg[i] + (1.0 - decay) * params[i];
    }
    model.set_parameters(avg);
    result.final_loss = pinn_loss(model, problem, full, cfg.residual_weight, cfg.data_weight);
    if (!std::isfinite(result.final_loss)) throw std::runtime_error("PINN training ended with a non-finite loss");
    if (cfg.trace_every > 0) result.pool_trace.push_back(result.final_loss);
    result.model = std::move(model);
    return result;
}

}  // namespace strusr
