#include <cmath>
#include <vector>

#include "doctest.h"
#include "strusr/pinn.hpp"

using namespace strusr;

TEST_CASE("zero network returns the output bias")
{
    Mlp m({2, 4, 4, 1});
    m.bias(2)[0] = 0.75;
    const std::vector<double> x{0.3, -0.2};
    CHECK(m.forward(x) == 0.75);
    const Jet j = m.forward_jet(x, 1, 4);
    CHECK(j[0] == 0.75);
    for (std::size_t k = 1; k <= 4; ++k) CHECK(j[k] == 0.0);
}

TEST_CASE("single tanh neuron")
{
    Mlp m({1, 1, 1});
    m.weight(0)(0, 0) = 1.0;
    m.weight(1)(0, 0) = 1.0;
    const std::vector<double> zero{0.0};
    const Jet j = m.forward_jet(zero, 0, 3);
    const std::vector<double> want{0.0, 1.0, 0.0, -1.0 / 3.0};
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(j[k] - want[k]) < 1e-15);
}

TEST_CASE("random init is finite and deterministic")
{
    const auto& pr = find_problem("Heat2D");
    Rng a(1), b(1);
    const Mlp m = Mlp::initialized(pr, {32, 32, 32}, a);
    const Mlp n = Mlp::initialized(pr, {32, 32, 32}, b);
    CHECK(m.parameters() == n.parameters());
    Rng rng(2);
    const PointSet pts = sample_collocation(pr, 1000, rng);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double v = m.forward(pts.point(i));
        CHECK(std::isfinite(v));
        CHECK(v == m.forward(pts.point(i)));
    }
}

TEST_CASE("forward_jet matches finite differences")
{
    const auto& pr = find_problem("Diffusion");
    Rng rng(3);
    const Mlp m = Mlp::initialized(pr, {16, 16}, rng);
    const PointSet pts = sample_interior(pr, 20, 0.05, rng);
    const double h = 1e-4;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t axis = 0; axis < 2; ++axis) {
            std::vector<double> p(pts.point(i).begin(), pts.point(i).end());
            const Jet j = m.forward_jet(p, axis, 5);
            std::vector<double> hi = p, lo = p;
            hi[axis] += h;
            lo[axis] -= h;
            const double f0 = m.forward(p), fp = m.forward(hi), fm = m.forward(lo);
            const double d1 = (fp - fm) / (2 * h);
            const double d2 = (fp - 2 * f0 + fm) / (h * h);
            CHECK(std::abs(j.derivative(1) - d1) <= 1e-5 * std::max(1.0, std::abs(d1)));
            CHECK(std::abs(j.derivative(2) - d2) <= 1e-4 * std::max(1.0, std::abs(d2)));
        }
    }
}

TEST_CASE("training gradient matches finite differences")
{
    for (const char* name : {"Diffusion", "Wave2D", "Advection"}) {
        CAPTURE(name);
        const auto& pr = find_problem(name);
        Rng rng(4);
        Mlp m = Mlp::initialized(pr, {5, 4}, rng);
        const PinnBatch batch =
            make_batch(pr, sample_collocation(pr, 40, rng), sample_conditions(pr, 20, rng));
        std::vector<double> grad;
        pinn_loss(m, pr, batch, 1.0, 10.0, &grad);
        std::vector<double> params = m.parameters();
        std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t i = pick(rng);
            const double h = 1e-6;
            std::vector<double> q = params;
            q[i] += h;
            m.set_parameters(q);
            const double fp = pinn_loss(m, pr, batch, 1.0, 10.0);
            q[i] -= 2 * h;
            m.set_parameters(q);
            const double fm = pinn_loss(m, pr, batch, 1.0, 10.0);
            m.set_parameters(params);
            const double fd = (fp - fm) / (2 * h);
            CAPTURE(i);
            CHECK(std::abs(grad[i] - fd) <= 1e-4 * std::max(std::abs(fd), 1e-3));
        }
    }
}

TEST_CASE("zero steps leave the initialization untouched")
{
    const auto& pr = find_problem("Advection");
    TrainConfig cfg;
    cfg.steps = 0;
    cfg.seed = 5;
    const TrainResult r = train(pr, cfg);
    Rng rng(5);
    CHECK(r.model.parameters() == Mlp::initialized(pr, cfg.hidden, rng).parameters());
    CHECK(r.loss_trace.empty());
}

TEST_CASE("checkpoint round trip")
{
    const auto& pr = find_problem("Heat3D");
    Rng rng(6);
    const Mlp m = Mlp::initialized(pr, {8, 8}, rng);
    const Mlp n = Mlp::from_json(nlohmann::json::parse(m.to_json().dump()));
    const PointSet pts = sample_collocation(pr, 100, rng);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(m.forward(pts.point(i)) == n.forward(pts.point(i)));
    CHECK_THROWS(Mlp({2, 3, 2}));
}

TEST_CASE("short training lowers the loss")
{
    const auto& pr = find_problem("Advection");
    TrainConfig cfg;
    cfg.steps = 600;
    cfg.hidden = {16, 16};
    const TrainResult r = train(pr, cfg);
    REQUIRE(r.loss_trace.size() == 600);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        head += r.loss_trace[i];
        tail += r.loss_trace[500 + i];
    }
    CHECK(tail < 0.2 * head);
}
