#include <stdexcept>
#include <string>

#include "strusr/expr_text.hpp"
#include "strusr/pde.hpp"

namespace strusr {

namespace {

constexpr const char* kPi = "3.141592653589793";
constexpr const char* kPiSquared = "9.869604401089358";

struct Builder {
    PdeProblem p;

    Builder(std::string name, std::size_t spatial, bool time, double lo, double hi)
    {
        p.name = std::move(name);
        p.spatial_dim = spatial;
        p.has_time = time;
        for (std::size_t a = 0; a < spatial; ++a) p.box.push_back({lo, hi});
        if (time) p.box.push_back({0.0, 1.0});
    }

    Expr parse(const std::string& text) const { return parse_expr(text, p.naming()); }

    Builder& term(std::size_t axis, int order, double coefficient)
    {
        p.terms.push_back({axis, order, coefficient});
        return *this;
    }
    Builder& laplacian(double coefficient)
    {
        for (std::size_t a = 0; a < p.spatial_dim; ++a) term(a, 2, coefficient);
        return *this;
    }
    Builder& source(const std::string& text)
    {
        p.source = parse(text);
        return *this;
    }
    Builder& reaction(double coefficient, int power)
    {
        p.reaction_coefficient = coefficient;
        p.reaction_power = power;
        return *this;
    }
    Builder& condition(ConditionKind kind, const std::string& target, std::string description)
    {
        p.conditions.push_back({kind, parse(target), std::move(description)});
        return *this;
    }
    Builder& truth(const std::string& text)
    {
        p.ground_truth = parse(text);
        return *this;
    }
    Builder& text(std::string op)
    {
        p.operator_text = std::move(op);
        return *this;
    }
};

std::vector<PdeProblem> build_registry()
{
    std::vector<PdeProblem> out;
    const std::string pi = kPi;

    // Advection speed fixed at 1 so that sin(x - t) is the solution.
    out.push_back(finalize_problem(Builder("Advection", 1, true, 0.0, 1.0)
                                       .term(1, 1, 1.0)
                                       .term(0, 1, 1.0)
                                       .condition(ConditionKind::Initial, "sin(x0)", "u(x, 0) = sin(x)")
                                       .truth("sin(x0 - t)")
                                       .text("u_t + u_x = 0")
                                       .p));

    out.push_back(finalize_problem(
        Builder("Diffusion", 1, true, -1.0, 1.0)
            .term(1, 1, 1.0)
            .term(0, 2, -1.0)
            .source("-(exp(-(t)) * sin(" + pi + " * x0) * (1 - " + kPiSquared + "))")
            .condition(ConditionKind::Initial, "sin(" + pi + " * x0)", "u(x, 0) = sin(pi x)")
            .condition(ConditionKind::Boundary, "0", "u(-1, t) = u(1, t) = 0")
            .truth("exp(-(t)) * sin(" + pi + " * x0)")
            .text("u_t = u_xx - exp(-t) sin(pi x) (1 - pi^2)")
            .p));

    out.push_back(finalize_problem(
        Builder("Poisson2D", 2, false, -1.0, 1.0)
            .laplacian(1.0)
            .source("30 * x0^2 - 7.8 * x0 + 1")
            .condition(ConditionKind::Boundary, "2.5 * x0^4 - 1.3 * x0^3 + 0.5 * x1^2 - 1.7 * x1",
                       "u = 2.5 x1^4 - 1.3 x1^3 + 0.5 x2^2 - 1.7 x2 on the boundary")
            .truth("2.5 * x0^4 - 1.3 * x0^3 + 0.5 * x1^2 - 1.7 * x1")
            .text("u_x1x1 + u_x2x2 = 30 x1^2 - 7.8 x1 + 1")
            .p));

    out.push_back(finalize_problem(
        Builder("Poisson3D", 3, false, -1.0, 1.0)
            .laplacian(1.0)
            .source("30 * x0^2 - 7.8 * x1 + 1")
            .condition(ConditionKind::Boundary, "2.5 * x0^4 - 1.3 * x1^3 + 0.5 * x2^2",
                       "u = 2.5 x1^4 - 1.3 x2^3 + 0.5 x3^2 on the boundary")
            .truth("2.5 * x0^4 - 1.3 * x1^3 + 0.5 * x2^2")
            .text("u_x1x1 + u_x2x2 + u_x3x3 = 30 x1^2 - 7.8 x2 + 1")
            .p));

    out.push_back(finalize_problem(
        Builder("Heat2D", 2, true, -1.0, 1.0)
            .term(2, 1, 1.0)
            .laplacian(-1.0)
            .source("-30 * x0^2 + 7.8 * x1 + t")
            .condition(ConditionKind::Boundary, "2.5 * x0^4 - 1.3 * x1^3 + 0.5 * t^2",
                       "u = 2.5 x1^4 - 1.3 x2^3 + 0.5 t^2 on the spatial boundary")
            .condition(ConditionKind::Initial, "2.5 * x0^4 - 1.3 * x1^3", "u(x, 0) = 2.5 x1^4 - 1.3 x2^3")
            .truth("0.5 * t^2 + 2.5 * x0^4 - 1.3 * x1^3")
            .text("u_t - (u_x1x1 + u_x2x2) = -30 x1^2 + 7.8 x2 + t")
            .p));

    out.push_back(finalize_problem(
        Builder("Heat3D", 3, true, -1.0, 1.0)
            .term(3, 1, 1.0)
            .laplacian(-1.0)
            .source("-30 * x0^2 + 7.8 * x1 - 2.7")
            .condition(ConditionKind::Boundary, "2.5 * x0^4 - 1.3 * x1^3 + 0.5 * x2^2 - 1.7 * t",
                       "u = 2.5 x1^4 - 1.3 x2^3 + 0.5 x3^2 - 1.7 t on the spatial boundary")
            .condition(ConditionKind::Initial, "2.5 * x0^4 - 1.3 * x1^3 + 0.5 * x2^2",
                       "u(x, 0) = 2.5 x1^4 - 1.3 x2^3 + 0.5 x3^2")
            .truth("-1.7 * t + 2.5 * x0^4 - 1.3 * x1^3 + 0.5 * x2^2")
            .text("u_t - (u_x1x1 + u_x2x2 + u_x3x3) = -30 x1^2 + 7.8 x2 - 2.7")
            .p));

    // The nonlinear wave rows are registered as printed; the self-check
    // decides whether their closed forms count as verified truths.
    out.push_back(finalize_problem(
        Builder("Wave2D", 2, true, -1.0, 1.0)
            .term(2, 2, 1.0)
            .laplacian(-1.0)
            .reaction(1.0, 3)
            .source("0.25 - 4 * x0^2")
            .condition(ConditionKind::Initial, "exp(x0^2) * sin(x1)", "u(x, 0) = exp(x1^2) sin(x2)")
            .condition(ConditionKind::Boundary, "exp(x0^2) * sin(x1) * exp(-0.5 * t)",
                       "u = exp(x1^2) sin(x2) exp(-0.5 t) on the spatial boundary")
            .truth("exp(x0^2) * sin(x1) * exp(-0.5 * t)")
            .text("u_tt - (u_x1x1 + u_x2x2) = -u^3 + (0.25 - 4 x1^2)")
            .p));

    out.push_back(finalize_problem(
        Builder("Wave3D", 3, true, -1.0, 1.0)
            .term(3, 2, 1.0)
            .laplacian(-1.0)
            .reaction(-1.0, 2)
            .source("-(4 * x0^2 + 4 * x2^2 + 2.75)")
            .condition(ConditionKind::Initial, "exp(x0^2 + x2^2) * cos(x1)", "u(x, 0) = exp(x1^2 + x3^2) cos(x2)")
            .condition(ConditionKind::Boundary, "exp(x0^2 + x2^2) * cos(x1) * exp(-0.5 * t)",
                       "u = exp(x1^2 + x3^2) cos(x2) exp(-0.5 t) on the spatial boundary")
            .truth("exp(x0^2 + x2^2) * cos(x1) * exp(-0.5 * t)")
            .text("u_tt - (u_x1x1 + u_x2x2 + u_x3x3) = u^2 - (4 x1^2 + 4 x3^2 + 2.75)")
            .p));
    return out;
}

}  // namespace

const std::vector<PdeProblem>& registry()
{
    static const std::vector<PdeProblem> problems = build_registry();
    return problems;
}

const PdeProblem& find_problem(std::string_view name)
{
    for (const auto& p : registry()) {
        if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

}  // namespace strusr
