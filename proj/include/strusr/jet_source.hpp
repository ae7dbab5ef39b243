#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "strusr/expr.hpp"
#include "strusr/jet.hpp"
#include "strusr/point_set.hpp"

namespace strusr {

/// One directional jet requested from a batch evaluation.
struct JetRequest {
    std::size_t axis = 0;
    int order = 2;
};

/// Values and directional Taylor coefficients over a point set.
struct BatchJets {
    std::size_t n = 0;
    std::vector<double> value;
    std::vector<int> orders;
    /// coefficients[r][(k - 1) * n + i] is c_k of request r at point i.
    std::vector<std::vector<double>> coefficients;

    double coefficient(std::size_t request, int k, std::size_t i) const
    {
        return k == 0 ? value[i] : coefficients[request][static_cast<std::size_t>(k - 1) * n + i];
    }
    void resize(std::size_t points, std::span<const JetRequest> requests);
};

/// Anything whose directional jets can be evaluated: expressions, networks,
/// analytic oracles.
class JetSource {
public:
    virtual ~JetSource() = default;

    virtual double value(std::span<const double> point) const = 0;
    virtual Jet jet(std::span<const double> point, std::size_t axis, int order) const = 0;

    /// Batched evaluation; the default loops over jet().
    virtual void eval_batch(const PointSet& points, std::span<const JetRequest> requests, BatchJets& out) const;
};

/// Flattened post-order program for an expression. Batch evaluation computes
/// all node values once and then only the higher coefficients of nodes that
/// depend on the requested axis.
class CompiledExpr {
public:
    explicit CompiledExpr(const Expr& e);

    double eval(std::span<const double> point) const;
    Jet jet(std::span<const double> point, std::size_t axis, int order) const;
    void eval_batch(const PointSet& points, std::span<const JetRequest> requests, BatchJets& out) const;

    std::size_t size() const { return code_.size(); }

private:
    struct Instr {
        Op op;
        std::uint32_t lhs;
        std::uint32_t rhs;
        double value;
        std::size_t axis;
        int exponent;
        std::uint64_t mask;
    };

    std::uint32_t emit(const Expr& e);

    std::vector<Instr> code_;
};

class ExprSource final : public JetSource {
public:
    explicit ExprSource(const Expr& e) : program_(e) {}

    double value(std::span<const double> point) const override { return program_.eval(point); }
    Jet jet(std::span<const double> point, std::size_t axis, int order) const override
    {
        return program_.jet(point, axis, order);
    }
    void eval_batch(const PointSet& points, std::span<const JetRequest> requests, BatchJets& out) const override
    {
        program_.eval_batch(points, requests, out);
    }

private:
    CompiledExpr program_;
};

/// (f, f'/1!, ..., f^(K)/K!) along one axis with the other coordinates frozen
/// at the anchor. Throws std::invalid_argument for K outside [2, 8] or an
/// axis beyond the anchor dimension. A non-finite coefficient marks the
/// result invalid.
Jet taylor_coeffs(const JetSource& f, std::span<const double> anchor, std::size_t axis, int order);

/// order-th partial derivative along one axis; NaN when the jet is invalid.
double derivative(const JetSource& f, std::span<const double> point, std::size_t axis, int order);

}  // namespace strusr
