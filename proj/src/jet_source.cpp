#include "strusr/jet_source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace strusr {

void BatchJets::resize(std::size_t points, std::span<const JetRequest> requests)
{
    n = points;
    value.assign(points, 0.0);
    orders.resize(requests.size());
    coefficients.resize(requests.size());
    for (std::size_t r = 0; r < requests.size(); ++r) {
        orders[r] = requests[r].order;
        coefficients[r].assign(static_cast<std::size_t>(requests[r].order) * points, 0.0);
    }
}

void JetSource::eval_batch(const PointSet& points, std::span<const JetRequest> requests, BatchJets& out) const
{
    out.resize(points.size(), requests);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto p = points.point(i);
        if (requests.empty()) {
            out.value[i] = value(p);
            continue;
        }
        for (std::size_t r = 0; r < requests.size(); ++r) {
            const Jet j = jet(p, requests[r].axis, requests[r].order);
            if (r == 0) out.value[i] = j[0];
            for (int k = 1; k <= requests[r].order; ++k) {
                out.coefficients[r][static_cast<std::size_t>(k - 1) * points.size() + i] = j[static_cast<std::size_t>(k)];
            }
        }
    }
}

CompiledExpr::CompiledExpr(const Expr& e)
{
    code_.reserve(e.size());
    emit(e);
}

std::uint32_t CompiledExpr::emit(const Expr& e)
{
    Instr ins{e.op(), 0, 0, 0.0, 0, 0, e.axes_mask()};
    if (e.arity() >= 1) ins.lhs = emit(e.child(0));
    if (e.arity() == 2) ins.rhs = emit(e.child(1));
    if (e.op() == Op::Const) ins.value = e.value();
    if (e.op() == Op::Var) ins.axis = e.axis();
    if (e.op() == Op::Pow) ins.exponent = e.exponent();
    code_.push_back(ins);
    return static_cast<std::uint32_t>(code_.size() - 1);
}

double CompiledExpr::eval(std::span<const double> point) const
{
    thread_local std::vector<double> v;
    v.resize(code_.size());
    for (std::size_t j = 0; j < code_.size(); ++j) {
        const Instr& in = code_[j];
        switch (in.op) {
            case Op::Const: v[j] = in.value; break;
            case Op::Var: v[j] = point[in.axis]; break;
            case Op::Neg: v[j] = -v[in.lhs]; break;
            case Op::Sin: v[j] = std::sin(v[in.lhs]); break;
            case Op::Cos: v[j] = std::cos(v[in.lhs]); break;
            case Op::Exp: v[j] = std::exp(v[in.lhs]); break;
            case Op::Pow: {
                double r = v[in.lhs];
                for (int i = 1; i < in.exponent; ++i) r *= v[in.lhs];
                v[j] = r;
                break;
            }
            case Op::Add: v[j] = v[in.lhs] + v[in.rhs]; break;
            case Op::Sub: v[j] = v[in.lhs] - v[in.rhs]; break;
            case Op::Mul: v[j] = v[in.lhs] * v[in.rhs]; break;
            case Op::Div: v[j] = v[in.lhs] / v[in.rhs]; break;
        }
    }
    return v.back();
}

Jet CompiledExpr::jet(std::span<const double> point, std::size_t axis, int order) const
{
    std::vector<Jet> v(code_.size());
    for (std::size_t j = 0; j < code_.size(); ++j) {
        const Instr& in = code_[j];
        switch (in.op) {
            case Op::Const: v[j] = Jet(in.value, order); break;
            case Op::Var:
                v[j] = Jet(point[in.axis], order);
                if (in.axis == axis && order >= 1) v[j][1] = 1.0;
                break;
            case Op::Neg: v[j] = -v[in.lhs]; break;
            case Op::Sin: v[j] = sin(v[in.lhs]); break;
            case Op::Cos: v[j] = cos(v[in.lhs]); break;
            case Op::Exp: v[j] = exp(v[in.lhs]); break;
            case Op::Pow: v[j] = pow_int(v[in.lhs], in.exponent); break;
            case Op::Add: v[j] = v[in.lhs] + v[in.rhs]; break;
            case Op::Sub: v[j] = v[in.lhs] - v[in.rhs]; break;
            case Op::Mul: v[j] = v[in.lhs] * v[in.rhs]; break;
            case Op::Div: v[j] = v[in.lhs] / v[in.rhs]; break;
        }
    }
    return v.back();
}

namespace {

struct Workspace {
    std::vector<double> values;
    std::vector<double> aux;
    std::vector<double> coeffs;
    std::vector<double> tmp_a;
    std::vector<double> tmp_b;
    std::vector<double> tmp_v;
};

}  // namespace

void CompiledExpr::eval_batch(const PointSet& points, std::span<const JetRequest> requests, BatchJets& out) const
{
    const std::size_t n = points.size();
    const std::size_t m = code_.size();
    out.resize(n, requests);
    if (n == 0) return;

    thread_local Workspace ws;
    ws.values.resize(m * n);
    ws.aux.resize(m * n);
    auto val = [&](std::size_t j) { return ws.values.data() + j * n; };
    auto aux = [&](std::size_t j) { return ws.aux.data() + j * n; };

    for (std::size_t j = 0; j < m; ++j) {
        const Instr& in = code_[j];
        double* out_v = val(j);
        const double* a = in.lhs < m ? val(in.lhs) : nullptr;
        const double* b = in.rhs < m ? val(in.rhs) : nullptr;
        switch (in.op) {
            case Op::Const: std::fill(out_v, out_v + n, in.value); break;
            case Op::Var: {
                const auto col = points.column(in.axis);
                std::copy(col.begin(), col.end(), out_v);
                break;
            }
            case Op::Neg:
                for (std::size_t i = 0; i < n; ++i) out_v[i] = -a[i];
                break;
            case Op::Sin:
                for (std::size_t i = 0; i < n; ++i) {
                    out_v[i] = std::sin(a[i]);
                    aux(j)[i] = std::cos(a[i]);
                }
                break;
            case Op::Cos:
                for (std::size_t i = 0; i < n; ++i) {
                    out_v[i] = std::cos(a[i]);
                    aux(j)[i] = std::sin(a[i]);
                }
                break;
            case Op::Exp:
                for (std::size_t i = 0; i < n; ++i) out_v[i] = std::exp(a[i]);
                break;
            case Op::Pow:
                for (std::size_t i = 0; i < n; ++i) {
                    double r = a[i];
                    for (int e = 1; e < in.exponent; ++e) r *= a[i];
                    out_v[i] = r;
                }
                break;
            case Op::Add:
                for (std::size_t i = 0; i < n; ++i) out_v[i] = a[i] + b[i];
                break;
            case Op::Sub:
                for (std::size_t i = 0; i < n; ++i) out_v[i] = a[i] - b[i];
                break;
            case Op::Mul:
                for (std::size_t i = 0; i < n; ++i) out_v[i] = a[i] * b[i];
                break;
            case Op::Div:
                for (std::size_t i = 0; i < n; ++i) out_v[i] = a[i] / b[i];
                break;
        }
    }
    std::copy(val(m - 1), val(m - 1) + n, out.value.begin());

    for (std::size_t r = 0; r < requests.size(); ++r) {
        const std::size_t axis = requests[r].axis;
        const std::size_t order = static_cast<std::size_t>(requests[r].order);
        const std::uint64_t bit = std::uint64_t{1} << axis;
        if (order == 0 || !(code_.back().mask & bit)) continue;

        ws.coeffs.assign(m * order * n, 0.0);
        // coefficient k >= 1 of node j; k == 0 maps to the value row
        auto c = [&](std::size_t j, std::size_t k) -> double* {
            return k == 0 ? val(j) : ws.coeffs.data() + (j * order + (k - 1)) * n;
        };
        auto active = [&](std::size_t j) { return (code_[j].mask & bit) != 0; };

        for (std::size_t j = 0; j < m; ++j) {
            const Instr& in = code_[j];
            if (!(in.mask & bit)) continue;
            switch (in.op) {
                case Op::Const: break;
                case Op::Var: std::fill(c(j, 1), c(j, 1) + n, 1.0); break;
                case Op::Neg:
                    for (std::size_t k = 1; k <= order; ++k) {
                        const double* a = c(in.lhs, k);
                        double* o = c(j, k);
                        for (std::size_t i = 0; i < n; ++i) o[i] = -a[i];
                    }
                    break;
                case Op::Add:
                case Op::Sub: {
                    const double sign = in.op == Op::Add ? 1.0 : -1.0;
                    const bool la = active(in.lhs);
                    const bool lb = active(in.rhs);
                    for (std::size_t k = 1; k <= order; ++k) {
                        double* o = c(j, k);
                        if (la) {
                            const double* a = c(in.lhs, k);
                            for (std::size_t i = 0; i < n; ++i) o[i] = a[i];
                        }
                        if (lb) {
                            const double* b = c(in.rhs, k);
                            for (std::size_t i = 0; i < n; ++i) o[i] += sign * b[i];
                        }
                    }
                    break;
                }
                case Op::Mul: {
                    const bool la = active(in.lhs);
                    const bool lb = active(in.rhs);
                    for (std::size_t k = 1; k <= order; ++k) {
                        double* o = c(j, k);
                        if (la && lb) {
                            for (std::size_t q = 0; q <= k; ++q) {
                                const double* a = c(in.lhs, q);
                                const double* b = c(in.rhs, k - q);
                                for (std::size_t i = 0; i < n; ++i) o[i] += a[i] * b[i];
                            }
                        } else if (la) {
                            const double* a = c(in.lhs, k);
                            const double* b = val(in.rhs);
                            for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
                        } else {
                            const double* a = val(in.lhs);
                            const double* b = c(in.rhs, k);
                            for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
                        }
                    }
                    break;
                }
                case Op::Div: {
                    const bool la = active(in.lhs);
                    const bool lb = active(in.rhs);
                    const double* b0 = val(in.rhs);
                    for (std::size_t k = 1; k <= order; ++k) {
                        double* o = c(j, k);
                        if (la) {
                            const double* a = c(in.lhs, k);
                            for (std::size_t i = 0; i < n; ++i) o[i] = a[i];
                        }
                        if (lb) {
                            for (std::size_t q = 1; q <= k; ++q) {
                                const double* b = c(in.rhs, q);
                                const double* prev = c(j, k - q);
                                for (std::size_t i = 0; i < n; ++i) o[i] -= b[i] * prev[i];
                            }
                        }
                        for (std::size_t i = 0; i < n; ++i) o[i] /= b0[i];
                    }
                    break;
                }
                case Op::Exp:
                    for (std::size_t k = 1; k <= order; ++k) {
                        double* o = c(j, k);
                        for (std::size_t q = 1; q <= k; ++q) {
                            const double* a = c(in.lhs, q);
                            const double* e = c(j, k - q);
                            const double w = static_cast<double>(q) / static_cast<double>(k);
                            for (std::size_t i = 0; i < n; ++i) o[i] += w * a[i] * e[i];
                        }
                    }
                    break;
                case Op::Sin:
                case Op::Cos: {
                    // companion series lives in tmp_a, row k-1
                    ws.tmp_a.assign(order * n, 0.0);
                    const bool is_sin = in.op == Op::Sin;
                    auto companion = [&](std::size_t k) -> double* {
                        return k == 0 ? aux(j) : ws.tmp_a.data() + (k - 1) * n;
                    };
                    auto sin_row = [&](std::size_t k) { return is_sin ? c(j, k) : companion(k); };
                    auto cos_row = [&](std::size_t k) { return is_sin ? companion(k) : c(j, k); };
                    for (std::size_t k = 1; k <= order; ++k) {
                        double* s = sin_row(k);
                        double* co = cos_row(k);
                        for (std::size_t q = 1; q <= k; ++q) {
                            const double* a = c(in.lhs, q);
                            const double* cprev = cos_row(k - q);
                            const double* sprev = sin_row(k - q);
                            const double w = static_cast<double>(q) / static_cast<double>(k);
                            for (std::size_t i = 0; i < n; ++i) {
                                s[i] += w * a[i] * cprev[i];
                                co[i] -= w * a[i] * sprev[i];
                            }
                        }
                    }
                    break;
                }
                case Op::Pow: {
                    // P^(e) = P^(e-1) * A, repeated; tmp_v holds the running value row
                    ws.tmp_a.assign(order * n, 0.0);
                    ws.tmp_b.assign(order * n, 0.0);
                    ws.tmp_v.resize(2 * n);
                    double* prev_v = ws.tmp_v.data();
                    double* next_v = ws.tmp_v.data() + n;
                    double* prev = ws.tmp_a.data();
                    double* next = ws.tmp_b.data();
                    const double* a0 = val(in.lhs);
                    std::copy(a0, a0 + n, prev_v);
                    for (std::size_t k = 1; k <= order; ++k) {
                        std::copy(c(in.lhs, k), c(in.lhs, k) + n, prev + (k - 1) * n);
                    }
                    for (int e = 2; e <= in.exponent; ++e) {
                        double* target = e == in.exponent ? nullptr : next;
                        for (std::size_t k = 1; k <= order; ++k) {
                            double* o = target ? target + (k - 1) * n : c(j, k);
                            std::fill(o, o + n, 0.0);
                            for (std::size_t q = 0; q <= k; ++q) {
                                const double* p = q == 0 ? prev_v : prev + (q - 1) * n;
                                const double* a = c(in.lhs, k - q);
                                for (std::size_t i = 0; i < n; ++i) o[i] += p[i] * a[i];
                            }
                        }
                        if (target) {
                            for (std::size_t i = 0; i < n; ++i) next_v[i] = prev_v[i] * a0[i];
                            std::swap(prev, next);
                            std::swap(prev_v, next_v);
                        }
                    }
                    break;
                }
            }
        }
        for (std::size_t k = 1; k <= order; ++k) {
            const double* src = c(m - 1, k);
            std::copy(src, src + n, out.coefficients[r].begin() + static_cast<std::ptrdiff_t>((k - 1) * n));
        }
    }
}

Jet taylor_coeffs(const JetSource& f, std::span<const double> anchor, std::size_t axis, int order)
{
    if (order < 2 || order > kMaxJetOrder) {
        throw std::invalid_argument("taylor_coeffs: order must be in [2, 8], got " + std::to_string(order));
    }
    if (axis >= anchor.size()) throw std::invalid_argument("taylor_coeffs: axis beyond anchor dimension");
    return f.jet(anchor, axis, order);
}

double derivative(const JetSource& f, std::span<const double> point, std::size_t axis, int order)
{
    if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("derivative: order out of range");
    const Jet j = taylor_coeffs(f, point, axis, std::max(order, 2));
    if (!j.valid()) return std::numeric_limits<double>::quiet_NaN();
    return j.derivative(order);
}

}  // namespace strusr
