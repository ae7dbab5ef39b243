#include "strusr/simplify.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "strusr/expr_text.hpp"

namespace strusr {

namespace {

bool is_const(const Expr& e, double v) { return e.op() == Op::Const && e.value() == v; }

Expr fold(const Expr& e)
{
    const std::vector<double> none;
    const double v = eval(e, none);
    return std::isfinite(v) ? Expr::constant(v) : e;
}

}  // namespace

Expr simplify(const Expr& e)
{
    switch (e.op()) {
    case Op::Const:
    case Op::Var:
        return e;
    case Op::Neg: {
        const Expr c = simplify(e.child(0));
        if (c.op() == Op::Neg) return c.child(0);
        const Expr out = -c;
        return c.op() == Op::Const ? fold(out) : out;
    }
    case Op::Sin:
    case Op::Cos:
    case Op::Exp: {
        const Expr out = Expr::unary(e.op(), simplify(e.child(0)));
        return out.child(0).op() == Op::Const ? fold(out) : out;
    }
    case Op::Pow: {
        const Expr out = pow(simplify(e.child(0)), e.exponent());
        return out.child(0).op() == Op::Const ? fold(out) : out;
    }
    default:
        break;
    }
    const Expr a = simplify(e.child(0));
    const Expr b = simplify(e.child(1));
    const Expr out = Expr::binary(e.op(), a, b);
    if (a.op() == Op::Const && b.op() == Op::Const) return fold(out);
    switch (e.op()) {
    case Op::Add:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
    case Op::Sub:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return simplify(-b);
        if (a == b) return Expr::constant(0.0);
        break;
    case Op::Mul:
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
        break;
    case Op::Div:
        if (is_const(b, 1.0)) return a;
        if (is_const(a, 0.0)) return Expr::constant(0.0);
        if (a == b) return Expr::constant(1.0);
        break;
    default:
        break;
    }
    return out;
}

namespace {

using Factors = std::map<std::string, int>;

// Products beyond this many term pairs are kept opaque.
constexpr std::size_t kMaxProductTerms = 100000;

std::string key_of(const Factors& f)
{
    std::string k;
    for (const auto& [name, power] : f) {
        if (power == 0) continue;
        if (!k.empty()) k += '*';
        k += name + '^' + std::to_string(power);
    }
    return k;
}

Factors factors_of(const std::string& key)
{
    Factors f;
    std::size_t pos = 0;
    while (pos < key.size()) {
        // opaque factor names are parenthesised text that may contain '*'
        int depth = 0;
        std::size_t caret = pos;
        for (; caret < key.size(); ++caret) {
            if (key[caret] == '(') ++depth;
            if (key[caret] == ')') --depth;
            if (key[caret] == '^' && depth == 0) break;
        }
        std::size_t end = key.find('*', caret);
        if (end == std::string::npos) end = key.size();
        f[key.substr(pos, caret - pos)] += std::stoi(key.substr(caret + 1, end - caret - 1));
        pos = end + 1;
    }
    return f;
}

Polynomial scaled(Polynomial p, double s)
{
    for (auto& [k, v] : p) v *= s;
    return p;
}

Polynomial sum(Polynomial a, const Polynomial& b, double sign)
{
    for (const auto& [k, v] : b) a[k] += sign * v;
    return a;
}

Polynomial product(const Polynomial& a, const Polynomial& b)
{
    Polynomial out;
    for (const auto& [ka, va] : a) {
        for (const auto& [kb, vb] : b) {
            Factors f = factors_of(ka);
            for (const auto& [name, power] : factors_of(kb)) f[name] += power;
            out[key_of(f)] += va * vb;
        }
    }
    return out;
}

Polynomial atom(const Expr& e)
{
    return {{"(" + to_string(e) + ")^1", 1.0}};
}

Polynomial expand_simplified(const Expr& e)
{
    switch (e.op()) {
    case Op::Const:
        return {{"", e.value()}};
    case Op::Var:
        return {{"x" + std::to_string(e.axis()) + "^1", 1.0}};
    case Op::Neg:
        return scaled(expand_simplified(e.child(0)), -1.0);
    case Op::Pow: {
        const Polynomial base = expand_simplified(e.child(0));
        Polynomial out = base;
        for (int i = 1; i < e.exponent(); ++i) {
            if (out.size() * base.size() > kMaxProductTerms) return atom(e);
            out = product(out, base);
        }
        return out;
    }
    case Op::Add:
        return sum(expand_simplified(e.child(0)), expand_simplified(e.child(1)), 1.0);
    case Op::Sub:
        return sum(expand_simplified(e.child(0)), expand_simplified(e.child(1)), -1.0);
    case Op::Mul: {
        const Polynomial a = expand_simplified(e.child(0));
        const Polynomial b = expand_simplified(e.child(1));
        if (a.size() * b.size() > kMaxProductTerms) return atom(e);
        return product(a, b);
    }
    case Op::Div: {
        // division by a single monomial gives negative powers
        const Polynomial d = expand_simplified(e.child(1));
        if (d.size() != 1 || d.begin()->second == 0.0) return atom(e);
        Factors inv = factors_of(d.begin()->first);
        for (auto& [name, power] : inv) power = -power;
        return product(expand_simplified(e.child(0)), {{key_of(inv), 1.0 / d.begin()->second}});
    }
    default:
        return atom(e);
    }
}

}  // namespace

Polynomial expand(const Expr& e)
{
    Polynomial p = expand_simplified(simplify(e));
    for (auto it = p.begin(); it != p.end();) {
        it = it->second == 0.0 ? p.erase(it) : std::next(it);
    }
    return p;
}

StructureMatch structure_match(const Expr& candidate, const Expr& target, double tolerance)
{
    const Polynomial c = expand(candidate);
    const Polynomial t = expand(target);
    StructureMatch m;
    for (const auto& [k, v] : t) {
        const auto it = c.find(k);
        m.max_deviation = std::max(m.max_deviation, std::abs((it == c.end() ? 0.0 : it->second) - v));
    }
    for (const auto& [k, v] : c) {
        if (!t.count(k)) m.max_deviation = std::max(m.max_deviation, std::abs(v));
    }
    if (!std::isfinite(m.max_deviation)) m.max_deviation = std::numeric_limits<double>::infinity();
    m.matched = m.max_deviation <= tolerance;
    return m;
}

}  // namespace strusr
