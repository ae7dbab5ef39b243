#include "strusr/expr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace strusr {

std::size_t arity(Op op)
{
    switch (op) {
        case Op::Const:
        case Op::Var: return 0;
        case Op::Neg:
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Pow: return 1;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: return 2;
    }
    return 0;
}

bool is_binary(Op op) { return arity(op) == 2; }

const char* op_name(Op op)
{
    switch (op) {
        case Op::Const: return "const";
        case Op::Var: return "var";
        case Op::Neg: return "neg";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Pow: return "pow";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
    }
    return "?";
}

namespace {

std::shared_ptr<const Node> make_node(Node n)
{
    n.size = 1;
    n.depth = 1;
    n.axes_mask = n.op == Op::Var ? (std::uint64_t{1} << n.axis) : 0;
    std::size_t child_depth = 0;
    for (std::size_t i = 0; i < n.n_children; ++i) {
        n.size += n.children[i]->size;
        child_depth = std::max(child_depth, n.children[i]->depth);
        n.axes_mask |= n.children[i]->axes_mask;
    }
    n.depth += child_depth;
    return std::make_shared<const Node>(std::move(n));
}

const std::shared_ptr<const Node>& one_node()
{
    static const std::shared_ptr<const Node> one = [] {
        Node n;
        n.op = Op::Const;
        n.value = 1.0;
        return make_node(n);
    }();
    return one;
}

bool equal_nodes(const Node& a, const Node& b)
{
    if (&a == &b) return true;
    if (a.op != b.op || a.size != b.size) return false;
    switch (a.op) {
        case Op::Const:
            // bitwise-style equality, NaN constants compare equal to themselves
            if (!(a.value == b.value) && !(std::isnan(a.value) && std::isnan(b.value))) return false;
            break;
        case Op::Var:
            if (a.axis != b.axis) return false;
            break;
        case Op::Pow:
            if (a.exponent != b.exponent) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.n_children; ++i) {
        if (!equal_nodes(*a.children[i], *b.children[i])) return false;
    }
    return true;
}

double eval_node(const Node& n, std::span<const double> x)
{
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return x[n.axis];
        case Op::Neg: return -eval_node(*n.children[0], x);
        case Op::Sin: return std::sin(eval_node(*n.children[0], x));
        case Op::Cos: return std::cos(eval_node(*n.children[0], x));
        case Op::Exp: return std::exp(eval_node(*n.children[0], x));
        case Op::Pow: {
            const double b = eval_node(*n.children[0], x);
            double r = b;
            for (int i = 1; i < n.exponent; ++i) r *= b;
            return r;
        }
        case Op::Add: return eval_node(*n.children[0], x) + eval_node(*n.children[1], x);
        case Op::Sub: return eval_node(*n.children[0], x) - eval_node(*n.children[1], x);
        case Op::Mul: return eval_node(*n.children[0], x) * eval_node(*n.children[1], x);
        case Op::Div: return eval_node(*n.children[0], x) / eval_node(*n.children[1], x);
    }
    return std::nan("");
}

void collect_handles(const Node& n, std::vector<std::uint8_t>& path, std::vector<SubtreeHandle>& out)
{
    out.push_back(SubtreeHandle{path});
    for (std::size_t i = 0; i < n.n_children; ++i) {
        path.push_back(static_cast<std::uint8_t>(i));
        collect_handles(*n.children[i], path, out);
        path.pop_back();
    }
}

std::shared_ptr<const Node> replace_at(const std::shared_ptr<const Node>& n, std::span<const std::uint8_t> path,
                                       const std::shared_ptr<const Node>& replacement)
{
    if (path.empty()) return replacement;
    const std::size_t i = path.front();
    if (i >= n->n_children) throw std::out_of_range("subtree handle does not resolve");
    Node copy = *n;
    copy.children[i] = replace_at(n->children[i], path.subspan(1), replacement);
    return make_node(std::move(copy));
}

void collect_constants(const Node& n, std::vector<double>& out)
{
    if (n.op == Op::Const) out.push_back(n.value);
    for (std::size_t i = 0; i < n.n_children; ++i) collect_constants(*n.children[i], out);
}

std::shared_ptr<const Node> rebuild_constants(const std::shared_ptr<const Node>& n, std::span<const double> values,
                                              std::size_t& next)
{
    if (n->op == Op::Const) {
        Node copy = *n;
        copy.value = values[next++];
        return make_node(std::move(copy));
    }
    if (n->n_children == 0) return n;
    Node copy = *n;
    for (std::size_t i = 0; i < n->n_children; ++i) copy.children[i] = rebuild_constants(n->children[i], values, next);
    return make_node(std::move(copy));
}

bool well_formed_node(const Node& n, std::size_t dimension)
{
    if (n.n_children != arity(n.op)) return false;
    if (n.op == Op::Var && n.axis >= dimension) return false;
    if (n.op == Op::Pow && (n.exponent < kMinPowExponent || n.exponent > kMaxPowExponent)) return false;
    for (std::size_t i = 0; i < n.n_children; ++i) {
        if (!n.children[i] || !well_formed_node(*n.children[i], dimension)) return false;
    }
    return true;
}

Expr grow(const SymbolLibrary& lib, int depth_left, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool has_functions = !lib.unary_ops.empty() || !lib.binary_ops.empty();
    if (depth_left <= 1 || !has_functions || unit(rng) < lib.terminal_probability) {
        const bool constant = lib.num_variables == 0 || unit(rng) < lib.constant_probability;
        if (constant) {
            std::uniform_real_distribution<double> c(lib.constant_min, lib.constant_max);
            return Expr::constant(c(rng));
        }
        std::uniform_int_distribution<std::size_t> v(0, lib.num_variables - 1);
        return Expr::variable(v(rng));
    }
    const std::size_t n_ops = lib.unary_ops.size() + lib.binary_ops.size();
    std::uniform_int_distribution<std::size_t> pick(0, n_ops - 1);
    const std::size_t k = pick(rng);
    if (k < lib.unary_ops.size()) {
        const Op op = lib.unary_ops[k];
        if (op == Op::Pow) {
            std::uniform_int_distribution<int> e(kMinPowExponent, kMaxPowExponent);
            const int exponent = e(rng);
            return Expr::pow(grow(lib, depth_left - 1, rng), exponent);
        }
        return Expr::unary(op, grow(lib, depth_left - 1, rng));
    }
    const Op op = lib.binary_ops[k - lib.unary_ops.size()];
    Expr lhs = grow(lib, depth_left - 1, rng);
    Expr rhs = grow(lib, depth_left - 1, rng);
    return Expr::binary(op, std::move(lhs), std::move(rhs));
}

}  // namespace

Expr::Expr() : node_(one_node()) {}

Expr Expr::constant(double value)
{
    Node n;
    n.op = Op::Const;
    n.value = value;
    return Expr(make_node(n));
}

Expr Expr::variable(std::size_t axis)
{
    if (axis >= 64) throw std::invalid_argument("variable axis out of range");
    Node n;
    n.op = Op::Var;
    n.axis = axis;
    return Expr(make_node(n));
}

Expr Expr::unary(Op op, Expr child)
{
    if (strusr::arity(op) != 1 || op == Op::Pow) {
        throw std::invalid_argument(std::string("not a unary operator: ") + op_name(op));
    }
    Node n;
    n.op = op;
    n.n_children = 1;
    n.children[0] = std::move(child.node_);
    return Expr(make_node(std::move(n)));
}

Expr Expr::pow(Expr base, int exponent)
{
    if (exponent < kMinPowExponent || exponent > kMaxPowExponent) {
        throw std::invalid_argument("pow exponent must be in [2, 6], got " + std::to_string(exponent));
    }
    Node n;
    n.op = Op::Pow;
    n.exponent = exponent;
    n.n_children = 1;
    n.children[0] = std::move(base.node_);
    return Expr(make_node(std::move(n)));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs)
{
    if (!is_binary(op)) throw std::invalid_argument(std::string("not a binary operator: ") + op_name(op));
    Node n;
    n.op = op;
    n.n_children = 2;
    n.children[0] = std::move(lhs.node_);
    n.children[1] = std::move(rhs.node_);
    return Expr(make_node(std::move(n)));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
std::size_t Expr::axis() const { return node_->axis; }
int Expr::exponent() const { return node_->exponent; }
std::size_t Expr::arity() const { return node_->n_children; }

Expr Expr::child(std::size_t i) const
{
    if (i >= node_->n_children) throw std::out_of_range("child index out of range");
    return Expr(node_->children[i]);
}

std::size_t Expr::size() const { return node_->size; }
std::size_t Expr::depth() const { return node_->depth; }
std::uint64_t Expr::axes_mask() const { return node_->axes_mask; }

bool operator==(const Expr& a, const Expr& b) { return equal_nodes(*a.node_, *b.node_); }

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }
Expr sin(const Expr& a) { return Expr::unary(Op::Sin, a); }
Expr cos(const Expr& a) { return Expr::unary(Op::Cos, a); }
Expr exp(const Expr& a) { return Expr::unary(Op::Exp, a); }
Expr pow(const Expr& a, int exponent) { return Expr::pow(a, exponent); }

double eval(const Expr& e, std::span<const double> point) { return eval_node(e.node(), point); }

std::vector<SubtreeHandle> subtrees(const Expr& e)
{
    std::vector<SubtreeHandle> out;
    out.reserve(e.size());
    std::vector<std::uint8_t> path;
    collect_handles(e.node(), path, out);
    return out;
}

Expr subtree_at(const Expr& e, const SubtreeHandle& h)
{
    const std::shared_ptr<const Node>* n = &e.node_ptr();
    for (const std::uint8_t i : h.path) {
        if (i >= (*n)->n_children) throw std::out_of_range("subtree handle does not resolve");
        n = &(*n)->children[i];
    }
    return Expr::from_node(*n);
}

Expr replace_subtree(const Expr& e, const SubtreeHandle& h, const Expr& replacement)
{
    return Expr::from_node(replace_at(e.node_ptr(), h.path, replacement.node_ptr()));
}

Expr mask_subtree(const Expr& e, const SubtreeHandle& h) { return replace_subtree(e, h, Expr::constant(1.0)); }

std::optional<std::pair<Expr, Expr>> swap_subtrees(const Expr& a, const SubtreeHandle& sa, const Expr& b,
                                                   const SubtreeHandle& sb, const TreeLimits& limits)
{
    const Expr from_a = subtree_at(a, sa);
    const Expr from_b = subtree_at(b, sb);
    Expr child_a = replace_subtree(a, sa, from_b);
    Expr child_b = replace_subtree(b, sb, from_a);
    if (!limits.admits(child_a) || !limits.admits(child_b)) return std::nullopt;
    return std::make_pair(std::move(child_a), std::move(child_b));
}

std::size_t complexity(const Expr& e) { return e.size(); }

std::vector<double> constants(const Expr& e)
{
    std::vector<double> out;
    collect_constants(e.node(), out);
    return out;
}

Expr with_constants(const Expr& e, std::span<const double> values)
{
    std::vector<double> current = constants(e);
    if (current.size() != values.size()) {
        throw std::invalid_argument("with_constants: expected " + std::to_string(current.size()) + " values, got " +
                                    std::to_string(values.size()));
    }
    std::size_t next = 0;
    return Expr::from_node(rebuild_constants(e.node_ptr(), values, next));
}

bool well_formed(const Expr& e, std::size_t dimension) { return well_formed_node(e.node(), dimension); }

SymbolLibrary SymbolLibrary::standard(std::size_t num_variables)
{
    SymbolLibrary lib;
    lib.num_variables = num_variables;
    return lib;
}

void SymbolLibrary::validate() const
{
    if (num_variables == 0 && constant_probability <= 0.0) throw std::invalid_argument("empty terminal set");
    if (unary_ops.empty() && binary_ops.empty()) throw std::invalid_argument("empty operator set");
    for (const Op op : unary_ops) {
        if (arity(op) != 1) throw std::invalid_argument(std::string("not a unary operator: ") + op_name(op));
    }
    for (const Op op : binary_ops) {
        if (strusr::arity(op) != 2) throw std::invalid_argument(std::string("not a binary operator: ") + op_name(op));
    }
    if (!(constant_min <= constant_max)) throw std::invalid_argument("constant range is empty");
}

Expr random_expr(const SymbolLibrary& lib, int max_depth, Rng& rng)
{
    if (max_depth < 1) throw std::invalid_argument("random_expr: max_depth must be >= 1");
    lib.validate();
    return grow(lib, max_depth, rng);
}

}  // namespace strusr
