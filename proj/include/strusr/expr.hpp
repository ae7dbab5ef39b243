#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace strusr {

using Rng = std::mt19937_64;

enum class Op : std::uint8_t {
    Const,
    Var,
    Neg,
    Sin,
    Cos,
    Exp,
    Pow,  // integer exponent stored on the node, one child
    Add,
    Sub,
    Mul,
    Div,
};

std::size_t arity(Op op);
bool is_binary(Op op);
const char* op_name(Op op);

inline constexpr int kMinPowExponent = 2;
inline constexpr int kMaxPowExponent = 6;

struct Node;

/// Immutable expression tree with structural sharing.
///
/// Every editing operation returns a new tree; unchanged subtrees are shared
/// between the old and the new value, so copies are cheap and Expr values can
/// be read from any number of threads.
class Expr {
public:
    /// The constant 1.
    Expr();

    static Expr constant(double value);
    static Expr variable(std::size_t axis);
    static Expr unary(Op op, Expr child);
    static Expr pow(Expr base, int exponent);
    static Expr binary(Op op, Expr lhs, Expr rhs);

    Op op() const;
    double value() const;
    std::size_t axis() const;
    int exponent() const;

    std::size_t arity() const;
    Expr child(std::size_t i) const;

    /// Node count.
    std::size_t size() const;
    /// Depth, a single node has depth 1.
    std::size_t depth() const;
    /// Bit i set when variable i appears somewhere in the tree.
    std::uint64_t axes_mask() const;

    friend bool operator==(const Expr& a, const Expr& b);

    const Node& node() const { return *node_; }
    const std::shared_ptr<const Node>& node_ptr() const { return node_; }
    static Expr from_node(std::shared_ptr<const Node> node) { return Expr(std::move(node)); }

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::Const;
    double value = 0.0;
    std::size_t axis = 0;
    int exponent = 0;
    std::size_t n_children = 0;
    std::shared_ptr<const Node> children[2];
    std::size_t size = 1;
    std::size_t depth = 1;
    std::uint64_t axes_mask = 0;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr pow(const Expr& a, int exponent);

/// Location of a node as the sequence of child indices from the root.
struct SubtreeHandle {
    std::vector<std::uint8_t> path;
    friend bool operator==(const SubtreeHandle&, const SubtreeHandle&) = default;
};

struct TreeLimits {
    std::size_t max_depth = 10;
    std::size_t max_size = 80;
    bool admits(const Expr& e) const { return e.depth() <= max_depth && e.size() <= max_size; }
};

/// Evaluates at a point. Non-finite intermediate results propagate as NaN or
/// infinity; nothing throws on numeric trouble.
double eval(const Expr& e, std::span<const double> point);

/// Every node in pre-order, root first.
std::vector<SubtreeHandle> subtrees(const Expr& e);

/// Throws std::out_of_range when the handle does not resolve in e.
Expr subtree_at(const Expr& e, const SubtreeHandle& h);

Expr replace_subtree(const Expr& e, const SubtreeHandle& h, const Expr& replacement);

/// Replaces the node at h by the constant 1.
Expr mask_subtree(const Expr& e, const SubtreeHandle& h);

/// Exchanges the subtree of a at sa with the subtree of b at sb. Returns
/// nullopt when either offspring would violate the limits.
std::optional<std::pair<Expr, Expr>> swap_subtrees(const Expr& a, const SubtreeHandle& sa, const Expr& b,
                                                   const SubtreeHandle& sb, const TreeLimits& limits = {});

std::size_t complexity(const Expr& e);

/// Constant values in pre-order.
std::vector<double> constants(const Expr& e);

/// Copy of e with its constants replaced, in pre-order. Throws
/// std::invalid_argument on a count mismatch.
Expr with_constants(const Expr& e, std::span<const double> values);

/// Checks arity, exponent range and variable range; returns false on any
/// violation.
bool well_formed(const Expr& e, std::size_t dimension);

/// Terminals and operators available to random generation.
struct SymbolLibrary {
    std::size_t num_variables = 1;
    std::vector<Op> unary_ops{Op::Sin, Op::Cos, Op::Exp, Op::Neg, Op::Pow};
    std::vector<Op> binary_ops{Op::Add, Op::Sub, Op::Mul, Op::Div};
    double constant_min = -3.0;
    double constant_max = 3.0;
    /// Chance that a non-forced node becomes a terminal during grow.
    double terminal_probability = 0.35;
    /// Chance that a terminal is a constant rather than a variable.
    double constant_probability = 0.25;

    static SymbolLibrary standard(std::size_t num_variables);

    /// Throws std::invalid_argument when the terminal or operator set is empty.
    void validate() const;
};

/// Grow-style random tree of depth at most max_depth. Nodes at the depth limit
/// are terminals.
Expr random_expr(const SymbolLibrary& lib, int max_depth, Rng& rng);

}  // namespace strusr
