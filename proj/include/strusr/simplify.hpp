#pragma once

#include <map>
#include <string>

#include "strusr/expr.hpp"

namespace strusr {

/// Constant folding plus removal of x * 1, x / 1, x + 0, x - 0 and double
/// negation; x - x, x * 0 and 0 / x become 0 and x / x becomes 1, dropping
/// removable singularities. Folding never produces non-finite constants; such
/// subtrees are left as they are.
Expr simplify(const Expr& e);

/// Sum of monomials. A monomial key lists its factors as `factor^power`
/// joined by `*` in sorted order; the constant term has the empty key.
/// Division by a single monomial gives negative powers, so x1 * (x2 / x1)
/// expands to x2. Other non-polynomial subtrees (sin, cos, exp, division by
/// a sum) become opaque factors keyed by their simplified text.
using Polynomial = std::map<std::string, double>;

Polynomial expand(const Expr& e);

struct StructureMatch {
    bool matched = false;
    /// Largest coefficient deviation over the union of monomials.
    double max_deviation = 0.0;
};

/// Compares the expanded forms: every monomial's coefficient must agree
/// within tolerance, monomials missing on one side counting as 0.
StructureMatch structure_match(const Expr& candidate, const Expr& target, double tolerance);

}  // namespace strusr
