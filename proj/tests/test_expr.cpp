#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "strusr/expr.hpp"
#include "strusr/expr_text.hpp"

using namespace strusr;

namespace {

const VariableNaming kTime{1};

Expr p(const char* text, const VariableNaming& naming = {}) { return parse_expr(text, naming); }

SubtreeHandle at(std::initializer_list<std::uint8_t> path) { return SubtreeHandle{path}; }

}  // namespace

TEST_CASE("eval examples")
{
    const std::vector<double> origin{0.0, 0.0};
    CHECK(eval(p("sin(x0 - x1)"), origin) == 0.0);
    const std::vector<double> ones{1.0, 1.0, 1.0};
    CHECK(std::abs(eval(p("2.5 * x0^4 - 1.3 * x1^3 + 0.5 * x2^2"), ones) - 1.7) < 1e-15);
    const std::vector<double> zero{0.0};
    CHECK_FALSE(std::isfinite(eval(p("x0 / x0"), zero)));
}

TEST_CASE("subtrees are pre-order")
{
    CHECK(subtrees(Expr()).size() == 1);
    const Expr e = p("sin(x0 - t)", kTime);
    const auto hs = subtrees(e);
    REQUIRE(hs.size() == 4);
    CHECK(subtree_at(e, hs[0]).op() == Op::Sin);
    CHECK(subtree_at(e, hs[1]).op() == Op::Sub);
    CHECK(subtree_at(e, hs[2]) == Expr::variable(0));
    CHECK(subtree_at(e, hs[3]) == Expr::variable(1));

    const Expr f = p("x0 + x1 * x2");
    const auto fs = subtrees(f);
    REQUIRE(fs.size() == 5);
    const std::vector<Op> ops{Op::Add, Op::Var, Op::Mul, Op::Var, Op::Var};
    for (std::size_t i = 0; i < 5; ++i) CHECK(subtree_at(f, fs[i]).op() == ops[i]);
    CHECK(subtrees(f) == fs);
    CHECK_THROWS_AS(subtree_at(f, at({1, 1, 0})), std::out_of_range);
}

TEST_CASE("masking")
{
    CHECK(mask_subtree(p("sin(x0)"), at({0})) == p("sin(1)"));
    CHECK(mask_subtree(p("sin(x0)"), at({})) == Expr::constant(1.0));
    CHECK(mask_subtree(p("x0 * x1 + x2"), at({0})) == p("1 + x2"));
    CHECK_THROWS(mask_subtree(p("x0"), at({0})));
}

TEST_CASE("mask size identity")
{
    Rng rng(5);
    const auto lib = SymbolLibrary::standard(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Expr e = random_expr(lib, 6, rng);
        for (const auto& h : subtrees(e)) {
            const Expr m = mask_subtree(e, h);
            CHECK(m.size() <= e.size());
            CHECK(e.size() - subtree_at(e, h).size() + 1 == m.size());
        }
    }
}

TEST_CASE("swap examples")
{
    auto r = swap_subtrees(Expr::variable(0), at({}), p("t", kTime), at({}));
    REQUIRE(r);
    CHECK(r->first == Expr::variable(1));
    CHECK(r->second == Expr::variable(0));

    r = swap_subtrees(p("sin(x0)"), at({0}), p("2 + t", kTime), at({0}));
    REQUIRE(r);
    CHECK(r->first == p("sin(2)"));
    CHECK(r->second == p("x0 + t", kTime));

    // depth 10 chain of negations, graft a depth-2 subtree at the deepest leaf
    Expr deep = Expr::variable(0);
    for (int i = 0; i < 9; ++i) deep = -deep;
    REQUIRE(deep.depth() == 10);
    SubtreeHandle leaf;
    leaf.path.assign(9, 0);
    CHECK_FALSE(swap_subtrees(deep, leaf, p("sin(x0)"), at({})));
}

TEST_CASE("swap is an involution")
{
    Rng rng(8);
    const auto lib = SymbolLibrary::standard(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Expr a = random_expr(lib, 5, rng);
        const Expr b = random_expr(lib, 5, rng);
        const auto ha = subtrees(a);
        const auto hb = subtrees(b);
        const auto& sa = ha[std::uniform_int_distribution<std::size_t>(0, ha.size() - 1)(rng)];
        const auto& sb = hb[std::uniform_int_distribution<std::size_t>(0, hb.size() - 1)(rng)];
        const auto once = swap_subtrees(a, sa, b, sb);
        REQUIRE(once);
        const auto twice = swap_subtrees(once->first, sa, once->second, sb);
        REQUIRE(twice);
        CHECK(twice->first == a);
        CHECK(twice->second == b);
    }
}

TEST_CASE("random_expr")
{
    const auto lib = SymbolLibrary::standard(2);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Expr e = random_expr(lib, 1, rng);
        CHECK(e.size() == 1);
        CHECK((e.op() == Op::Const || e.op() == Op::Var));
    }
    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i) CHECK(random_expr(lib, 6, a) == random_expr(lib, 6, b));
    for (int i = 0; i < 1000; ++i) {
        const Expr e = random_expr(lib, 6, rng);
        CHECK(e.depth() <= 6);
        CHECK(well_formed(e, 2));
    }
    CHECK_THROWS(random_expr(lib, 0, rng));
}

TEST_CASE("complexity")
{
    CHECK(complexity(Expr::constant(3.0)) == 1);
    CHECK(complexity(p("sin(x0 - t)", kTime)) == 4);
    CHECK(complexity(Expr::constant(2.5) * pow(Expr::variable(0), 4)) == 4);
}

TEST_CASE("text round trip")
{
    CHECK(complexity(p("sin((x0 - t))", kTime)) == 4);
    try {
        p("sin(");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(p("x0 ^ 7"), ParseError);
    CHECK_THROWS_AS(p("t"), ParseError);
    CHECK(p("-2 ^ 2") == -pow(Expr::constant(2.0), 2));
    CHECK(p("-2") == Expr::constant(-2.0));

    Rng rng(17);
    const auto lib = SymbolLibrary::standard(3);
    const VariableNaming naming{2};
    for (int i = 0; i < 1000; ++i) {
        const Expr e = random_expr(lib, 7, rng);
        const std::string text = to_string(e, naming);
        const Expr back = parse_expr(text, naming);
        CHECK(back == e);
        CHECK(to_string(back, naming) == text);
    }
}

TEST_CASE("constants")
{
    const Expr e = p("1.5 * sin(2 * x0) + 3");
    CHECK(constants(e) == std::vector<double>{1.5, 2, 3});
    const std::vector<double> v{4, 5, 6};
    CHECK(with_constants(e, v) == p("4 * sin(5 * x0) + 6"));
    CHECK_THROWS_AS(with_constants(e, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("well_formed checks variable range")
{
    CHECK(well_formed(p("x0 + x1"), 2));
    CHECK_FALSE(well_formed(p("x0 + x2"), 2));
}
