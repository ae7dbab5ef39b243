#include "strusr/expr_text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace strusr {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset)
{
}

namespace {

std::string format_constant(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write(const Expr& e, const VariableNaming& naming, std::string& out)
{
    switch (e.op()) {
        case Op::Const: out += format_constant(e.value()); return;
        case Op::Var:
            if (naming.time_axis && *naming.time_axis == e.axis()) {
                out += 't';
            } else {
                out += 'x';
                out += std::to_string(e.axis());
            }
            return;
        case Op::Neg:
            out += "-(";
            write(e.child(0), naming, out);
            out += ')';
            return;
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
            out += op_name(e.op());
            out += '(';
            write(e.child(0), naming, out);
            out += ')';
            return;
        case Op::Pow: {
            std::string base;
            write(e.child(0), naming, base);
            out += '(';
            if (!base.empty() && base.front() == '-') {
                out += '(';
                out += base;
                out += ')';
            } else {
                out += base;
            }
            out += " ^ ";
            out += std::to_string(e.exponent());
            out += ')';
            return;
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            static constexpr const char* symbols[] = {" + ", " - ", " * ", " / "};
            const auto index = static_cast<std::size_t>(e.op()) - static_cast<std::size_t>(Op::Add);
            out += '(';
            write(e.child(0), naming, out);
            out += symbols[index];
            write(e.child(1), naming, out);
            out += ')';
            return;
        }
    }
}

class Parser {
public:
    Parser(std::string_view text, const VariableNaming& naming) : text_(text), naming_(naming) {}

    Expr parse()
    {
        Expr e = expression();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c)
    {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c)
    {
        if (!peek(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "', found end of input");
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    Expr expression()
    {
        Expr lhs = term();
        for (;;) {
            if (peek('+')) {
                ++pos_;
                lhs = lhs + term();
            } else if (peek('-')) {
                ++pos_;
                lhs = lhs - term();
            } else {
                return lhs;
            }
        }
    }

    Expr term()
    {
        Expr lhs = unary();
        for (;;) {
            if (peek('*')) {
                ++pos_;
                lhs = lhs * unary();
            } else if (peek('/')) {
                ++pos_;
                lhs = lhs / unary();
            } else {
                return lhs;
            }
        }
    }

    bool number_follows() const
    {
        return pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.');
    }

    Expr unary()
    {
        if (peek('+')) {
            ++pos_;
            return unary();
        }
        if (peek('-')) {
            ++pos_;
            skip_ws();
            if (number_follows()) {
                // a negative literal unless a power applies to it
                const double v = number();
                if (peek('^')) return -power_suffix(Expr::constant(v));
                return Expr::constant(-v);
            }
            return -unary();
        }
        return power_suffix(primary());
    }

    Expr power_suffix(Expr base)
    {
        if (!peek('^')) return base;
        ++pos_;
        skip_ws();
        const std::size_t start = pos_;
        int exponent = 0;
        const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), exponent);
        if (ec != std::errc{}) fail("expected integer exponent");
        if (exponent < kMinPowExponent || exponent > kMaxPowExponent) {
            pos_ = start;
            fail("exponent must be in [2, 6]");
        }
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return Expr::pow(std::move(base), exponent);
    }

    double number()
    {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
        if (ec != std::errc{}) fail("malformed number");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return v;
    }

    Expr primary()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected expression, found end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = expression();
            expect(')');
            return inner;
        }
        if (number_follows()) return Expr::constant(number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string_view word = text_.substr(start, pos_ - start);
            if (word == "sin" || word == "cos" || word == "exp" || word == "neg") {
                expect('(');
                Expr arg = expression();
                expect(')');
                if (word == "sin") return sin(arg);
                if (word == "cos") return cos(arg);
                if (word == "exp") return exp(arg);
                return -arg;
            }
            if (word == "t") {
                if (!naming_.time_axis) {
                    pos_ = start;
                    fail("'t' used but the problem has no time axis");
                }
                return Expr::variable(*naming_.time_axis);
            }
            if (word == "inf") return Expr::constant(std::numeric_limits<double>::infinity());
            if (word == "nan") return Expr::constant(std::numeric_limits<double>::quiet_NaN());
            if (word.size() > 1 && word[0] == 'x') {
                std::size_t axis = 0;
                const auto [ptr, ec] = std::from_chars(word.data() + 1, word.data() + word.size(), axis);
                if (ec == std::errc{} && ptr == word.data() + word.size() && axis < 64) return Expr::variable(axis);
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(word) + "'");
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    std::string_view text_;
    const VariableNaming& naming_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string to_string(const Expr& e, const VariableNaming& naming)
{
    std::string out;
    write(e, naming, out);
    return out;
}

Expr parse_expr(std::string_view text, const VariableNaming& naming) { return Parser(text, naming).parse(); }

}  // namespace strusr
