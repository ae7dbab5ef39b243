#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "strusr/expr.hpp"

namespace strusr {

/// How variables are spelled in text. Axis i prints as `x<i>`; when the
/// problem is time-dependent the time axis prints as `t` instead.
struct VariableNaming {
    std::optional<std::size_t> time_axis;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Fully parenthesised infix text. Binary nodes print as `(a op b)`, powers
/// as `(a ^ n)`, negation as `-(a)`, functions as `sin(a)`; constants carry
/// 17 significant digits so that parsing the text restores the tree exactly.
std::string to_string(const Expr& e, const VariableNaming& naming = {});

/// Parses infix text with the usual precedence. Accepts everything
/// to_string emits plus unparenthesised input such as `2.5*x0^4 - t`.
/// Throws ParseError carrying the byte offset of the problem.
Expr parse_expr(std::string_view text, const VariableNaming& naming = {});

}  // namespace strusr
