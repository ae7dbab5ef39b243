#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace strusr {

/// Highest truncation order a Jet can carry.
inline constexpr int kMaxJetOrder = 8;

/// Truncated Taylor series along one scalar direction.
///
/// Coefficient k holds f^(k)(x0) / k!, so a Jet of order K stores K + 1
/// numbers. Arithmetic is exact up to order K for smooth operands. A jet is
/// invalid as soon as any stored coefficient is non-finite; the division and
/// overflow paths rely on this instead of carrying a separate flag.
class Jet {
public:
    Jet() = default;

    /// Constant jet of the given order.
    Jet(double value, int order);

    /// Jet from explicit coefficients; order = coefficients.size() - 1.
    Jet(std::initializer_list<double> coefficients);
    explicit Jet(std::span<const double> coefficients);

    int order() const { return order_; }
    std::size_t size() const { return static_cast<std::size_t>(order_) + 1; }

    double operator[](std::size_t k) const { return c_[k]; }
    double& operator[](std::size_t k) { return c_[k]; }

    double value() const { return c_[0]; }

    /// k! * c_k, the k-th derivative along the jet direction.
    double derivative(int k) const;

    std::span<const double> coefficients() const { return {c_.data(), size()}; }

    bool valid() const;

    /// A jet with every coefficient set to quiet NaN.
    static Jet invalid(int order);

    friend Jet operator+(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a);
    friend Jet operator*(double s, const Jet& a);

private:
    std::array<double, kMaxJetOrder + 1> c_{};
    int order_ = 0;
};

/// Seed jet for one coordinate. The active axis carries (value, 1, 0, ...),
/// all frozen axes carry (value, 0, ...). Throws std::invalid_argument unless
/// order is in [2, kMaxJetOrder].
Jet jet_var(double value, bool is_active_axis, int order);

Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tanh(const Jet& a);

/// Integer power by repeated Cauchy products; exact for any leading value.
Jet pow_int(const Jet& a, int exponent);

/// Joint sin/cos recurrence; both series share the same pass.
void sin_cos(const Jet& a, Jet& s, Jet& c);

}  // namespace strusr
