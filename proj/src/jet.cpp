#include "strusr/jet.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace strusr {

namespace {

void require_same_order(const Jet& a, const Jet& b)
{
    if (a.order() != b.order()) {
        throw std::invalid_argument("jet order mismatch: " + std::to_string(a.order()) + " vs " +
                                    std::to_string(b.order()));
    }
}

constexpr double factorial(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

Jet::Jet(double value, int order) : order_(order)
{
    if (order < 0 || order > kMaxJetOrder) {
        throw std::invalid_argument("jet order out of range: " + std::to_string(order));
    }
    c_[0] = value;
}

Jet::Jet(std::initializer_list<double> coefficients)
    : Jet(std::span<const double>(coefficients.begin(), coefficients.size()))
{
}

Jet::Jet(std::span<const double> coefficients)
{
    if (coefficients.empty() || coefficients.size() > kMaxJetOrder + 1) {
        throw std::invalid_argument("jet needs 1.." + std::to_string(kMaxJetOrder + 1) + " coefficients");
    }
    order_ = static_cast<int>(coefficients.size()) - 1;
    for (std::size_t k = 0; k < coefficients.size(); ++k) c_[k] = coefficients[k];
}

double Jet::derivative(int k) const { return factorial(k) * c_[static_cast<std::size_t>(k)]; }

bool Jet::valid() const
{
    for (std::size_t k = 0; k < size(); ++k) {
        if (!std::isfinite(c_[k])) return false;
    }
    return true;
}

Jet Jet::invalid(int order)
{
    Jet j(0.0, order);
    for (std::size_t k = 0; k < j.size(); ++k) j.c_[k] = std::numeric_limits<double>::quiet_NaN();
    return j;
}

Jet operator+(const Jet& a, const Jet& b)
{
    require_same_order(a, b);
    Jet r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.c_[k] += b.c_[k];
    return r;
}

Jet operator-(const Jet& a, const Jet& b)
{
    require_same_order(a, b);
    Jet r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.c_[k] -= b.c_[k];
    return r;
}

Jet operator-(const Jet& a)
{
    Jet r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.c_[k] = -r.c_[k];
    return r;
}

Jet operator*(double s, const Jet& a)
{
    Jet r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.c_[k] *= s;
    return r;
}

Jet operator*(const Jet& a, const Jet& b)
{
    require_same_order(a, b);
    Jet r(0.0, a.order());
    for (std::size_t k = 0; k < r.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
        r.c_[k] = acc;
    }
    return r;
}

Jet operator/(const Jet& a, const Jet& b)
{
    require_same_order(a, b);
    if (b.c_[0] == 0.0) return Jet::invalid(a.order());
    Jet q(0.0, a.order());
    for (std::size_t k = 0; k < q.size(); ++k) {
        double acc = a.c_[k];
        for (std::size_t j = 1; j <= k; ++j) acc -= b.c_[j] * q.c_[k - j];
        q.c_[k] = acc / b.c_[0];
    }
    return q;
}

Jet jet_var(double value, bool is_active_axis, int order)
{
    if (order < 2 || order > kMaxJetOrder) {
        throw std::invalid_argument("jet_var: order must be in [2, 8], got " + std::to_string(order));
    }
    Jet j(value, order);
    if (is_active_axis) j[1] = 1.0;
    return j;
}

Jet exp(const Jet& a)
{
    Jet e(std::exp(a[0]), a.order());
    for (std::size_t k = 1; k < e.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * a[j] * e[k - j];
        e[k] = acc / static_cast<double>(k);
    }
    return e;
}

void sin_cos(const Jet& a, Jet& s, Jet& c)
{
    s = Jet(std::sin(a[0]), a.order());
    c = Jet(std::cos(a[0]), a.order());
    for (std::size_t k = 1; k < s.size(); ++k) {
        double ss = 0.0;
        double cc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            const double ja = static_cast<double>(j) * a[j];
            ss += ja * c[k - j];
            cc -= ja * s[k - j];
        }
        s[k] = ss / static_cast<double>(k);
        c[k] = cc / static_cast<double>(k);
    }
}

Jet sin(const Jet& a)
{
    Jet s, c;
    sin_cos(a, s, c);
    return s;
}

Jet cos(const Jet& a)
{
    Jet s, c;
    sin_cos(a, s, c);
    return c;
}

Jet tanh(const Jet& a)
{
    // y' = (1 - y^2) z'
    Jet y(std::tanh(a[0]), a.order());
    Jet s(1.0 - y[0] * y[0], a.order());
    for (std::size_t k = 1; k < y.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * a[j] * s[k - j];
        y[k] = acc / static_cast<double>(k);
        double yy = 0.0;
        for (std::size_t j = 0; j <= k; ++j) yy += y[j] * y[k - j];
        s[k] = -yy;
    }
    return y;
}

Jet pow_int(const Jet& a, int exponent)
{
    if (exponent < 0) throw std::invalid_argument("pow_int: negative exponent");
    Jet r(1.0, a.order());
    for (int i = 0; i < exponent; ++i) r = r * a;
    return r;
}

}  // namespace strusr
