#pragma once

// Forward-mode differentiation used by the chart and distribution galleries.
//
//   Dual<D>  first derivatives in D variables (area elements, Jacobians)
//   Jet      truncated multivariate Taylor polynomial of arbitrary order
//            (derivative tables, Monge-Ampere mixed partials)
//
// Both types support the arithmetic and elementary functions the gallery
// formulas need, so one templated formula yields values, Jacobians and
// high-order derivative tables with no finite differencing.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

namespace finitype {

template <int D>
struct Dual {
    double v = 0.0;
    std::array<double, D> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit promotion from constants

    static Dual variable(double value, int i) {
        Dual r(value);
        r.d[static_cast<std::size_t>(i)] = 1.0;
        return r;
    }
};

template <int D>
Dual<D> chain(const Dual<D>& x, double value, double slope) {
    Dual<D> r(value);
    for (int i = 0; i < D; ++i) r.d[i] = slope * x.d[i];
    return r;
}

template <int D>
Dual<D> operator+(const Dual<D>& a, const Dual<D>& b) {
    Dual<D> r(a.v + b.v);
    for (int i = 0; i < D; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
template <int D>
Dual<D> operator-(const Dual<D>& a, const Dual<D>& b) {
    Dual<D> r(a.v - b.v);
    for (int i = 0; i < D; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
template <int D>
Dual<D> operator-(const Dual<D>& a) {
    return chain(a, -a.v, -1.0);
}
template <int D>
Dual<D> operator*(const Dual<D>& a, const Dual<D>& b) {
    Dual<D> r(a.v * b.v);
    for (int i = 0; i < D; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
template <int D>
Dual<D> operator/(const Dual<D>& a, const Dual<D>& b) {
    Dual<D> r(a.v / b.v);
    const double inv2 = 1.0 / (b.v * b.v);
    for (int i = 0; i < D; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
    return r;
}
template <int D> Dual<D> operator+(const Dual<D>& a, double b) { return a + Dual<D>(b); }
template <int D> Dual<D> operator+(double a, const Dual<D>& b) { return Dual<D>(a) + b; }
template <int D> Dual<D> operator-(const Dual<D>& a, double b) { return a - Dual<D>(b); }
template <int D> Dual<D> operator-(double a, const Dual<D>& b) { return Dual<D>(a) - b; }
template <int D> Dual<D> operator*(const Dual<D>& a, double b) { return a * Dual<D>(b); }
template <int D> Dual<D> operator*(double a, const Dual<D>& b) { return Dual<D>(a) * b; }
template <int D> Dual<D> operator/(const Dual<D>& a, double b) { return a / Dual<D>(b); }
template <int D> Dual<D> operator/(double a, const Dual<D>& b) { return Dual<D>(a) / b; }

template <int D> Dual<D> sqrt(const Dual<D>& x) {
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s);
}
template <int D> Dual<D> exp(const Dual<D>& x) {
    const double e = std::exp(x.v);
    return chain(x, e, e);
}
template <int D> Dual<D> log(const Dual<D>& x) { return chain(x, std::log(x.v), 1.0 / x.v); }
template <int D> Dual<D> sin(const Dual<D>& x) { return chain(x, std::sin(x.v), std::cos(x.v)); }
template <int D> Dual<D> cos(const Dual<D>& x) { return chain(x, std::cos(x.v), -std::sin(x.v)); }
template <int D> Dual<D> pow(const Dual<D>& x, double a) {
    return chain(x, std::pow(x.v, a), a * std::pow(x.v, a - 1.0));
}

inline double value_of(double x) { return x; }
template <int D> double value_of(const Dual<D>& x) { return x.v; }

// Multi-indices of total degree <= order in `vars` variables, in graded
// lexicographic order, with a precomputed product table. Instances are
// shared and immutable.
class MultiIndexSet {
public:
    static std::shared_ptr<const MultiIndexSet> get(int vars, int order);

    int vars() const { return vars_; }
    int order() const { return order_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<int>& index(std::size_t k) const { return indices_[k]; }
    int degree(std::size_t k) const { return degree_[k]; }
    // Position of alpha, or -1 if |alpha| > order.
    int find(const std::vector<int>& alpha) const;

    struct Product {
        std::uint32_t a, b, sum;
    };
    const std::vector<Product>& products() const { return products_; }

    MultiIndexSet(int vars, int order);

private:
    int vars_;
    int order_;
    std::vector<std::vector<int>> indices_;
    std::vector<int> degree_;
    std::vector<Product> products_;
};

// Truncated Taylor polynomial: coefficient k holds d^alpha f / alpha! for
// alpha = set.index(k).
class Jet {
public:
    Jet() = default;
    Jet(double c);  // NOLINT: constants promote lazily (no index set yet)
    explicit Jet(std::shared_ptr<const MultiIndexSet> set, double c = 0.0);

    static Jet variable(std::shared_ptr<const MultiIndexSet> set, int i, double value);

    double value() const { return coeffs_.empty() ? constant_ : coeffs_[0]; }
    // Partial derivative d^alpha at the expansion point.
    double derivative(const std::vector<int>& alpha) const;
    double coefficient(std::size_t k) const { return coeffs_.empty() ? (k == 0 ? constant_ : 0.0) : coeffs_[k]; }
    const std::shared_ptr<const MultiIndexSet>& set() const { return set_; }
    bool is_constant() const { return !set_; }

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a);

    // f(x0 + h) = sum_m derivs[m]/m! h^m where x0 = value(); derivs[m] = f^(m)(x0).
    Jet compose(const std::vector<double>& derivs) const;

private:
    void promote(const std::shared_ptr<const MultiIndexSet>& set);

    std::shared_ptr<const MultiIndexSet> set_;
    std::vector<double> coeffs_;
    double constant_ = 0.0;
};

Jet sqrt(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet pow(const Jet& x, double a);

inline double value_of(const Jet& x) { return x.value(); }

// Integer power by repeated squaring; exact on polynomial jets.
template <class T>
T ipow(const T& x, int k) {
    if (k == 0) return T(1.0);
    if (k < 0) return T(1.0) / ipow(x, -k);
    T result(1.0);
    T base = x;
    bool first = true;
    while (k > 0) {
        if (k & 1) {
            result = first ? base : result * base;
            first = false;
        }
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

}  // namespace finitype
