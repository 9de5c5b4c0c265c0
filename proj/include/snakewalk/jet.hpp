#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace snakewalk {

/// Truncated Taylor series a_0 + a_1 e + ... + a_N e^N.
///
/// Arithmetic drops every term of order above N, which makes Jet a forward-mode
/// automatic differentiation type for derivatives up to order N.
template <std::size_t N>
struct Jet {
    std::array<double, N + 1> c{};

    Jet() = default;
    Jet(double value) { c[0] = value; }  // NOLINT: implicit lift of constants

    static Jet variable(double value) {
        Jet j(value);
        if constexpr (N >= 1) j.c[1] = 1.0;
        return j;
    }

    double value() const { return c[0]; }

    /// m-th derivative at the expansion point: m! * a_m.
    double derivative(std::size_t m) const {
        double f = 1.0;
        for (std::size_t i = 2; i <= m; ++i) f *= static_cast<double>(i);
        return f * c[m];
    }

    Jet& operator+=(const Jet& o) {
        for (std::size_t i = 0; i <= N; ++i) c[i] += o.c[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (std::size_t i = 0; i <= N; ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet& operator*=(double s) {
        for (auto& x : c) x *= s;
        return *this;
    }
    Jet operator-() const {
        Jet r = *this;
        r *= -1.0;
        return r;
    }
};

template <std::size_t N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <std::size_t N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <std::size_t N>
Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <std::size_t N>
Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <std::size_t N>
Jet<N> operator+(Jet<N> a, double s) {
    a.c[0] += s;
    return a;
}
template <std::size_t N>
Jet<N> operator+(double s, Jet<N> a) { return a + s; }
template <std::size_t N>
Jet<N> operator-(Jet<N> a, double s) {
    a.c[0] -= s;
    return a;
}
template <std::size_t N>
Jet<N> operator-(double s, const Jet<N>& a) { return (-a) + s; }

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (std::size_t i = 0; i <= N; ++i)
        for (std::size_t j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

namespace detail {

// sin and cos of the nilpotent part h (h.c[0] == 0) via their power series.
template <std::size_t N>
void sincos_nilpotent(const Jet<N>& h, Jet<N>& s, Jet<N>& co) {
    s = Jet<N>(0.0);
    co = Jet<N>(1.0);
    Jet<N> power(1.0);
    double factorial = 1.0;
    for (std::size_t m = 1; m <= N; ++m) {
        power = power * h;
        factorial *= static_cast<double>(m);
        const double sign = ((m / 2) % 2 == 0) ? 1.0 : -1.0;
        if (m % 2 == 1)
            s += power * (sign / factorial);
        else
            co += power * (sign / factorial);
    }
}

}  // namespace detail

template <std::size_t N>
Jet<N> sin(const Jet<N>& x) {
    Jet<N> h = x;
    h.c[0] = 0.0;
    Jet<N> sh, ch;
    detail::sincos_nilpotent(h, sh, ch);
    return ch * std::sin(x.c[0]) + sh * std::cos(x.c[0]);
}

template <std::size_t N>
Jet<N> cos(const Jet<N>& x) {
    Jet<N> h = x;
    h.c[0] = 0.0;
    Jet<N> sh, ch;
    detail::sincos_nilpotent(h, sh, ch);
    return ch * std::cos(x.c[0]) - sh * std::sin(x.c[0]);
}

}  // namespace snakewalk
