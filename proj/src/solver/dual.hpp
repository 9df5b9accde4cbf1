#pragma once

#include <array>
#include <cmath>

namespace nozzle::detail {

// Forward-mode dual number with N directional derivatives.
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double x) : v(x) {}  // NOLINT: implicit promotion from constants is intended

    static Dual variable(double x, int i) {
        Dual r(x);
        r.d[static_cast<std::size_t>(i)] = 1.0;
        return r;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator*=(double s) {
        v *= s;
        for (int i = 0; i < N; ++i) d[i] *= s;
        return *this;
    }
};

template <int N>
inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N>
inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N>
inline Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N>
inline Dual<N> operator*(Dual<N> a, double s) { return a *= s; }
template <int N>
inline Dual<N> operator*(double s, Dual<N> a) { return a *= s; }
template <int N>
inline Dual<N> operator+(Dual<N> a, double s) {
    a.v += s;
    return a;
}
template <int N>
inline Dual<N> operator+(double s, Dual<N> a) { return a + s; }
template <int N>
inline Dual<N> operator-(Dual<N> a, double s) {
    a.v -= s;
    return a;
}
template <int N>
inline Dual<N> operator-(double s, const Dual<N>& a) { return (-1.0 * a) + s; }
template <int N>
inline Dual<N> operator-(const Dual<N>& a) { return -1.0 * a; }

template <int N>
inline Dual<N> sqrt(const Dual<N>& a) {
    Dual<N> r(std::sqrt(a.v));
    const double k = 0.5 / r.v;
    for (int i = 0; i < N; ++i) r.d[i] = k * a.d[i];
    return r;
}
template <int N>
inline Dual<N> exp(const Dual<N>& a) {
    Dual<N> r(std::exp(a.v));
    for (int i = 0; i < N; ++i) r.d[i] = r.v * a.d[i];
    return r;
}
template <int N>
inline Dual<N> inv(const Dual<N>& a) {
    Dual<N> r(1.0 / a.v);
    const double k = -r.v * r.v;
    for (int i = 0; i < N; ++i) r.d[i] = k * a.d[i];
    return r;
}
inline double inv(double x) { return 1.0 / x; }

inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Dual<N>& x) { return x.v; }

}  // namespace nozzle::detail
