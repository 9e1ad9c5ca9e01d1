#pragma once

#include <cmath>

namespace mlelab {

/// Degree-3 truncated Taylor arithmetic: value and first three derivatives
/// with respect to a single variable.  Exact chain rule, no finite
/// differences; used by families whose log-density is a composite of
/// rational functions of theta.
struct Jet3 {
    double f0 = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;

    static Jet3 constant(double c) { return {c, 0.0, 0.0, 0.0}; }
    static Jet3 variable(double x) { return {x, 1.0, 0.0, 0.0}; }
};

inline Jet3 operator+(const Jet3& a, const Jet3& b) {
    return {a.f0 + b.f0, a.f1 + b.f1, a.f2 + b.f2, a.f3 + b.f3};
}

inline Jet3 operator-(const Jet3& a, const Jet3& b) {
    return {a.f0 - b.f0, a.f1 - b.f1, a.f2 - b.f2, a.f3 - b.f3};
}

inline Jet3 operator-(const Jet3& a) { return {-a.f0, -a.f1, -a.f2, -a.f3}; }

inline Jet3 operator*(double c, const Jet3& a) {
    return {c * a.f0, c * a.f1, c * a.f2, c * a.f3};
}

inline Jet3 operator*(const Jet3& a, const Jet3& b) {
    return {a.f0 * b.f0,
            a.f1 * b.f0 + a.f0 * b.f1,
            a.f2 * b.f0 + 2.0 * a.f1 * b.f1 + a.f0 * b.f2,
            a.f3 * b.f0 + 3.0 * a.f2 * b.f1 + 3.0 * a.f1 * b.f2 + a.f0 * b.f3};
}

inline Jet3 reciprocal(const Jet3& g) {
    const double i1 = 1.0 / g.f0;
    const double i2 = i1 * i1;
    const double i3 = i2 * i1;
    const double i4 = i2 * i2;
    return {i1,
            -g.f1 * i2,
            2.0 * g.f1 * g.f1 * i3 - g.f2 * i2,
            -6.0 * g.f1 * g.f1 * g.f1 * i4 + 6.0 * g.f1 * g.f2 * i3 - g.f3 * i2};
}

inline Jet3 operator/(const Jet3& a, const Jet3& b) { return a * reciprocal(b); }

inline Jet3 log(const Jet3& g) {
    const double r = g.f1 / g.f0;
    return {std::log(g.f0),
            r,
            g.f2 / g.f0 - r * r,
            g.f3 / g.f0 - 3.0 * g.f1 * g.f2 / (g.f0 * g.f0) + 2.0 * r * r * r};
}

}  // namespace mlelab
