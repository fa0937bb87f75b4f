#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

namespace revmix {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2pi).
inline double wrap_angle(double a) noexcept {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative number can round up to exactly 2pi
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

/// Reduce an angle difference to (-pi, pi].
inline double wrap_signed(double a) noexcept {
    double r = wrap_angle(a);
    if (r > kPi) r -= kTwoPi;
    return r;
}

/// Point (xi, eta) on the cross-section torus.
struct TorusPoint2 {
    double xi = 0.0;
    double eta = 0.0;

    static TorusPoint2 normalized(double xi, double eta) noexcept {
        return {wrap_angle(xi), wrap_angle(eta)};
    }
    TorusPoint2 normalized() const noexcept { return normalized(xi, eta); }
    bool finite() const noexcept { return std::isfinite(xi) && std::isfinite(eta); }
};

/// Componentwise shortest angular displacement b - a.
inline std::array<double, 2> torus_delta(const TorusPoint2& a, const TorusPoint2& b) noexcept {
    return {wrap_signed(b.xi - a.xi), wrap_signed(b.eta - a.eta)};
}

/// Euclidean length of the componentwise shortest displacement.
inline double torus_distance(const TorusPoint2& a, const TorusPoint2& b) noexcept {
    auto d = torus_delta(a, b);
    return std::hypot(d[0], d[1]);
}

/// Row-major 2x2 real matrix.
struct Jacobian2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    static constexpr Jacobian2 identity() noexcept { return {1.0, 0.0, 0.0, 1.0}; }

    double det() const noexcept { return a * d - b * c; }
    double trace() const noexcept { return a + d; }
    bool finite() const noexcept {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
    }

    friend Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r) noexcept {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }

    std::array<double, 2> apply(double x, double y) const noexcept {
        return {a * x + b * y, c * x + d * y};
    }

    Jacobian2 inverse() const noexcept {
        const double id = 1.0 / det();
        return {d * id, -b * id, -c * id, a * id};
    }

    /// Eigenvalues ordered by decreasing modulus (real pairs) or (+imag, -imag).
    std::pair<std::complex<double>, std::complex<double>> eigenvalues() const noexcept {
        const double tr = trace();
        const double dt = det();
        const double disc = 0.25 * tr * tr - dt;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            // avoid cancellation in the smaller root
            const double big = 0.5 * tr + (tr >= 0.0 ? s : -s);
            const double small = big != 0.0 ? dt / big : 0.5 * tr - (tr >= 0.0 ? s : -s);
            return {std::complex<double>(big, 0.0), std::complex<double>(small, 0.0)};
        }
        const double s = std::sqrt(-disc);
        return {std::complex<double>(0.5 * tr, s), std::complex<double>(0.5 * tr, -s)};
    }

    /// Unit eigenvector for a real eigenvalue.
    std::array<double, 2> eigenvector(double lambda) const noexcept {
        // rows of (M - lambda I); pick the better conditioned one
        const double r0x = a - lambda, r0y = b;
        const double r1x = c, r1y = d - lambda;
        double vx, vy;
        if (std::hypot(r0x, r0y) >= std::hypot(r1x, r1y)) {
            vx = -r0y;
            vy = r0x;
        } else {
            vx = -r1y;
            vy = r1x;
        }
        const double n = std::hypot(vx, vy);
        if (n == 0.0) return {1.0, 0.0};
        return {vx / n, vy / n};
    }
};

}  // namespace revmix
