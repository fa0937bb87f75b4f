#pragma once

// Time-shift maps of the reduced system, optionally with variational
// equations and the accumulated divergence integral.
//
// Internally each angle is carried as a point (cos, sin) on the unit circle,
// which keeps the right-hand side free of trigonometric calls. The state is
// projected back onto the circles after every step.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "errors.hpp"
#include "model.hpp"
#include "rk.hpp"
#include "torus.hpp"

namespace revmix {

enum class Scheme { rk4, rk8 };

struct IntegratorSettings {
    int steps_per_period = 200;
    Scheme order = Scheme::rk8;
    /// Accuracy target used by self-validation (see estimate_step_error).
    double tol = 1e-10;

    void validate() const {
        if (steps_per_period < 100) {
            throw ConfigError("steps_per_period must be >= 100, got " + std::to_string(steps_per_period));
        }
    }

    int nominal_order() const noexcept { return order == Scheme::rk8 ? 8 : 4; }

    /// Coarse settings for long statistical runs (clouds, box graphs).
    static IntegratorSettings fast() { return {100, Scheme::rk4, 1e-5}; }
};

struct FlowResult {
    TorusPoint2 point;
    Jacobian2 jacobian;
    /// Integral of the divergence along the path; log det of the jacobian.
    double divergence_integral = 0.0;
};

namespace detail {

struct Embedded {
    double cx, sx, ce, se;
};

struct FieldValue {
    double f_xi, f_eta, inv_den, num_xi, num_eta, shift_s;
};

inline FieldValue evaluate(const Embedded& z, double ct, double st, double e) noexcept {
    // cos(t - eta) and sin(t - eta) via angle-difference identities
    const double c = ct * z.ce + st * z.se;
    const double s = st * z.ce - ct * z.se;
    const double inv = 1.0 / (2.0 + e * c);
    const double num_xi = 2.0 * e * z.sx * z.se;
    const double num_eta = 1.0 - e * c - 2.0 * e * z.cx * z.ce;
    return {num_xi * inv, num_eta * inv, inv, num_xi, num_eta, s};
}

inline void project(double& c, double& s) noexcept {
    const double n = 1.0 / std::sqrt(c * c + s * s);
    c *= n;
    s *= n;
}

inline int step_count(double t0, double t1, const IntegratorSettings& s) {
    s.validate();
    const double periods = std::abs(t1 - t0) / kTwoPi;
    const long n = std::lround(std::ceil(periods * s.steps_per_period - 1e-9));
    return static_cast<int>(n < 1 ? 1 : n);
}

template <std::size_t N, class Field, class Post>
void dispatch(const IntegratorSettings& s, std::array<double, N>& y, double t0, double t1, Field&& f,
              Post&& post) {
    const int steps = step_count(t0, t1, s);
    if (s.order == Scheme::rk8) {
        rk::integrate(rk::kFehlberg8, y, t0, t1, steps, f, post);
    } else {
        rk::integrate(rk::kClassic4, y, t0, t1, steps, f, post);
    }
}

inline TorusPoint2 from_embedded(double cx, double sx, double ce, double se) {
    TorusPoint2 out{wrap_angle(std::atan2(sx, cx)), wrap_angle(std::atan2(se, ce))};
    if (!out.finite()) throw NumericalError("non-finite state in flow integration");
    return out;
}

}  // namespace detail

/// Solution of the reduced system through (pt, t0) evaluated at t1.
inline TorusPoint2 advance(const TorusPoint2& pt, double t0, double t1, const Params& p,
                           const IntegratorSettings& s) {
    if (t0 == t1) return pt.normalized();
    const double e = p.epsilon();
    std::array<double, 4> y{std::cos(pt.xi), std::sin(pt.xi), std::cos(pt.eta), std::sin(pt.eta)};
    auto field = [e](const std::array<double, 4>& v, double ct, double st, std::array<double, 4>& dv) {
        const auto f = detail::evaluate({v[0], v[1], v[2], v[3]}, ct, st, e);
        dv[0] = -v[1] * f.f_xi;
        dv[1] = v[0] * f.f_xi;
        dv[2] = -v[3] * f.f_eta;
        dv[3] = v[2] * f.f_eta;
    };
    auto post = [](std::array<double, 4>& v) {
        detail::project(v[0], v[1]);
        detail::project(v[2], v[3]);
    };
    detail::dispatch(s, y, t0, t1, field, post);
    return detail::from_embedded(y[0], y[1], y[2], y[3]);
}

/// As advance, also accumulating the integral of divergence_reduced along the path.
inline std::pair<TorusPoint2, double> advance_with_divergence(const TorusPoint2& pt, double t0, double t1,
                                                              const Params& p, const IntegratorSettings& s) {
    if (t0 == t1) return {pt.normalized(), 0.0};
    const double e = p.epsilon();
    std::array<double, 5> y{std::cos(pt.xi), std::sin(pt.xi), std::cos(pt.eta), std::sin(pt.eta), 0.0};
    auto field = [e](const std::array<double, 5>& v, double ct, double st, std::array<double, 5>& dv) {
        const auto f = detail::evaluate({v[0], v[1], v[2], v[3]}, ct, st, e);
        dv[0] = -v[1] * f.f_xi;
        dv[1] = v[0] * f.f_xi;
        dv[2] = -v[3] * f.f_eta;
        dv[3] = v[2] * f.f_eta;
        const double dxx = 2.0 * e * v[0] * v[3] * f.inv_den;
        const double dee = (-e * f.shift_s + 2.0 * e * v[0] * v[3]) * f.inv_den -
                           f.num_eta * e * f.shift_s * f.inv_den * f.inv_den;
        dv[4] = dxx + dee;
    };
    auto post = [](std::array<double, 5>& v) {
        detail::project(v[0], v[1]);
        detail::project(v[2], v[3]);
    };
    detail::dispatch(s, y, t0, t1, field, post);
    auto out = detail::from_embedded(y[0], y[1], y[2], y[3]);
    if (!std::isfinite(y[4])) throw NumericalError("non-finite divergence integral");
    return {out, y[4]};
}

/// State, derivative of the time-shift map, and divergence integral, all
/// integrated together (variational equations alongside the state).
inline FlowResult advance_full(const TorusPoint2& pt, double t0, double t1, const Params& p,
                               const IntegratorSettings& s) {
    if (t0 == t1) return {pt.normalized(), Jacobian2::identity(), 0.0};
    const double e = p.epsilon();
    std::array<double, 9> y{std::cos(pt.xi), std::sin(pt.xi), std::cos(pt.eta), std::sin(pt.eta),
                            1.0, 0.0, 0.0, 1.0, 0.0};
    auto field = [e](const std::array<double, 9>& v, double ct, double st, std::array<double, 9>& dv) {
        const auto f = detail::evaluate({v[0], v[1], v[2], v[3]}, ct, st, e);
        dv[0] = -v[1] * f.f_xi;
        dv[1] = v[0] * f.f_xi;
        dv[2] = -v[3] * f.f_eta;
        dv[3] = v[2] * f.f_eta;
        const double inv = f.inv_den;
        const double dden = e * f.shift_s;
        const double a11 = 2.0 * e * v[0] * v[3] * inv;
        const double a12 = 2.0 * e * v[1] * v[2] * inv - f.num_xi * dden * inv * inv;
        const double a21 = 2.0 * e * v[1] * v[2] * inv;
        const double a22 = (-e * f.shift_s + 2.0 * e * v[0] * v[3]) * inv - f.num_eta * dden * inv * inv;
        dv[4] = a11 * v[4] + a12 * v[6];
        dv[5] = a11 * v[5] + a12 * v[7];
        dv[6] = a21 * v[4] + a22 * v[6];
        dv[7] = a21 * v[5] + a22 * v[7];
        dv[8] = a11 + a22;
    };
    auto post = [](std::array<double, 9>& v) {
        detail::project(v[0], v[1]);
        detail::project(v[2], v[3]);
    };
    detail::dispatch(s, y, t0, t1, field, post);
    FlowResult r{detail::from_embedded(y[0], y[1], y[2], y[3]), {y[4], y[5], y[6], y[7]}, y[8]};
    if (!r.jacobian.finite() || !std::isfinite(r.divergence_integral)) {
        throw NumericalError("non-finite variational state");
    }
    return r;
}

inline std::pair<TorusPoint2, Jacobian2> advance_with_variational(const TorusPoint2& pt, double t0, double t1,
                                                                  const Params& p, const IntegratorSettings& s) {
    auto r = advance_full(pt, t0, t1, p, s);
    return {r.point, r.jacobian};
}

namespace detail {

inline constexpr std::size_t kLanes = 8;

/// Advance kLanes points in lockstep; the lanes vectorize. When `div` is
/// non-null the divergence integral of each lane is written there.
template <bool WithDivergence>
void advance_lanes(TorusPoint2* pts, double* div, double t0, double t1, double e, const IntegratorSettings& s) {
    constexpr std::size_t B = kLanes;
    constexpr std::size_t N = (WithDivergence ? 5 : 4) * B;
    std::array<double, N> y{};
    for (std::size_t l = 0; l < B; ++l) {
        y[l] = std::cos(pts[l].xi);
        y[B + l] = std::sin(pts[l].xi);
        y[2 * B + l] = std::cos(pts[l].eta);
        y[3 * B + l] = std::sin(pts[l].eta);
    }
    auto field = [e](const std::array<double, N>& v, double ct, double st, std::array<double, N>& dv) {
        for (std::size_t l = 0; l < B; ++l) {
            const double cx = v[l], sx = v[B + l], ce = v[2 * B + l], se = v[3 * B + l];
            const double c = ct * ce + st * se;
            const double inv = 1.0 / (2.0 + e * c);
            const double num_eta = 1.0 - e * c - 2.0 * e * cx * ce;
            const double f1 = 2.0 * e * sx * se * inv;
            const double f2 = num_eta * inv;
            dv[l] = -sx * f1;
            dv[B + l] = cx * f1;
            dv[2 * B + l] = -se * f2;
            dv[3 * B + l] = ce * f2;
            if constexpr (WithDivergence) {
                const double s = st * ce - ct * se;
                dv[4 * B + l] = 2.0 * e * cx * se * inv + (-e * s + 2.0 * e * cx * se) * inv -
                                num_eta * e * s * inv * inv;
            }
        }
    };
    auto post = [](std::array<double, N>& v) {
        for (std::size_t l = 0; l < B; ++l) {
            const double n1 = 1.0 / std::sqrt(v[l] * v[l] + v[B + l] * v[B + l]);
            v[l] *= n1;
            v[B + l] *= n1;
            const double n2 = 1.0 / std::sqrt(v[2 * B + l] * v[2 * B + l] + v[3 * B + l] * v[3 * B + l]);
            v[2 * B + l] *= n2;
            v[3 * B + l] *= n2;
        }
    };
    dispatch(s, y, t0, t1, field, post);
    for (std::size_t l = 0; l < B; ++l) {
        pts[l] = from_embedded(y[l], y[B + l], y[2 * B + l], y[3 * B + l]);
        if constexpr (WithDivergence) div[l] = y[4 * B + l];
    }
}

}  // namespace detail

/// Advance many independent points over the same time interval, in place.
/// Equivalent to calling advance on each point; faster for large sets.
/// If `divergence` is non-empty it must match `pts` in size and receives
/// the per-point divergence integrals.
inline void advance_batch(std::span<TorusPoint2> pts, double t0, double t1, const Params& p,
                          const IntegratorSettings& s, std::span<double> divergence = {}) {
    s.validate();
    if (!divergence.empty() && divergence.size() != pts.size()) {
        throw ConfigError("advance_batch: divergence buffer size mismatch");
    }
    constexpr std::size_t B = detail::kLanes;
    const bool with_div = !divergence.empty();
    std::array<TorusPoint2, B> lane{};
    std::array<double, B> lane_div{};
    for (std::size_t base = 0; base < pts.size(); base += B) {
        const std::size_t n = std::min(B, pts.size() - base);
        for (std::size_t l = 0; l < B; ++l) lane[l] = pts[base + std::min(l, n - 1)];
        if (t0 != t1) {
            if (with_div) {
                detail::advance_lanes<true>(lane.data(), lane_div.data(), t0, t1, p.epsilon(), s);
            } else {
                detail::advance_lanes<false>(lane.data(), nullptr, t0, t1, p.epsilon(), s);
            }
        } else {
            lane_div.fill(0.0);
        }
        for (std::size_t l = 0; l < n; ++l) {
            pts[base + l] = lane[l].normalized();
            if (with_div) divergence[base + l] = lane_div[l];
        }
    }
}

/// Torus distance between the result at the given settings and at twice the
/// step count; a cheap a-posteriori error estimate.
inline double estimate_step_error(const TorusPoint2& pt, double t0, double t1, const Params& p,
                                  const IntegratorSettings& s) {
    IntegratorSettings fine = s;
    fine.steps_per_period *= 2;
    return torus_distance(advance(pt, t0, t1, p, s), advance(pt, t0, t1, p, fine));
}

}  // namespace revmix
