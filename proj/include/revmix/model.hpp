#pragma once

// Vector fields, coordinate changes and symmetries of the coupled-rotator
// phase-difference system and its reduced, time-periodic form on T^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "torus.hpp"

namespace revmix {

/// Coupling strength. Admissible range is 0 <= epsilon < 2 so that the
/// reduced-time denominator 2 + eps*cos(t - eta) stays positive.
class Params {
public:
    Params() = default;
    explicit Params(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon >= 0.0 && epsilon < 2.0)) {
            throw ConfigError("epsilon must satisfy 0 <= epsilon < 2, got " + std::to_string(epsilon));
        }
    }
    double epsilon() const noexcept { return epsilon_; }

private:
    double epsilon_ = 0.0;
};

/// Phase differences (psi1, psi2, psi3) of the four rotators.
struct Angles3 {
    double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0;

    Angles3 normalized() const noexcept {
        return {wrap_angle(psi1), wrap_angle(psi2), wrap_angle(psi3)};
    }
};

/// Reduced coordinates (xi, eta, rho); rho plays the role of time in the
/// non-autonomous form.
struct ReducedPoint3 {
    double xi = 0.0, eta = 0.0, rho = 0.0;

    ReducedPoint3 normalized() const noexcept {
        return {wrap_angle(xi), wrap_angle(eta), wrap_angle(rho)};
    }
};

struct Rate2 {
    double dxi = 0.0, deta = 0.0;
};

// ---------------------------------------------------------------------------
// Original three-phase system

inline std::array<double, 3> vf_original(const Angles3& psi, const Params& p) noexcept {
    const double e = p.epsilon();
    const double s1 = std::sin(psi.psi1), s2 = std::sin(psi.psi2), s3 = std::sin(psi.psi3);
    return {1.0 - 2.0 * e * s1 + e * s2,
            1.0 - 2.0 * e * s2 + e * s1 + e * s3,
            1.0 - 2.0 * e * s3 + e * s2};
}

inline ReducedPoint3 to_reduced(const Angles3& psi) noexcept {
    const double xi = 0.5 * (psi.psi1 - psi.psi3);
    const double eta = 0.5 * (psi.psi1 + psi.psi3 - kPi);
    const double rho = eta + psi.psi2 - kPi;
    return ReducedPoint3{xi, eta, rho}.normalized();
}

inline Angles3 from_reduced(const ReducedPoint3& r) noexcept {
    return Angles3{r.xi + r.eta + 0.5 * kPi, r.rho - r.eta + kPi, r.eta - r.xi + 0.5 * kPi}.normalized();
}

/// Time-reversing involution of the three-phase system.
inline Angles3 involution_R3(const Angles3& psi) noexcept {
    return Angles3{kPi - psi.psi3, kPi - psi.psi2, kPi - psi.psi1}.normalized();
}

/// Autonomous reduced system before the time change (rho as a phase variable).
inline std::array<double, 3> vf_autonomous(const ReducedPoint3& r, const Params& p) noexcept {
    const double e = p.epsilon();
    const double c = std::cos(r.rho - r.eta);
    return {2.0 * e * std::sin(r.xi) * std::sin(r.eta),
            1.0 - e * c - 2.0 * e * std::cos(r.xi) * std::cos(r.eta),
            2.0 + e * c};
}

// ---------------------------------------------------------------------------
// Reduced non-autonomous system on T^2, 2pi-periodic in t

/// Denominator 2 + eps*cos(t - eta); bounded below by 2 - eps.
inline double reduced_denominator(double eta, double t, const Params& p) noexcept {
    return 2.0 + p.epsilon() * std::cos(t - eta);
}

inline Rate2 vf_reduced(const TorusPoint2& pt, double t, const Params& p) noexcept {
    const double e = p.epsilon();
    const double c = std::cos(t - pt.eta);
    const double inv = 1.0 / (2.0 + e * c);
    return {2.0 * e * std::sin(pt.xi) * std::sin(pt.eta) * inv,
            (1.0 - e * c - 2.0 * e * std::cos(pt.xi) * std::cos(pt.eta)) * inv};
}

/// Trace of the linearization of vf_reduced, from hand-differentiated partials.
inline double divergence_reduced(const TorusPoint2& pt, double t, const Params& p) noexcept {
    const double e = p.epsilon();
    const double cx = std::cos(pt.xi);
    const double ce = std::cos(pt.eta), se = std::sin(pt.eta);
    const double c = std::cos(t - pt.eta), s = std::sin(t - pt.eta);
    const double inv = 1.0 / (2.0 + e * c);
    const double num_eta = 1.0 - e * c - 2.0 * e * cx * ce;
    // d/deta of cos(t - eta) is sin(t - eta)
    const double dxi_dxi = 2.0 * e * cx * se * inv;
    const double deta_deta = (-e * s + 2.0 * e * cx * se) * inv - num_eta * e * s * inv * inv;
    return dxi_dxi + deta_deta;
}

/// Full partial-derivative matrix of vf_reduced with respect to (xi, eta).
inline Jacobian2 linearization_reduced(const TorusPoint2& pt, double t, const Params& p) noexcept {
    const double e = p.epsilon();
    const double cx = std::cos(pt.xi), sx = std::sin(pt.xi);
    const double ce = std::cos(pt.eta), se = std::sin(pt.eta);
    const double c = std::cos(t - pt.eta), s = std::sin(t - pt.eta);
    const double inv = 1.0 / (2.0 + e * c);
    const double num_xi = 2.0 * e * sx * se;
    const double num_eta = 1.0 - e * c - 2.0 * e * cx * ce;
    const double dden = e * s;
    return {2.0 * e * cx * se * inv,
            2.0 * e * sx * ce * inv - num_xi * dden * inv * inv,
            2.0 * e * sx * ce * inv,
            (-e * s + 2.0 * e * cx * se) * inv - num_eta * dden * inv * inv};
}

// ---------------------------------------------------------------------------
// Symmetries on the cross-section torus

/// Reversing involution R: (xi, eta) -> (xi, -eta). Pairs with t -> -t.
inline TorusPoint2 involution_R(const TorusPoint2& pt) noexcept {
    return TorusPoint2::normalized(pt.xi, -pt.eta);
}

/// Time-shift symmetry sigma: (xi, eta) -> (pi - xi, pi + eta). Pairs with t -> t + pi.
inline TorusPoint2 sigma(const TorusPoint2& pt) noexcept {
    return TorusPoint2::normalized(kPi - pt.xi, kPi + pt.eta);
}

/// Reflection S: (xi, eta) -> (-xi, eta).
inline TorusPoint2 symmetry_S(const TorusPoint2& pt) noexcept {
    return TorusPoint2::normalized(-pt.xi, pt.eta);
}

/// Differentials of the symmetries (all constant).
inline constexpr Jacobian2 kDiffR{1.0, 0.0, 0.0, -1.0};
inline constexpr Jacobian2 kDiffSigma{-1.0, 0.0, 0.0, 1.0};
inline constexpr Jacobian2 kDiffS{-1.0, 0.0, 0.0, 1.0};

/// Distance from pt to the fixed set of R (the circles eta = 0 and eta = pi).
inline double distance_to_fix_r(const TorusPoint2& pt) noexcept {
    const double e = wrap_angle(pt.eta);
    return std::min({e, std::abs(e - kPi), kTwoPi - e});
}

/// Distance from pt to the S-invariant circles xi = 0 and xi = pi.
inline double distance_to_s_lines(const TorusPoint2& pt) noexcept {
    const double x = wrap_angle(pt.xi);
    return std::min({x, std::abs(x - kPi), kTwoPi - x});
}

}  // namespace revmix
