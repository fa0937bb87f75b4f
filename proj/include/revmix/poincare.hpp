#pragma once

// Poincare map T = T_{0->2pi} on the section t = 0 (mod 2pi), its
// orientation-reversing square root T* = sigma o T_{0->pi}, and inverses.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"

namespace revmix {

enum class MapKind { T, Tstar, Tinverse, TstarInverse };

inline const char* to_string(MapKind k) noexcept {
    switch (k) {
        case MapKind::T: return "T";
        case MapKind::Tstar: return "Tstar";
        case MapKind::Tinverse: return "Tinverse";
        case MapKind::TstarInverse: return "TstarInverse";
    }
    return "?";
}

struct MapSpec {
    MapKind kind = MapKind::T;
    int power = 1;
    Params params{};
    IntegratorSettings settings{};

    void validate() const {
        if (power < 1) throw ConfigError("map power must be >= 1");
        settings.validate();
    }
    MapSpec with_power(int q) const {
        MapSpec m = *this;
        m.power = q;
        return m;
    }
    MapSpec with_kind(MapKind k) const {
        MapSpec m = *this;
        m.kind = k;
        return m;
    }
    MapSpec with_params(const Params& p) const {
        MapSpec m = *this;
        m.params = p;
        return m;
    }
};

namespace detail {

inline TorusPoint2 apply_once(MapKind k, const TorusPoint2& pt, const Params& p, const IntegratorSettings& s) {
    switch (k) {
        case MapKind::T: return advance(pt, 0.0, kTwoPi, p, s);
        case MapKind::Tstar: return sigma(advance(pt, 0.0, kPi, p, s));
        case MapKind::Tinverse: return advance(pt, kTwoPi, 0.0, p, s);
        case MapKind::TstarInverse: return advance(sigma(pt), kPi, 0.0, p, s);
    }
    return pt;
}

inline FlowResult apply_once_full(MapKind k, const TorusPoint2& pt, const Params& p, const IntegratorSettings& s) {
    switch (k) {
        case MapKind::T: return advance_full(pt, 0.0, kTwoPi, p, s);
        case MapKind::Tstar: {
            auto r = advance_full(pt, 0.0, kPi, p, s);
            return {sigma(r.point), kDiffSigma * r.jacobian, r.divergence_integral};
        }
        case MapKind::Tinverse: return advance_full(pt, kTwoPi, 0.0, p, s);
        case MapKind::TstarInverse: {
            auto r = advance_full(sigma(pt), kPi, 0.0, p, s);
            return {r.point, r.jacobian * kDiffSigma, r.divergence_integral};
        }
    }
    return {pt, Jacobian2::identity(), 0.0};
}

}  // namespace detail

/// q-th iterate of the selected map, renormalized after every factor.
inline TorusPoint2 apply(const MapSpec& m, TorusPoint2 pt) {
    m.validate();
    for (int i = 0; i < m.power; ++i) pt = detail::apply_once(m.kind, pt, m.params, m.settings);
    return pt;
}

/// Iterate with the chain-rule derivative (and accumulated log-det).
inline FlowResult apply_full(const MapSpec& m, TorusPoint2 pt) {
    m.validate();
    FlowResult acc{pt.normalized(), Jacobian2::identity(), 0.0};
    for (int i = 0; i < m.power; ++i) {
        auto r = detail::apply_once_full(m.kind, acc.point, m.params, m.settings);
        acc.point = r.point;
        acc.jacobian = r.jacobian * acc.jacobian;
        acc.divergence_integral += r.divergence_integral;
    }
    return acc;
}

inline std::pair<TorusPoint2, Jacobian2> apply_with_derivative(const MapSpec& m, const TorusPoint2& pt) {
    auto r = apply_full(m, pt);
    return {r.point, r.jacobian};
}

/// Whole orbit pt, T(pt), ..., T^{q-1}(pt) under a single-step map.
inline std::vector<TorusPoint2> orbit_points(MapKind k, const TorusPoint2& pt, int q, const Params& p,
                                             const IntegratorSettings& s) {
    std::vector<TorusPoint2> out;
    out.reserve(static_cast<std::size_t>(q));
    TorusPoint2 x = pt.normalized();
    for (int i = 0; i < q; ++i) {
        out.push_back(x);
        x = detail::apply_once(k, x, p, s);
    }
    return out;
}

struct IdentityReport {
    double tstar_squared_vs_T = 0.0;       // T*(T*(x)) vs T(x)
    double reversibility_T = 0.0;          // R T R (x) vs T^{-1}(x)
    double reversibility_Tstar = 0.0;      // R T* R (x) vs T*^{-1}(x)
    double half_period_conjugacy = 0.0;    // T_{pi->2pi}(x) vs sigma T_{0->pi} sigma (x)
    double s_equivariance = 0.0;           // S T (x) vs T S (x)
    double line_invariance = 0.0;          // T keeps xi in {0, pi}; T* swaps the two lines
    double inverse_roundtrip = 0.0;        // T^{-1}(T(x)) vs x
    double max_det_Tstar = -1e300;         // must stay < 0
    double min_det_T = 1e300;              // must stay > 0
    int samples = 0;

    double max_deviation() const noexcept {
        return std::max({tstar_squared_vs_T, reversibility_T, reversibility_Tstar, half_period_conjugacy,
                         s_equivariance, line_invariance});
    }
};

/// Structural identities of the maps, measured at uniformly random points.
inline IdentityReport verify_identities(const Params& p, int sample_count, const IntegratorSettings& s = {},
                                        std::uint64_t seed = 1) {
    s.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    IdentityReport rep;
    rep.samples = sample_count;
    const MapSpec T{MapKind::T, 1, p, s};
    const MapSpec Ts{MapKind::Tstar, 1, p, s};
    const MapSpec Ti{MapKind::Tinverse, 1, p, s};
    const MapSpec Tsi{MapKind::TstarInverse, 1, p, s};
    for (int i = 0; i < sample_count; ++i) {
        const TorusPoint2 x{angle(rng), angle(rng)};
        const auto [tx, dT] = apply_with_derivative(T, x);
        const auto [tsx, dTs] = apply_with_derivative(Ts, x);
        rep.tstar_squared_vs_T = std::max(rep.tstar_squared_vs_T, torus_distance(apply(Ts, tsx), tx));
        rep.reversibility_T =
            std::max(rep.reversibility_T, torus_distance(involution_R(apply(T, involution_R(x))), apply(Ti, x)));
        rep.reversibility_Tstar = std::max(
            rep.reversibility_Tstar, torus_distance(involution_R(apply(Ts, involution_R(x))), apply(Tsi, x)));
        rep.half_period_conjugacy =
            std::max(rep.half_period_conjugacy,
                     torus_distance(advance(x, kPi, kTwoPi, p, s), sigma(advance(sigma(x), 0.0, kPi, p, s))));
        rep.s_equivariance =
            std::max(rep.s_equivariance, torus_distance(symmetry_S(tx), apply(T, symmetry_S(x))));
        rep.inverse_roundtrip = std::max(rep.inverse_roundtrip, torus_distance(apply(Ti, tx), x));

        const TorusPoint2 on0{0.0, x.eta}, onpi{kPi, x.eta};
        const double dev = std::max({std::abs(wrap_signed(apply(T, on0).xi)),
                                     std::abs(wrap_signed(apply(T, onpi).xi - kPi)),
                                     std::abs(wrap_signed(apply(Ts, on0).xi - kPi)),
                                     std::abs(wrap_signed(apply(Ts, onpi).xi))});
        rep.line_invariance = std::max(rep.line_invariance, dev);
        rep.max_det_Tstar = std::max(rep.max_det_Tstar, dTs.det());
        rep.min_det_T = std::min(rep.min_det_T, dT.det());
    }
    return rep;
}

}  // namespace revmix
