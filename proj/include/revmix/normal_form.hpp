#pragma once

// Quadratic normal form at a degenerate R-symmetric point of an
// orientation-reversing reversible map with multipliers (-1, +1), the
// resulting bifurcation class, and the equilibria of the flow normal form
//   x' = alpha x y,  y' = nu + x^2 +- y^2.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "orbit_finder.hpp"
#include "poincare.hpp"

namespace revmix {

/// The local map f whose degenerate fixed point is studied: T*^q when the
/// T-orbit is an odd-period orbit of T*, otherwise S o T^q at an S-symmetric
/// point (the orientation-preserving S-symmetric case).
enum class LocalMapKind { tstar_power, s_times_t_power };

inline const char* to_string(LocalMapKind k) noexcept {
    return k == LocalMapKind::tstar_power ? "Tstar^q" : "S*T^q";
}

struct LocalMap {
    LocalMapKind kind = LocalMapKind::tstar_power;
    int q = 1;
    Params params{};
    IntegratorSettings settings{};

    TorusPoint2 operator()(const TorusPoint2& x) const {
        if (kind == LocalMapKind::tstar_power) return apply(MapSpec{MapKind::Tstar, q, params, settings}, x);
        return symmetry_S(apply(MapSpec{MapKind::T, q, params, settings}, x));
    }
    Jacobian2 derivative(const TorusPoint2& x) const {
        if (kind == LocalMapKind::tstar_power) return apply_full(MapSpec{MapKind::Tstar, q, params, settings}, x).jacobian;
        return kDiffS * apply_full(MapSpec{MapKind::T, q, params, settings}, x).jacobian;
    }
};

/// Affine chart centred at a point of Fix R: x along Fix R, y across it, so
/// that R acts as (x, y) -> (x, -y).
struct BochnerFrame {
    TorusPoint2 origin;
    LocalMap map;
    Jacobian2 linear;  // derivative of f in the chart
    std::complex<double> lambda_minus, lambda_plus;
    double fixed_residual = 0.0;

    std::array<double, 2> to_chart(const TorusPoint2& p) const { return torus_delta(origin, p); }
    TorusPoint2 from_chart(double x, double y) const { return TorusPoint2::normalized(origin.xi + x, origin.eta + y); }
};

struct FrameOptions {
    double fixed_tol = 1e-8;
    double multiplier_tol = 1e-3;
};

/// Degenerate point and parameter: solves f(xi, eta0) = (xi, eta0) for
/// (xi, epsilon) by Newton with difference quotients. At a (-1, +1) point the
/// xi-derivative moves the x-residual and epsilon moves the y-residual, so
/// the 2x2 system is regular.
struct DegeneratePoint {
    TorusPoint2 point;
    double epsilon = 0.0;
    double residual = 0.0;
};

inline DegeneratePoint polish_degenerate(const LocalMap& f, double xi, double eta0, double eps, int max_iter = 20) {
    auto res = [&](double x, double e) {
        LocalMap g = f;
        g.params = Params(e);
        const auto d = torus_delta({x, eta0}, g({x, eta0}));
        return d;
    };
    DegeneratePoint out{TorusPoint2::normalized(xi, eta0), eps, 0.0};
    for (int it = 0; it < max_iter; ++it) {
        const auto r = res(xi, eps);
        out.residual = std::hypot(r[0], r[1]);
        if (out.residual < 1e-13) break;
        const double hx = 1e-6, he = 1e-7;
        const auto rx1 = res(xi + hx, eps), rx0 = res(xi - hx, eps);
        const auto re1 = res(xi, eps + he), re0 = res(xi, eps - he);
        const Jacobian2 j{(rx1[0] - rx0[0]) / (2 * hx), (re1[0] - re0[0]) / (2 * he), (rx1[1] - rx0[1]) / (2 * hx),
                          (re1[1] - re0[1]) / (2 * he)};
        if (std::abs(j.det()) < 1e-14) throw SingularJacobianError("polish_degenerate: singular system");
        const auto step = j.inverse().apply(r[0], r[1]);
        if (std::abs(step[0]) > 0.05 || std::abs(step[1]) > 0.01) throw NumericalError("polish_degenerate: step too large");
        xi -= step[0];
        eps -= step[1];
        out = {TorusPoint2::normalized(xi, eta0), eps, out.residual};
    }
    const auto r = res(xi, eps);
    out.residual = std::hypot(r[0], r[1]);
    return out;
}

/// Local map for a degenerate point of period q: T*^q if it fixes the point,
/// else S o T^q if the point is S-symmetric.
inline LocalMap select_local_map(const TorusPoint2& pt, int q, const Params& p, const IntegratorSettings& s = {},
                                 double tol = 1e-5) {
    LocalMap a{LocalMapKind::tstar_power, q, p, s};
    if (torus_distance(a(pt), pt) < tol) return a;
    if (distance_to_s_lines(pt) < 1e-6) {
        LocalMap b{LocalMapKind::s_times_t_power, q, p, s};
        if (torus_distance(b(pt), pt) < tol) return b;
    }
    throw ConfigError("select_local_map: point is fixed neither by T*^q nor by S o T^q");
}

inline BochnerFrame bochner_frame(const LocalMap& f, const TorusPoint2& pt, const FrameOptions& o = {}) {
    if (distance_to_fix_r(pt) > 1e-12) throw ConfigError("bochner_frame: point is not on Fix R");
    BochnerFrame fr;
    fr.origin = TorusPoint2::normalized(pt.xi, std::abs(wrap_signed(pt.eta)) < 1.0 ? 0.0 : kPi);
    fr.map = f;
    fr.fixed_residual = torus_distance(f(fr.origin), fr.origin);
    if (fr.fixed_residual > o.fixed_tol) {
        throw ConfigError("bochner_frame: point is not fixed (residual " + std::to_string(fr.fixed_residual) + ")");
    }
    fr.linear = f.derivative(fr.origin);
    auto [l1, l2] = fr.linear.eigenvalues();
    if (l1.real() > l2.real()) std::swap(l1, l2);
    if (std::abs(l1 + 1.0) > o.multiplier_tol || std::abs(l2 - 1.0) > o.multiplier_tol) {
        throw ConfigError("bochner_frame: multipliers are not (-1, +1)");
    }
    fr.lambda_minus = l1;
    fr.lambda_plus = l2;
    const auto v = fr.linear.eigenvector(l2.real());
    if (std::abs(v[0]) > std::abs(v[1])) {
        throw AlignmentError("bochner_frame: the +1 eigenvector lies along Fix R");
    }
    return fr;
}

struct NormalFormCoeffs {
    double A20 = 0, A11 = 0, A02 = 0, B20 = 0, B11 = 0, B02 = 0;
    double alpha = 0.0;
    int sign_case = 0;      // +1 or -1 once reduced
    double nu = 0.0;
    bool inverted = false;  // the inverse map was used to fold the sign pair
    bool reduced = false;
    double a = 0.0, b = 0.0, c = 0.0;  // quadratic change x + a x^2 + b y^2, y + c x y
};

/// Map in chart coordinates.
using ChartMap = std::function<std::array<double, 2>(double, double)>;

inline ChartMap chart_map(const BochnerFrame& fr) {
    return [fr](double x, double y) { return fr.to_chart(fr.map(fr.from_chart(x, y))); };
}

namespace detail {

/// Second partials (xx, xy, yy) of both components by central differences.
inline std::array<double, 6> second_partials(const ChartMap& F, double h) {
    const auto f0 = F(0.0, 0.0);
    const auto px = F(h, 0.0), mx = F(-h, 0.0), py = F(0.0, h), my = F(0.0, -h);
    const auto pp = F(h, h), pm = F(h, -h), mp = F(-h, h), mm = F(-h, -h);
    std::array<double, 6> d{};
    for (int k = 0; k < 2; ++k) {
        d[3 * k + 0] = (px[k] - 2.0 * f0[k] + mx[k]) / (h * h);
        d[3 * k + 1] = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
        d[3 * k + 2] = (py[k] - 2.0 * f0[k] + my[k]) / (h * h);
    }
    return d;
}

}  // namespace detail

/// Quadratic Taylor coefficients of F at the origin; Richardson on (h, h/2).
inline NormalFormCoeffs taylor_extract(const ChartMap& F, double h = 2e-3, double rel_tol = 1e-4) {
    if (!(h > 0.0)) throw ConfigError("taylor_extract: step must be positive");
    const auto d1 = detail::second_partials(F, h);
    const auto d2 = detail::second_partials(F, 0.5 * h);
    std::array<double, 6> d{};
    double scale = 0.0;
    for (int i = 0; i < 6; ++i) scale = std::max(scale, std::abs(d2[i]));
    for (int i = 0; i < 6; ++i) {
        d[i] = (4.0 * d2[i] - d1[i]) / 3.0;
        if (std::abs(d1[i] - d2[i]) > rel_tol * std::max(scale, 1e-12)) {
            throw ExtrapolationError("taylor_extract: estimates at h and h/2 disagree");
        }
    }
    NormalFormCoeffs c;
    c.A20 = 0.5 * d[0];
    c.A11 = d[1];
    c.A02 = 0.5 * d[2];
    c.B20 = 0.5 * d[3];
    c.B11 = d[4];
    c.B02 = 0.5 * d[5];
    return c;
}

inline NormalFormCoeffs taylor_extract(const BochnerFrame& fr, double h = 2e-3, double rel_tol = 1e-4) {
    return taylor_extract(chart_map(fr), h, rel_tol);
}

/// Quadratic change and scaling to the normal form; sign pairs with a
/// negative x^2 coefficient are folded through the inverse map, which
/// negates both signs and alpha.
inline NormalFormCoeffs reduce(const NormalFormCoeffs& in, double tol_g = 1e-6) {
    if (std::abs(in.A11) <= tol_g || std::abs(in.B20) <= tol_g || std::abs(in.B02) <= tol_g) {
        throw GenericityError("reduce: A11, B20 and B02 must be nonzero");
    }
    NormalFormCoeffs c = in;
    c.a = in.A20 / 2.0;
    c.b = in.A02 / 2.0;
    c.c = -in.B11 / 2.0;
    double alpha = -in.A11 / std::abs(in.B02);
    int s20 = in.B20 > 0.0 ? 1 : -1, s02 = in.B02 > 0.0 ? 1 : -1;
    c.inverted = in.inverted;
    if (s20 < 0) {
        s20 = -s20;
        s02 = -s02;
        alpha = -alpha;
        c.inverted = !in.inverted;
    }
    c.alpha = alpha;
    c.sign_case = s02;
    c.A20 = c.A02 = c.B11 = 0.0;
    c.A11 = -alpha;
    c.B20 = 1.0;
    c.B02 = static_cast<double>(s02);
    c.reduced = true;
    return c;
}

/// Counts of periodic points of the q-th power near the degenerate point.
struct Inventory {
    int saddles = 0, elliptic = 0, sinks = 0, sources = 0, other = 0;
    int r_symmetric = 0;

    int total() const noexcept { return saddles + elliptic + sinks + sources + other; }
    bool operator==(const Inventory&) const = default;
    Inventory operator-(const Inventory& o) const {
        return {saddles - o.saddles, elliptic - o.elliptic, sinks - o.sinks,
                sources - o.sources, other - o.other, r_symmetric - o.r_symmetric};
    }
};

inline std::string to_string(const Inventory& v) {
    return std::to_string(v.saddles) + " saddle, " + std::to_string(v.elliptic) + " elliptic, " +
           std::to_string(v.sinks) + " sink, " + std::to_string(v.sources) + " source, " +
           std::to_string(v.other) + " other (" + std::to_string(v.r_symmetric) + " R-symmetric)";
}

enum class BifLabel { plus_elliptic_saddles, plus_saddle_sink_source, minus_saddle, minus_elliptic };

inline const char* to_string(BifLabel l) noexcept {
    switch (l) {
        case BifLabel::plus_elliptic_saddles: return "0->4 elliptic + saddle pair";
        case BifLabel::plus_saddle_sink_source: return "0->4 saddle + sink/source";
        case BifLabel::minus_saddle: return "2->2 saddle variant";
        case BifLabel::minus_elliptic: return "2->2 elliptic variant";
    }
    return "?";
}

/// Predicted points of T^q near the degenerate point on each side (after =
/// nu > 0 for the "+" case read with the orientation in which points exist).
struct BifClass {
    BifLabel label = BifLabel::plus_elliptic_saddles;
    Inventory before, after;
};

inline BifClass classify_bifurcation(const NormalFormCoeffs& c) {
    if (!c.reduced) throw ConfigError("classify_bifurcation: coefficients are not reduced");
    BifClass b;
    if (c.sign_case > 0) {
        if (c.alpha < 0.0) {
            b.label = BifLabel::plus_elliptic_saddles;
            b.after = {2, 2, 0, 0, 0, 2};
        } else {
            b.label = BifLabel::plus_saddle_sink_source;
            b.after = {2, 0, 1, 1, 0, 2};
        }
    } else {
        if (c.alpha > 0.0) {
            b.label = BifLabel::minus_saddle;
            b.after = {2, 0, 0, 0, 0, 0};
            b.before = {0, 2, 0, 0, 0, 2};
        } else {
            b.label = BifLabel::minus_elliptic;
            b.after = {0, 0, 1, 1, 0, 0};
            b.before = {2, 0, 0, 0, 0, 2};
        }
    }
    return b;
}

enum class EquilibriumType { saddle, center, sink, source, degenerate };

inline const char* to_string(EquilibriumType t) noexcept {
    switch (t) {
        case EquilibriumType::saddle: return "saddle";
        case EquilibriumType::center: return "center";
        case EquilibriumType::sink: return "sink";
        case EquilibriumType::source: return "source";
        case EquilibriumType::degenerate: return "degenerate";
    }
    return "?";
}

struct PotokEquilibrium {
    double x = 0.0, y = 0.0;
    EquilibriumType type = EquilibriumType::degenerate;
    bool r_symmetric = false;  // on y = 0
    bool s_pair = false;       // on x = 0, off the origin
};

/// Equilibria of x' = alpha x y, y' = nu + x^2 + sign y^2 with linear types.
/// The equations are solved as written; no orientation of nu is assumed.
inline std::vector<PotokEquilibrium> potok_equilibria(double nu, double alpha, int sign_case) {
    if (alpha == 0.0) throw ConfigError("potok_equilibria: alpha must be nonzero");
    if (sign_case != 1 && sign_case != -1) throw ConfigError("potok_equilibria: sign must be +1 or -1");
    const double s = static_cast<double>(sign_case);
    std::vector<std::pair<double, double>> pts;
    if (nu == 0.0) {
        pts.emplace_back(0.0, 0.0);
    } else {
        if (-s * nu > 0.0) {
            const double y = std::sqrt(-s * nu);
            pts.emplace_back(0.0, y);
            pts.emplace_back(0.0, -y);
        }
        if (-nu > 0.0) {
            const double x = std::sqrt(-nu);
            pts.emplace_back(x, 0.0);
            pts.emplace_back(-x, 0.0);
        }
    }
    std::vector<PotokEquilibrium> out;
    for (auto [x, y] : pts) {
        const Jacobian2 j{alpha * y, alpha * x, 2.0 * x, 2.0 * s * y};
        PotokEquilibrium e{x, y, EquilibriumType::degenerate, y == 0.0, x == 0.0 && y != 0.0};
        const double det = j.det(), tr = j.trace();
        if (det < 0.0) {
            e.type = EquilibriumType::saddle;
        } else if (det > 0.0) {
            e.type = tr == 0.0 ? EquilibriumType::center : (tr < 0.0 ? EquilibriumType::sink : EquilibriumType::source);
        }
        out.push_back(e);
    }
    return out;
}

/// Points of minimal period q of T within `radius` of `center`, Newton-seeded
/// on a (2 seeds + 1)^2 grid plus a finer row along the line through center.
inline std::vector<OrbitRecord> local_orbits(const TorusPoint2& center, double radius, int q, const Params& p,
                                             const IntegratorSettings& s = {}, int seeds = 8) {
    std::vector<OrbitRecord> out;
    ClassifyOptions co;
    co.settings = s;
    std::vector<TorusPoint2> guesses;
    for (int i = -seeds; i <= seeds; ++i) {
        for (int j = -seeds; j <= seeds; ++j) {
            guesses.push_back({center.xi + radius * i / seeds, center.eta + radius * j / seeds});
        }
    }
    for (int i = -4 * seeds; i <= 4 * seeds; ++i) guesses.push_back({center.xi + radius * i / (4 * seeds), center.eta});
    for (const auto& g : guesses) {
        try {
            const TorusPoint2 x = refine(MapSpec{MapKind::T, q, p, s}, g);
            if (torus_distance(x, center) > radius) continue;
            if (minimal_period(x, q, p, s, 1e-7) != q) continue;
            if (std::any_of(out.begin(), out.end(),
                            [&](const OrbitRecord& y) { return torus_distance(y.point, x) < 1e-7; })) {
                continue;
            }
            out.push_back(classify_lenient(x, q, p, co));
        } catch (const NumericalError&) {
        }
    }
    return out;
}

inline Inventory inventory_of(const std::vector<OrbitRecord>& recs) {
    Inventory v;
    for (const auto& r : recs) {
        switch (r.type) {
            case OrbitType::saddle: ++v.saddles; break;
            case OrbitType::elliptic: ++v.elliptic; break;
            case OrbitType::sink: ++v.sinks; break;
            case OrbitType::source: ++v.sources; break;
            default: ++v.other; break;
        }
        if (r.r_symmetric) ++v.r_symmetric;
    }
    return v;
}

/// Points born or destroyed near `center` between eps_before and eps_after:
/// inventory after minus inventory before, so orbits that merely pass
/// through the neighbourhood cancel.
inline Inventory inventory_change(const TorusPoint2& center, double radius, int q, double eps_before, double eps_after,
                                  const IntegratorSettings& s = {}) {
    return inventory_of(local_orbits(center, radius, q, Params(eps_after), s)) -
           inventory_of(local_orbits(center, radius, q, Params(eps_before), s));
}

/// Normal form at a tangency found by orbit_finder: polish the point on Fix R,
/// pick the local map, extract and reduce.
struct DegenerateAnalysis {
    DegeneratePoint degenerate;
    BochnerFrame frame;
    NormalFormCoeffs raw, reduced;
    BifClass prediction;
};

inline DegenerateAnalysis analyse_tangency(const Tangency& t, int q, const IntegratorSettings& s = {},
                                           const FrameOptions& fo = {}, double h = 2e-3) {
    TorusPoint2 guess = t.point();
    if (distance_to_s_lines(guess) < 1e-6) guess.xi = std::round(guess.xi / kPi) * kPi;
    guess = guess.normalized();
    LocalMap f = select_local_map(guess, q, Params(t.epsilon), s);
    const DegeneratePoint d = polish_degenerate(f, guess.xi, line_eta(t.line), t.epsilon);
    f.params = Params(d.epsilon);
    DegenerateAnalysis a;
    a.degenerate = d;
    a.frame = bochner_frame(f, d.point, fo);
    a.raw = taylor_extract(a.frame, h);
    a.reduced = reduce(a.raw);
    a.prediction = classify_bifurcation(a.reduced);
    return a;
}

}  // namespace revmix
