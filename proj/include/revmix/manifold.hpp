#pragma once

// One-dimensional stable/unstable manifolds of saddle periodic points of T,
// their crossings, and parameter scans for the first heteroclinic tangency.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"
#include "orbit_finder.hpp"
#include "poincare.hpp"

namespace revmix {

enum class Stability { stable, unstable };

inline const char* to_string(Stability s) noexcept { return s == Stability::stable ? "stable" : "unstable"; }

struct GrowOptions {
    double h_max = 1e-3;
    double theta_max = 0.2;
    double budget = 50.0;
    double seed_distance = 1e-6;
    IntegratorSettings settings{};
    std::size_t max_points = 4'000'000;
    int max_levels = 400;
};

/// One branch of W^s or W^u of a saddle. Generic branches are polylines whose
/// vertices carry a parameter tau = n + s: the vertex is F^n applied to the
/// seed at fractional position s of the fundamental segment (F = T^q, or
/// T^{-q} for stable branches, squared if the multiplier is negative).
/// Branches lying on an invariant line xi = 0 or pi are stored exactly as
/// straight segments (on_symmetry_line).
struct Separatrix {
    OrbitRecord owner;
    int owner_id = -1;
    Stability stability = Stability::unstable;
    int side = 1;
    std::vector<TorusPoint2> points;
    std::vector<double> tau;
    double arclength = 0.0;
    bool on_symmetry_line = false;

    // seed data
    double epsilon = 0.0;
    IntegratorSettings settings{};
    int map_power = 1;  // number of T (or T^{-1}) factors in F
    std::array<double, 2> direction{1.0, 0.0};
    double seed_distance = 1e-6;
    double log_growth = 0.0;  // log |multiplier of F|

    /// Vertices with tau below this carry exact labels (levels 0 and 1 are
    /// mapped from exact seeds; later insertions are interpolated).
    static constexpr double exact_tau_limit = 2.0;
    bool exact_label(double t) const noexcept { return on_symmetry_line || t < exact_tau_limit; }
};

struct HetCrossing {
    TorusPoint2 location;
    double angle = 0.0;  // in [0, pi/2]
    int from_id = -1, to_id = -1;
    std::size_t a_segment = 0, b_segment = 0;
};

namespace detail {

inline void map_batch(std::vector<TorusPoint2>& pts, int power, bool inverse, const Params& p,
                      const IntegratorSettings& s) {
    const double t0 = inverse ? kTwoPi : 0.0, t1 = inverse ? 0.0 : kTwoPi;
    for (int i = 0; i < power; ++i) advance_batch(pts, t0, t1, p, s);
}

inline TorusPoint2 seed_point(const Separatrix& sep, double s) {
    const double r = sep.seed_distance * std::exp(s * sep.log_growth) * static_cast<double>(sep.side);
    return TorusPoint2::normalized(sep.owner.point.xi + r * sep.direction[0],
                                   sep.owner.point.eta + r * sep.direction[1]);
}

inline double turning_angle(const std::array<double, 2>& u, const std::array<double, 2>& v) {
    const double cr = u[0] * v[1] - u[1] * v[0];
    const double dt = u[0] * v[0] + u[1] * v[1];
    return std::abs(std::atan2(cr, dt));
}

/// Quadratic interpolation of a polyline parameterized by tau.
inline TorusPoint2 interpolate(std::span<const double> tau, std::span<const TorusPoint2> pts, double t) {
    const std::size_t n = tau.size();
    if (n == 1) return pts[0];
    std::size_t k = static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), t) - tau.begin());
    k = std::clamp<std::size_t>(k, 1, n - 1) - 1;  // tau[k] <= t < tau[k+1]
    if (n == 2) {
        const auto d = torus_delta(pts[0], pts[1]);
        const double w = (t - tau[0]) / (tau[1] - tau[0]);
        return TorusPoint2::normalized(pts[0].xi + w * d[0], pts[0].eta + w * d[1]);
    }
    const std::size_t i0 = (k + 2 < n) ? k : n - 3;
    const double t0 = tau[i0], t1 = tau[i0 + 1], t2 = tau[i0 + 2];
    const auto d1 = torus_delta(pts[i0], pts[i0 + 1]);
    const auto d2 = torus_delta(pts[i0], pts[i0 + 2]);
    const double l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    const double l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    const double l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    (void)l0;
    return TorusPoint2::normalized(pts[i0].xi + l1 * d1[0] + l2 * d2[0], pts[i0].eta + l1 * d1[1] + l2 * d2[1]);
}

inline double polyline_length(std::span<const TorusPoint2> pts) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += torus_distance(pts[i], pts[i + 1]);
    return len;
}

inline Separatrix grow_on_line(Separatrix sep, const Params& p, const GrowOptions& o) {
    // the branch is a piece of the invariant circle xi = const; it ends at the
    // next fixed point of F restricted to that circle
    sep.on_symmetry_line = true;
    const double x0 = sep.owner.point.xi;
    const double e0 = sep.owner.point.eta;
    const double dir = static_cast<double>(sep.side) * (sep.direction[1] >= 0.0 ? 1.0 : -1.0);
    const MapSpec f{sep.stability == Stability::unstable ? MapKind::T : MapKind::Tinverse, sep.map_power, p,
                    o.settings};
    auto g = [&](double d) {
        const double eta = e0 + dir * d;
        return wrap_signed(apply(f, {x0, eta}).eta - wrap_angle(eta));
    };
    const double limit = std::min(o.budget, kTwoPi);
    double end = limit;
    const double h = 0.01;
    double a = 1e-6, ga = g(a);
    for (double b = h; b <= limit + 1e-12; b += h) {
        const double gb = g(b);
        if ((ga > 0.0) != (gb > 0.0) && std::abs(ga) + std::abs(gb) < kPi) {
            end = bisect_root(g, a, b, ga, 1e-12);
            break;
        }
        a = b;
        ga = gb;
    }
    const std::size_t n = static_cast<std::size_t>(std::ceil(end / o.h_max)) + 1;
    sep.points.clear();
    sep.tau.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = end * static_cast<double>(i) / static_cast<double>(n - 1);
        sep.points.push_back(TorusPoint2::normalized(x0, e0 + dir * d));
        sep.tau.push_back(d);
    }
    sep.arclength = end;
    return sep;
}

}  // namespace detail

/// Point of a generic separatrix at parameter tau, evaluated from the seed.
/// Only consistent with the stored vertices where exact_label(tau) holds.
inline TorusPoint2 separatrix_point(const Separatrix& sep, double tau) {
    if (sep.on_symmetry_line) {
        const double dir = static_cast<double>(sep.side) * (sep.direction[1] >= 0.0 ? 1.0 : -1.0);
        return TorusPoint2::normalized(sep.owner.point.xi, sep.owner.point.eta + dir * tau);
    }
    const double lev = std::floor(tau);
    TorusPoint2 x = detail::seed_point(sep, tau - lev);
    const Params p(sep.epsilon);
    const MapSpec f{sep.stability == Stability::unstable ? MapKind::T : MapKind::Tinverse,
                    sep.map_power * static_cast<int>(lev), p, sep.settings};
    if (lev >= 1.0) x = apply(f, x);
    return x;
}

/// Grow one branch of the stable or unstable manifold of a saddle.
inline Separatrix grow(const OrbitRecord& owner, Stability stab, int side, const Params& p,
                       const GrowOptions& o = {}) {
    if (owner.type != OrbitType::saddle) throw ConfigError("grow: owner is not a saddle");
    if (side != 1 && side != -1) throw ConfigError("grow: side must be +1 or -1");
    o.settings.validate();

    const auto d = apply_full(MapSpec{MapKind::T, owner.q, p, o.settings}, owner.point);
    const auto [l1, l2] = d.jacobian.eigenvalues();
    if (l1.imag() != 0.0) throw ConfigError("grow: complex multipliers");
    const double lu = std::abs(l1.real()) >= std::abs(l2.real()) ? l1.real() : l2.real();
    const double ls = std::abs(l1.real()) >= std::abs(l2.real()) ? l2.real() : l1.real();
    const double lam = stab == Stability::unstable ? lu : ls;
    auto v = d.jacobian.eigenvector(lam);
    const double vn = std::hypot(v[0], v[1]);

    Separatrix sep;
    sep.owner = owner;
    sep.stability = stab;
    sep.side = side;
    sep.epsilon = p.epsilon();
    sep.settings = o.settings;
    sep.direction = {v[0] / vn, v[1] / vn};
    sep.seed_distance = o.seed_distance;
    const double mult = stab == Stability::unstable ? lu : 1.0 / ls;
    sep.map_power = owner.q * (mult < 0.0 ? 2 : 1);
    sep.log_growth = std::log(std::abs(mult)) * (mult < 0.0 ? 2.0 : 1.0);
    if (!(sep.log_growth > 1e-6)) {
        throw NumericalError("grow: saddle is too close to parabolic to seed a fundamental segment");
    }

    if (distance_to_s_lines(owner.point) < 1e-9 && std::abs(sep.direction[0]) < 1e-8) {
        return detail::grow_on_line(std::move(sep), p, o);
    }

    const bool inverse = stab == Stability::stable;
    // level 0: the fundamental segment, exact
    std::vector<double> ptau;
    std::vector<TorusPoint2> ppts;
    for (int i = 0; i <= 16; ++i) {
        const double s = static_cast<double>(i) / 16.0;
        ptau.push_back(s);
        ppts.push_back(detail::seed_point(sep, s));
    }
    sep.tau = ptau;
    sep.points = ppts;
    sep.arclength = detail::polyline_length(ppts);

    for (int level = 1; level <= o.max_levels && sep.arclength < o.budget; ++level) {
        std::vector<double> ntau(ptau.size());
        std::vector<TorusPoint2> npts = ppts;
        for (std::size_t i = 0; i < ptau.size(); ++i) ntau[i] = ptau[i] + 1.0;
        detail::map_batch(npts, sep.map_power, inverse, p, o.settings);

        for (int pass = 0; pass < 60; ++pass) {
            std::vector<char> mark(ntau.size(), 0);
            bool any = false;
            for (std::size_t i = 0; i + 1 < ntau.size(); ++i) {
                if (ntau[i + 1] - ntau[i] < 1e-13) continue;
                if (torus_distance(npts[i], npts[i + 1]) > o.h_max) {
                    mark[i] = 1;
                    any = true;
                }
            }
            for (std::size_t i = 1; i + 1 < ntau.size(); ++i) {
                const auto u = torus_delta(npts[i - 1], npts[i]);
                const auto w = torus_delta(npts[i], npts[i + 1]);
                if (std::hypot(u[0], u[1]) < 1e-7 || std::hypot(w[0], w[1]) < 1e-7) continue;
                if (detail::turning_angle(u, w) > o.theta_max) {
                    if (ntau[i] - ntau[i - 1] >= 1e-13) mark[i - 1] = 1;
                    if (ntau[i + 1] - ntau[i] >= 1e-13) mark[i] = 1;
                    any = true;
                }
            }
            if (!any) break;
            std::vector<double> mtau;
            std::vector<TorusPoint2> mpts;
            for (std::size_t i = 0; i + 1 < ntau.size(); ++i) {
                if (!mark[i]) continue;
                const double tm = 0.5 * (ntau[i] + ntau[i + 1]);
                mtau.push_back(tm);
                mpts.push_back(level == 1 ? detail::seed_point(sep, tm - 1.0)
                                          : detail::interpolate(ptau, ppts, tm - 1.0));
            }
            if (mtau.empty()) break;
            detail::map_batch(mpts, sep.map_power, inverse, p, o.settings);
            std::vector<double> mt;
            std::vector<TorusPoint2> mp;
            mt.reserve(ntau.size() + mtau.size());
            mp.reserve(ntau.size() + mtau.size());
            std::size_t k = 0;
            for (std::size_t i = 0; i < ntau.size(); ++i) {
                mt.push_back(ntau[i]);
                mp.push_back(npts[i]);
                if (i + 1 < ntau.size() && mark[i]) {
                    mt.push_back(mtau[k]);
                    mp.push_back(mpts[k]);
                    ++k;
                }
            }
            ntau = std::move(mt);
            npts = std::move(mp);
            if (sep.points.size() + npts.size() > o.max_points) break;
        }

        // drop vertices that crowd together where the branch contracts (near a
        // sink of F); chords stay below h_max / 2 and turns below theta_max / 2
        {
            std::vector<double> kt{ntau.front()};
            std::vector<TorusPoint2> kp{npts.front()};
            for (std::size_t i = 1; i + 1 < npts.size(); ++i) {
                const auto u = torus_delta(kp.back(), npts[i]);
                const auto w = torus_delta(npts[i], npts[i + 1]);
                const bool near = torus_distance(kp.back(), npts[i + 1]) < 0.5 * o.h_max;
                const bool straight = std::hypot(u[0], u[1]) < 1e-12 || std::hypot(w[0], w[1]) < 1e-12 ||
                                      detail::turning_angle(u, w) < 0.5 * o.theta_max;
                if (near && straight) continue;
                kt.push_back(ntau[i]);
                kp.push_back(npts[i]);
            }
            kt.push_back(ntau.back());
            kp.push_back(npts.back());
            ntau = std::move(kt);
            npts = std::move(kp);
        }

        const double plen = detail::polyline_length(npts);
        // the first vertex of this level duplicates the last of the previous one
        std::size_t start = 1;
        double acc = sep.arclength;
        for (std::size_t i = start; i < npts.size(); ++i) {
            const double seg = torus_distance(sep.points.back(), npts[i]);
            if (acc + seg > o.budget) {
                acc = o.budget;
                sep.points.push_back(npts[i]);
                sep.tau.push_back(ntau[i]);
                break;
            }
            acc += seg;
            sep.points.push_back(npts[i]);
            sep.tau.push_back(ntau[i]);
        }
        sep.arclength = acc;
        if (plen < 1e-10) break;  // the branch has converged onto a periodic point
        if (sep.points.size() > o.max_points) break;
        ptau = std::move(ntau);
        ppts = std::move(npts);
    }
    return sep;
}

// ---------------------------------------------------------------------------
// Crossings

struct CrossingOptions {
    /// Crossings closer than this to either owner are ignored.
    double owner_exclusion = 1e-5;
    /// Additional exclusion disks (e.g. to keep only "large" connections).
    std::vector<std::pair<TorusPoint2, double>> excluded;
    bool refine = true;
    double refine_tol = 1e-9;
    double tangency_angle = 5e-3;
    std::size_t max_crossings = 100000;
};

namespace detail {

struct SegmentIndex {
    static constexpr int kCells = 512;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;  // (cell, segment)

    static int cell_of(double x) {
        int c = static_cast<int>(std::floor(x / kTwoPi * kCells));
        return ((c % kCells) + kCells) % kCells;
    }

    template <class F>
    static void cells_of(const TorusPoint2& a, const TorusPoint2& b, F&& emit) {
        const auto d = torus_delta(a, b);
        const double x0 = std::min(a.xi, a.xi + d[0]), x1 = std::max(a.xi, a.xi + d[0]);
        const double y0 = std::min(a.eta, a.eta + d[1]), y1 = std::max(a.eta, a.eta + d[1]);
        const double cs = kTwoPi / kCells;
        const int cx0 = static_cast<int>(std::floor(x0 / cs)), cx1 = static_cast<int>(std::floor(x1 / cs));
        const int cy0 = static_cast<int>(std::floor(y0 / cs)), cy1 = static_cast<int>(std::floor(y1 / cs));
        for (int i = cx0; i <= cx1; ++i) {
            for (int j = cy0; j <= cy1; ++j) {
                const int ci = ((i % kCells) + kCells) % kCells, cj = ((j % kCells) + kCells) % kCells;
                emit(static_cast<std::uint32_t>(ci * kCells + cj));
            }
        }
    }

    explicit SegmentIndex(std::span<const TorusPoint2> pts) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            cells_of(pts[i], pts[i + 1], [&](std::uint32_t c) { entries.emplace_back(c, static_cast<std::uint32_t>(i)); });
        }
        std::sort(entries.begin(), entries.end());
    }

    template <class F>
    void query(std::uint32_t cell, F&& f) const {
        auto lo = std::lower_bound(entries.begin(), entries.end(), std::make_pair(cell, std::uint32_t{0}));
        for (; lo != entries.end() && lo->first == cell; ++lo) f(lo->second);
    }
};

/// Intersection of segments a0->a1 and b0->b1 (short, on the torus).
/// Returns the fractions (t, u) along each, if any, with t, u in [0, 1).
inline bool segment_intersection(const TorusPoint2& a0, const TorusPoint2& a1, const TorusPoint2& b0,
                                 const TorusPoint2& b1, double& t, double& u) {
    const auto r = torus_delta(a0, a1);
    const auto s = torus_delta(b0, b1);
    const auto q = torus_delta(a0, b0);
    const double den = r[0] * s[1] - r[1] * s[0];
    if (den == 0.0) return false;
    t = (q[0] * s[1] - q[1] * s[0]) / den;
    u = (q[0] * r[1] - q[1] * r[0]) / den;
    return t >= 0.0 && t < 1.0 && u >= 0.0 && u < 1.0;
}

inline double crossing_angle(const std::array<double, 2>& r, const std::array<double, 2>& s) {
    const double a = turning_angle(r, s);
    return a > 0.5 * kPi ? kPi - a : a;
}

}  // namespace detail

/// Transverse crossings (and near-tangencies) between two separatrices, and
/// coincident connections along an invariant circle xi = const.
inline std::vector<HetCrossing> crossings(const Separatrix& a, const Separatrix& b, const CrossingOptions& o = {}) {
    std::vector<HetCrossing> out;
    if (a.points.size() < 2 || b.points.size() < 2) return out;
    if (a.on_symmetry_line && b.on_symmetry_line) {
        // branches on the same invariant circle never cross transversally; they
        // coincide when each one ends at the other's owner (angle 0)
        const double tol = 1e-7;
        if (std::abs(wrap_signed(a.owner.point.xi - b.owner.point.xi)) < tol &&
            torus_distance(a.points.back(), b.owner.point) < tol && torus_distance(b.points.back(), a.owner.point) < tol) {
            const std::size_t mid = a.points.size() / 2;
            out.push_back({a.points[mid], 0.0, a.owner_id, b.owner_id, mid, 0});
        }
        return out;
    }
    const detail::SegmentIndex index(b.points);
    std::vector<std::pair<std::size_t, std::size_t>> hits;
    std::vector<std::uint32_t> cand;
    for (std::size_t i = 0; i + 1 < a.points.size(); ++i) {
        cand.clear();
        detail::SegmentIndex::cells_of(a.points[i], a.points[i + 1],
                                       [&](std::uint32_t c) { index.query(c, [&](std::uint32_t j) { cand.push_back(j); }); });
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (std::uint32_t j : cand) {
            double t, u;
            if (detail::segment_intersection(a.points[i], a.points[i + 1], b.points[j], b.points[j + 1], t, u)) {
                hits.emplace_back(i, j);
            }
        }
        if (hits.size() > o.max_crossings) break;
    }

    auto excluded = [&](const TorusPoint2& x) {
        if (torus_distance(x, a.owner.point) < o.owner_exclusion) return true;
        if (torus_distance(x, b.owner.point) < o.owner_exclusion) return true;
        for (const auto& [c, r] : o.excluded) {
            if (torus_distance(x, c) < r) return true;
        }
        return false;
    };

    for (const auto& [i, j] : hits) {
        TorusPoint2 a0 = a.points[i], a1 = a.points[i + 1], b0 = b.points[j], b1 = b.points[j + 1];
        double t = 0.0, u = 0.0;
        detail::segment_intersection(a0, a1, b0, b1, t, u);
        if (o.refine && !a.tau.empty() && !b.tau.empty()) {
            double ta0 = a.tau[i], ta1 = a.tau[i + 1], tb0 = b.tau[j], tb1 = b.tau[j + 1];
            // only refine inside one level of the parameterization
            const bool ra = a.on_symmetry_line || (std::floor(ta0) == std::floor(ta1) && a.exact_label(ta1));
            const bool rb = b.on_symmetry_line || (std::floor(tb0) == std::floor(tb1) && b.exact_label(tb1));
            for (int it = 0; it < 60; ++it) {
                const double la = torus_distance(a0, a1), lb = torus_distance(b0, b1);
                if (la < o.refine_tol && lb < o.refine_tol) break;
                bool progressed = false;
                if (ra && la >= o.refine_tol && !a.on_symmetry_line) {
                    const double tm = ta0 + t * (ta1 - ta0);
                    const TorusPoint2 am = separatrix_point(a, std::clamp(tm, ta0 + 0.05 * (ta1 - ta0), ta1 - 0.05 * (ta1 - ta0)));
                    const double tmc = std::clamp(tm, ta0 + 0.05 * (ta1 - ta0), ta1 - 0.05 * (ta1 - ta0));
                    double t1, u1;
                    if (detail::segment_intersection(a0, am, b0, b1, t1, u1)) {
                        a1 = am;
                        ta1 = tmc;
                        progressed = true;
                    } else if (detail::segment_intersection(am, a1, b0, b1, t1, u1)) {
                        a0 = am;
                        ta0 = tmc;
                        progressed = true;
                    }
                }
                if (rb && lb >= o.refine_tol && !b.on_symmetry_line) {
                    double t1, u1;
                    detail::segment_intersection(a0, a1, b0, b1, t1, u1);
                    const double um = tb0 + std::clamp(u1, 0.05, 0.95) * (tb1 - tb0);
                    const TorusPoint2 bm = separatrix_point(b, um);
                    if (detail::segment_intersection(a0, a1, b0, bm, t1, u1)) {
                        b1 = bm;
                        tb1 = um;
                        progressed = true;
                    } else if (detail::segment_intersection(a0, a1, bm, b1, t1, u1)) {
                        b0 = bm;
                        tb0 = um;
                        progressed = true;
                    }
                }
                if (!progressed || !detail::segment_intersection(a0, a1, b0, b1, t, u)) break;
                if ((a.on_symmetry_line || !ra) && (b.on_symmetry_line || !rb)) break;
            }
            detail::segment_intersection(a0, a1, b0, b1, t, u);
        }
        const auto r = torus_delta(a0, a1);
        const auto s = torus_delta(b0, b1);
        const TorusPoint2 loc = TorusPoint2::normalized(a0.xi + t * r[0], a0.eta + t * r[1]);
        if (excluded(loc)) continue;
        out.push_back({loc, detail::crossing_angle(r, s), a.owner_id, b.owner_id, i, j});
    }
    return out;
}

/// Crossings of a separatrix with the circles eta = 0 and eta = pi, away from
/// the owner. A crossing of W^u(P) with Fix R lies on an R-symmetric orbit
/// that is also in W^s(R(P)).
inline std::vector<HetCrossing> fix_r_crossings(const Separatrix& a, const CrossingOptions& o = {}) {
    std::vector<HetCrossing> out;
    for (std::size_t i = 0; i + 1 < a.points.size(); ++i) {
        const TorusPoint2 p0 = a.points[i], p1 = a.points[i + 1];
        const auto d = torus_delta(p0, p1);
        for (double line : {0.0, kPi}) {
            const double g0 = wrap_signed(p0.eta - line);
            const double g1 = g0 + d[1];
            if (std::abs(g0) > 1.0 || (g0 > 0.0) == (g1 > 0.0) || g0 == 0.0) continue;
            double w = g0 / (g0 - g1);
            TorusPoint2 loc = TorusPoint2::normalized(p0.xi + w * d[0], line);
            if (o.refine && !a.on_symmetry_line && std::floor(a.tau[i]) == std::floor(a.tau[i + 1]) &&
                a.exact_label(a.tau[i + 1])) {
                auto g = [&](double tau) { return wrap_signed(separatrix_point(a, tau).eta - line); };
                const double tr = detail::bisect_root(g, a.tau[i], a.tau[i + 1], g0, 1e-15);
                loc = separatrix_point(a, tr);
            }
            if (torus_distance(loc, a.owner.point) < o.owner_exclusion) continue;
            bool skip = false;
            for (const auto& [c, r] : o.excluded) skip = skip || torus_distance(loc, c) < r;
            if (skip) continue;
            const double ang = detail::crossing_angle(d, {1.0, 0.0});
            out.push_back({loc, ang, a.owner_id, a.owner_id, i, 0});
        }
    }
    return out;
}

/// Contracting-expanding heteroclinic cycle: W^u(P1) meets W^s(P2) and
/// W^u(P2) meets W^s(P1), with J(P1) and J(P2) on opposite sides of 1.
struct CycleCertificate {
    bool present = false;
    double j_contracting = 1.0, j_expanding = 1.0;
    double min_angle = kPi;  // smallest crossing angle within the cycle
};

inline CycleCertificate heteroclinic_cycle(const OrbitRecord& p1, const OrbitRecord& p2,
                                           const std::vector<HetCrossing>& u1_s2,
                                           const std::vector<HetCrossing>& u2_s1) {
    CycleCertificate c;
    const bool opposite = (p1.jacobian - 1.0) * (p2.jacobian - 1.0) < 0.0;
    c.present = opposite && !u1_s2.empty() && !u2_s1.empty();
    c.j_contracting = std::min(p1.jacobian, p2.jacobian);
    c.j_expanding = std::max(p1.jacobian, p2.jacobian);
    for (const auto& x : u1_s2) c.min_angle = std::min(c.min_angle, x.angle);
    for (const auto& x : u2_s1) c.min_angle = std::min(c.min_angle, x.angle);
    return c;
}

// ---------------------------------------------------------------------------
// Saddle providers and first-tangency scans

/// The saddle fixed points of T, found as R-symmetric roots on both lines.
inline std::vector<OrbitRecord> fixed_point_saddles(const Params& p, const IntegratorSettings& s = {}) {
    std::vector<OrbitRecord> out;
    ScanOptions so;
    so.settings = s;
    ClassifyOptions co;
    co.settings = s;
    for (FixLine l : {FixLine::eta0, FixLine::etaPi}) {
        for (const auto& r : symmetric_scan(1, l, p, so).roots) {
            if (r.kind != RootKind::crossing) continue;
            try {
                const TorusPoint2 x = refine(MapSpec{MapKind::T, 1, p, s}, r.point());
                const OrbitRecord rec = classify_lenient(x, 1, p, co);
                if (rec.type != OrbitType::saddle) continue;
                if (std::none_of(out.begin(), out.end(),
                                 [&](const OrbitRecord& y) { return torus_distance(y.point, x) < 1e-8; })) {
                    out.push_back(rec);
                }
            } catch (const NumericalError&) {
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
        return a.point.eta != b.point.eta ? a.point.eta < b.point.eta : a.point.xi < b.point.xi;
    });
    return out;
}

/// Non-symmetric saddles of period q born near a degenerate symmetric point:
/// Newton is seeded on a small grid around `center` and every distinct saddle
/// with J != 1 is kept.
inline std::vector<OrbitRecord> saddles_near(const TorusPoint2& center, double radius, int q, const Params& p,
                                             const IntegratorSettings& s = {}, int seeds = 9) {
    std::vector<OrbitRecord> out;
    ClassifyOptions co;
    co.settings = s;
    for (int i = -seeds; i <= seeds; ++i) {
        for (int j = -seeds; j <= seeds; ++j) {
            const TorusPoint2 g{center.xi + radius * i / seeds, center.eta + radius * j / seeds};
            try {
                const TorusPoint2 x = refine(MapSpec{MapKind::T, q, p, s}, g);
                if (torus_distance(x, center) > 2.0 * radius) continue;
                const OrbitRecord rec = classify_lenient(x, q, p, co);
                if (rec.type != OrbitType::saddle || rec.r_symmetric) continue;
                if (std::none_of(out.begin(), out.end(),
                                 [&](const OrbitRecord& y) { return torus_distance(y.point, x) < 1e-8; })) {
                    out.push_back(rec);
                }
            } catch (const NumericalError&) {
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const OrbitRecord& a, const OrbitRecord& b) { return a.jacobian < b.jacobian; });
    return out;
}

/// All four branches of a saddle.
struct SaddleManifolds {
    OrbitRecord saddle;
    std::vector<Separatrix> unstable, stable;
};

inline SaddleManifolds grow_all(const OrbitRecord& saddle, int id, const Params& p, const GrowOptions& o) {
    SaddleManifolds m{saddle, {}, {}};
    for (int side : {1, -1}) {
        Separatrix u = grow(saddle, Stability::unstable, side, p, o);
        u.owner_id = id;
        m.unstable.push_back(std::move(u));
        Separatrix s = grow(saddle, Stability::stable, side, p, o);
        s.owner_id = id;
        m.stable.push_back(std::move(s));
    }
    return m;
}

/// Which crossings define the event followed by first_tangency_scan.
enum class PairMode {
    heteroclinic,  // W^u(P_i) against W^s(P_j), i != j
    symmetric,     // W^u(P_i) against Fix R (R-symmetric connecting orbits)
    any,           // both of the above, plus homoclinic W^u(P_i) against W^s(P_i)
};

struct PairSpec {
    std::function<std::vector<OrbitRecord>(const Params&)> saddles;
    PairMode mode = PairMode::heteroclinic;
    GrowOptions grow{};
    CrossingOptions cross{};
    /// Crossings within this distance of any saddle of the set are ignored.
    double saddle_exclusion = 1e-5;
    /// Optional filter on ordered pairs (unstable owner i, stable owner j).
    std::function<bool(const OrbitRecord&, const OrbitRecord&)> pair_filter;
};

inline std::vector<HetCrossing> probe_crossings(const PairSpec& spec, const Params& p, bool stop_at_first = false) {
    const auto saddles = spec.saddles(p);
    std::vector<SaddleManifolds> mans;
    for (std::size_t i = 0; i < saddles.size(); ++i) mans.push_back(grow_all(saddles[i], static_cast<int>(i), p, spec.grow));
    CrossingOptions co = spec.cross;
    for (const auto& s : saddles) co.excluded.emplace_back(s.point, spec.saddle_exclusion);
    std::vector<HetCrossing> out;
    for (std::size_t i = 0; i < mans.size(); ++i) {
        if (spec.mode != PairMode::heteroclinic) {
            for (const auto& u : mans[i].unstable) {
                auto c = fix_r_crossings(u, co);
                out.insert(out.end(), c.begin(), c.end());
                if (stop_at_first && !out.empty()) return out;
            }
        }
        if (spec.mode == PairMode::symmetric) continue;
        for (std::size_t j = 0; j < mans.size(); ++j) {
            if (i == j && spec.mode != PairMode::any) continue;
            if (spec.pair_filter && !spec.pair_filter(saddles[i], saddles[j])) continue;
            for (const auto& u : mans[i].unstable) {
                for (const auto& s : mans[j].stable) {
                    auto c = crossings(u, s, co);
                    out.insert(out.end(), c.begin(), c.end());
                    if (stop_at_first && !out.empty()) return out;
                }
            }
        }
    }
    return out;
}

struct TangencyScanResult {
    double epsilon = 0.0;       // midpoint of the final bracket
    double eps_empty = 0.0;     // side without crossings
    double eps_nonempty = 0.0;  // side with crossings
};

/// Parameter where crossings of the selected pairs appear or disappear,
/// bisected on the emptiness predicate to `tol`.
inline TangencyScanResult first_tangency_scan(const PairSpec& spec, double eps_lo, double eps_hi, double tol = 5e-4) {
    if (!(eps_lo < eps_hi)) throw ConfigError("first_tangency_scan: need eps_lo < eps_hi");
    CrossingOptions fast = spec.cross;
    PairSpec s = spec;
    s.cross.refine = false;
    auto nonempty = [&](double e) { return !probe_crossings(s, Params(e), true).empty(); };
    (void)fast;
    bool lo = nonempty(eps_lo), hi = nonempty(eps_hi);
    if (lo == hi) {
        throw NoBracketError("first_tangency_scan: crossings " + std::string(lo ? "present" : "absent") +
                             " at both ends of [" + std::to_string(eps_lo) + ", " + std::to_string(eps_hi) + "]");
    }
    double a = eps_lo, b = eps_hi;
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        if (nonempty(m) == lo) {
            a = m;
        } else {
            b = m;
        }
    }
    return {0.5 * (a + b), lo ? b : a, lo ? a : b};
}

}  // namespace revmix
