#pragma once

// Symmetric periodic orbits: detection through intersections of T^k(Fix R)
// with Fix R, Newton refinement, multiplier-based classification and
// natural-parameter continuation in epsilon.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"
#include "poincare.hpp"

namespace revmix {

// ---------------------------------------------------------------------------
// Types

/// One of the two circles forming Fix(R).
enum class FixLine { eta0, etaPi };

inline double line_eta(FixLine l) noexcept { return l == FixLine::eta0 ? 0.0 : kPi; }
inline const char* to_string(FixLine l) noexcept { return l == FixLine::eta0 ? "eta0" : "etaPi"; }

enum class OrbitType { saddle, elliptic, parabolic, sink, source, ambiguous };

inline const char* to_string(OrbitType t) noexcept {
    switch (t) {
        case OrbitType::saddle: return "saddle";
        case OrbitType::elliptic: return "elliptic";
        case OrbitType::parabolic: return "parabolic";
        case OrbitType::sink: return "sink";
        case OrbitType::source: return "source";
        case OrbitType::ambiguous: return "ambiguous";
    }
    return "?";
}

struct OrbitRecord {
    TorusPoint2 point;
    int q = 1;
    /// True when T* maps the T-orbit onto itself (an odd-period orbit of T*);
    /// false when T* carries it to a different T-orbit (period 2q for T*).
    bool half_period_flag = false;
    std::complex<double> lambda1, lambda2;
    double jacobian = 1.0;
    OrbitType type = OrbitType::ambiguous;
    bool r_symmetric = false;
    bool s_symmetric = false;
    double epsilon = 0.0;
};

// ---------------------------------------------------------------------------
// Multiplier taxonomy

struct TypeThresholds {
    double parabolic = 1e-4;  // band around |lambda| = 1 for real multipliers
    double elliptic = 1e-6;   // band around |lambda| = 1 for complex pairs
};

/// Type from multipliers; throws AmbiguousTypeError when not decidable.
inline OrbitType classify_multipliers(std::complex<double> l1, std::complex<double> l2,
                                      const TypeThresholds& th = {}) {
    const double d = th.parabolic;
    const double m1 = std::abs(l1), m2 = std::abs(l2);
    if (l1.imag() != 0.0) {
        if (std::abs(m1 - 1.0) < th.elliptic) {
            if (std::abs(l1.imag()) < d) {
                throw AmbiguousTypeError("complex multipliers within tolerance of +-1; elliptic vs parabolic undecidable");
            }
            return OrbitType::elliptic;
        }
        return m1 < 1.0 ? OrbitType::sink : OrbitType::source;
    }
    const double hi = std::max(m1, m2), lo = std::min(m1, m2);
    if (hi < 1.0 + d && lo > 1.0 - d) return OrbitType::parabolic;
    if (hi > 1.0 + d && lo < 1.0 - d) return OrbitType::saddle;
    if (hi < 1.0) return OrbitType::sink;
    if (lo > 1.0) return OrbitType::source;
    throw AmbiguousTypeError("real multipliers straddle 1 inside the parabolic band");
}

// ---------------------------------------------------------------------------
// Symmetric scan

struct ScanOptions {
    int grid_n = 512;
    double xi_tol = 1e-10;
    /// A local extremum of |g| below this value without a sign change is
    /// reported as a near-tangency.
    double tangency_threshold = 1e-7;
    IntegratorSettings settings{};
};

enum class RootKind { crossing, tangency };

struct ScanRoot {
    double xi = 0.0;
    RootKind kind = RootKind::crossing;
    double gap = 0.0;  // g at the root (~0) or at the near-tangency extremum
    FixLine line = FixLine::eta0;

    TorusPoint2 point() const noexcept { return {xi, line_eta(line)}; }
};

struct ScanResult {
    std::vector<ScanRoot> roots;
    /// T^k(line) coincides with the line (rigid case); no discrete roots.
    bool whole_line = false;

    std::size_t crossing_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(roots.begin(), roots.end(),
                                                      [](const ScanRoot& r) { return r.kind == RootKind::crossing; }));
    }
};

/// Signed eta-gap between T^k(xi, eta_line) and the same line, in (-pi, pi].
inline double fix_line_gap(int k, FixLine line, double xi, const Params& p, const IntegratorSettings& s) {
    const MapSpec m{MapKind::T, k, p, s};
    const double eta0 = line_eta(line);
    return wrap_signed(apply(m, {wrap_angle(xi), eta0}).eta - eta0);
}

namespace detail {

inline std::vector<double> sample_gaps(int k, FixLine line, const Params& p, const ScanOptions& o) {
    const std::size_t n = static_cast<std::size_t>(o.grid_n);
    std::vector<TorusPoint2> pts(n);
    const double eta0 = line_eta(line);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {kTwoPi * static_cast<double>(i) / static_cast<double>(n), eta0};
    for (int j = 0; j < k; ++j) advance_batch(pts, 0.0, kTwoPi, p, o.settings);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = wrap_signed(pts[i].eta - eta0);
    return g;
}

template <class F>
double bisect_root(F&& g, double a, double b, double ga, double tol) {
    // plain bisection keeps working across the +-pi jumps, which are filtered afterwards
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if (gm == 0.0) return m;
        if ((gm > 0.0) == (ga > 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// R-symmetric candidates on `line`: points x with T^k(x) on the same line
/// (so T^{2k}(x) = x). Sign changes are bisected; hidden pairs and
/// near-tangencies are found by refining local extrema of |g|.
inline ScanResult symmetric_scan(int k, FixLine line, const Params& p, const ScanOptions& o = {}) {
    if (k < 1) throw ConfigError("symmetric_scan: k must be positive");
    if (o.grid_n < 256) throw ConfigError("symmetric_scan: grid_n must be >= 256");
    o.settings.validate();

    const std::size_t n = static_cast<std::size_t>(o.grid_n);
    const std::vector<double> g = detail::sample_gaps(k, line, p, o);
    ScanResult out;

    const auto flat = std::count_if(g.begin(), g.end(), [](double v) { return std::abs(v) < 1e-9; });
    if (static_cast<double>(flat) > 0.9 * static_cast<double>(n)) {
        out.whole_line = true;
        return out;
    }

    const double h = kTwoPi / static_cast<double>(n);
    auto gap = [&](double xi) { return fix_line_gap(k, line, xi, p, o.settings); };
    auto add_root = [&](double xi, RootKind kind, double value) {
        xi = wrap_angle(xi);
        for (const auto& r : out.roots) {
            if (std::abs(wrap_signed(r.xi - xi)) < 1e-8) return;
        }
        out.roots.push_back({xi, kind, value, line});
    };
    auto continuous_change = [](double a, double b) { return std::abs(a) + std::abs(b) < kPi; };

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double a = h * static_cast<double>(i);
        const double b = a + h;
        if (g[i] == 0.0) {
            add_root(a, RootKind::crossing, 0.0);
            continue;
        }
        if ((g[i] > 0.0) != (g[j] > 0.0) && g[j] != 0.0 && continuous_change(g[i], g[j])) {
            const double x = detail::bisect_root(gap, a, b, g[i], o.xi_tol);
            const double gx = gap(x);
            if (std::abs(gx) < 1e-6) add_root(x, RootKind::crossing, gx);
        }
    }

    // local extrema of |g| that do not change sign across neighbouring cells
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
        const double gi = g[i];
        if (gi == 0.0) continue;
        const bool same_sign = (g[im] > 0.0) == (gi > 0.0) && (g[ip] > 0.0) == (gi > 0.0);
        if (!same_sign || std::abs(gi) > std::abs(g[im]) || std::abs(gi) > std::abs(g[ip])) continue;
        if (std::abs(gi) > 0.5 * kPi) continue;
        const double sgn = gi > 0.0 ? 1.0 : -1.0;
        const double a = h * (static_cast<double>(i) - 1.0), b = h * (static_cast<double>(i) + 1.0);
        auto obj = [&](double x) { return sgn * gap(x); };
        const auto [xm, vm] = boost::math::tools::brent_find_minima(obj, a, b, 40);
        if (vm < 0.0) {
            // the curve dips through the line between two samples: two roots
            const double x1 = detail::bisect_root(gap, a, xm, gi, o.xi_tol);
            const double x2 = detail::bisect_root(gap, xm, b, -gi, o.xi_tol);
            if (std::abs(gap(x1)) < 1e-6) add_root(x1, RootKind::crossing, 0.0);
            if (std::abs(gap(x2)) < 1e-6) add_root(x2, RootKind::crossing, 0.0);
        } else if (vm < o.tangency_threshold) {
            add_root(xm, RootKind::tangency, sgn * vm);
        }
    }

    std::sort(out.roots.begin(), out.roots.end(), [](const ScanRoot& l, const ScanRoot& r) { return l.xi < r.xi; });
    return out;
}

// ---------------------------------------------------------------------------
// Birth detection

struct Tangency {
    double xi = 0.0;
    double epsilon = 0.0;
    FixLine line = FixLine::eta0;
    TorusPoint2 point() const noexcept { return {xi, line_eta(line)}; }
};

struct BirthEvent {
    int k = 1;
    FixLine line = FixLine::eta0;
    /// Parameter of the tangency (mean over the symmetric tangency points).
    double epsilon = 0.0;
    std::size_t count_low = 0, count_high = 0;
    std::vector<Tangency> tangencies;
};

namespace detail {

/// Extremum of s*g over a window around xi (s fixes the orientation).
inline std::pair<double, double> gap_extremum(int k, FixLine line, double xi, double half_width, double s,
                                              const Params& p, const IntegratorSettings& st) {
    auto obj = [&](double x) { return s * fix_line_gap(k, line, x, p, st); };
    auto [xm, vm] = boost::math::tools::brent_find_minima(obj, xi - half_width, xi + half_width, 48);
    return {wrap_angle(xm), s * vm};
}

}  // namespace detail

/// Parameter at which the number of symmetric roots on `line` changes,
/// bracketed by [eps_lo, eps_hi]. The bracket is bisected on the root count
/// and the tangency parameter is then polished by tracking the extremum of
/// the gap function through zero.
inline BirthEvent detect_birth_epsilon(int k, FixLine line, double eps_lo, double eps_hi,
                                       const ScanOptions& o = {}) {
    if (!(eps_lo < eps_hi)) throw ConfigError("detect_birth_epsilon: need eps_lo < eps_hi");
    auto count_at = [&](double e) { return symmetric_scan(k, line, Params(e), o); };
    ScanResult lo = count_at(eps_lo), hi = count_at(eps_hi);
    if (lo.crossing_count() == hi.crossing_count()) {
        throw NoBracketError("root count of T^" + std::to_string(k) + "(" + to_string(line) +
                             ") does not change on [" + std::to_string(eps_lo) + ", " + std::to_string(eps_hi) + "]");
    }
    const std::size_t c_lo = lo.crossing_count(), c_hi = hi.crossing_count();
    double a = eps_lo, b = eps_hi;
    while (b - a > 1e-6) {
        const double m = 0.5 * (a + b);
        ScanResult sm = count_at(m);
        if (sm.crossing_count() == lo.crossing_count()) {
            a = m;
            lo = std::move(sm);
        } else {
            b = m;
            hi = std::move(sm);
        }
    }

    // the roots present on one side only are the newborn ones
    const bool more_hi = hi.crossing_count() > lo.crossing_count();
    const ScanResult& many = more_hi ? hi : lo;
    const ScanResult& few = more_hi ? lo : hi;
    std::vector<double> fresh;
    for (const auto& r : many.roots) {
        if (r.kind != RootKind::crossing) continue;
        const bool matched = std::any_of(few.roots.begin(), few.roots.end(), [&](const ScanRoot& f) {
            return f.kind == RootKind::crossing && std::abs(wrap_signed(f.xi - r.xi)) < 1e-4;
        });
        if (!matched) fresh.push_back(r.xi);
    }
    std::sort(fresh.begin(), fresh.end());

    // group newborn roots that lie close together; each group is one tangency
    std::vector<std::vector<double>> groups;
    for (double x : fresh) {
        if (!groups.empty() && std::abs(wrap_signed(x - groups.back().back())) < 0.05) {
            groups.back().push_back(x);
        } else {
            groups.push_back({x});
        }
    }
    if (groups.size() > 1 && std::abs(wrap_signed(groups.front().front() - groups.back().back())) < 0.05) {
        groups.front().insert(groups.front().end(), groups.back().begin(), groups.back().end());
        groups.pop_back();
    }

    BirthEvent ev{k, line, 0.5 * (a + b), c_lo, c_hi, {}};
    const double e_few = more_hi ? a : b;
    const double e_many = more_hi ? b : a;
    for (const auto& grp : groups) {
        // circular mean of the group
        double sx = 0.0, cx = 0.0;
        for (double x : grp) {
            sx += std::sin(x);
            cx += std::cos(x);
        }
        const double xc = wrap_angle(std::atan2(sx, cx));
        double spread = 0.0;
        for (double x : grp) spread = std::max(spread, std::abs(wrap_signed(x - xc)));
        const double half = std::max(4.0 * spread, 1e-3);
        const double s0 = fix_line_gap(k, line, xc, Params(e_few), o.settings) > 0.0 ? 1.0 : -1.0;
        auto h = [&](double e) {
            return s0 * detail::gap_extremum(k, line, xc, half, s0, Params(e), o.settings).second;
        };
        double e_star = 0.5 * (a + b);
        double x_star = xc;
        try {
            const double h_few = h(e_few), h_many = h(e_many);
            if ((h_few > 0.0) != (h_many > 0.0)) {
                std::uintmax_t iters = 80;
                auto tol = [](double u, double v) { return std::abs(u - v) < 1e-12; };
                auto [r0, r1] = boost::math::tools::toms748_solve(h, std::min(e_few, e_many), std::max(e_few, e_many),
                                                                  e_few < e_many ? h_few : h_many,
                                                                  e_few < e_many ? h_many : h_few, tol, iters);
                e_star = 0.5 * (r0 + r1);
            }
            x_star = detail::gap_extremum(k, line, xc, half, s0, Params(e_star), o.settings).first;
        } catch (const boost::math::evaluation_error&) {
            // keep the bisection estimate
        }
        ev.tangencies.push_back({x_star, e_star, line});
    }
    if (!ev.tangencies.empty()) {
        double sum = 0.0;
        for (const auto& t : ev.tangencies) sum += t.epsilon;
        ev.epsilon = sum / static_cast<double>(ev.tangencies.size());
    }
    return ev;
}

/// Scan an epsilon range with a fixed step and bisect every change in the
/// root count. Each reported event brackets exactly one count change.
inline std::vector<BirthEvent> scan_births(int k, FixLine line, double eps_lo, double eps_hi, double step,
                                           const ScanOptions& o = {}) {
    std::vector<BirthEvent> out;
    if (!(step > 0.0)) throw ConfigError("scan_births: step must be positive");
    double e0 = eps_lo;
    std::size_t c0 = symmetric_scan(k, line, Params(e0), o).crossing_count();
    while (e0 < eps_hi - 1e-15) {
        const double e1 = std::min(eps_hi, e0 + step);
        const std::size_t c1 = symmetric_scan(k, line, Params(e1), o).crossing_count();
        if (c1 != c0) out.push_back(detect_birth_epsilon(k, line, e0, e1, o));
        e0 = e1;
        c0 = c1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Newton refinement

struct NewtonOptions {
    double tol = 1e-11;
    int max_iter = 60;
    double max_step = 0.2;
};

/// Fixed point of the selected map near `guess`, using the variational
/// derivative for the Newton matrix.
inline TorusPoint2 refine(const MapSpec& m, TorusPoint2 guess, const NewtonOptions& o = {}) {
    m.validate();
    TorusPoint2 x = guess.normalized();
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < o.max_iter; ++it) {
        const auto r = apply_full(m, x);
        const auto f = torus_delta(x, r.point);
        const double res = std::hypot(f[0], f[1]);
        best = std::min(best, res);
        if (res < o.tol) return x;
        Jacobian2 df = r.jacobian;
        df.a -= 1.0;
        df.d -= 1.0;
        const double det = df.det();
        const double scale = std::max({std::abs(df.a), std::abs(df.b), std::abs(df.c), std::abs(df.d), 1.0});
        if (std::abs(det) < 1e-14 * scale * scale) {
            throw SingularJacobianError("refine: derivative of map - identity is singular");
        }
        auto step = df.inverse().apply(-f[0], -f[1]);
        const double len = std::hypot(step[0], step[1]);
        if (len > o.max_step) {
            step[0] *= o.max_step / len;
            step[1] *= o.max_step / len;
        }
        x = TorusPoint2::normalized(x.xi + step[0], x.eta + step[1]);
    }
    const auto f = torus_delta(x, apply(m, x));
    if (std::hypot(f[0], f[1]) < o.tol) return x;
    throw MaxIterationsError("refine: no convergence, best residual " + std::to_string(best));
}

// ---------------------------------------------------------------------------
// Classification

struct ClassifyOptions {
    IntegratorSettings settings{};
    TypeThresholds thresholds{};
    double symmetry_tol = 1e-8;
};

namespace detail {

inline double min_distance_to(const std::vector<TorusPoint2>& pts, const TorusPoint2& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& y : pts) d = std::min(d, torus_distance(x, y));
    return d;
}

}  // namespace detail

/// Multipliers, Jacobian, type and symmetry flags of a period-q point of T.
/// The type is set to `ambiguous` instead of throwing.
inline OrbitRecord classify_lenient(const TorusPoint2& pt, int q, const Params& p, const ClassifyOptions& o = {}) {
    if (q < 1) throw ConfigError("classify: q must be positive");
    const MapSpec m{MapKind::T, q, p, o.settings};
    const auto r = apply_full(m, pt);
    OrbitRecord rec;
    rec.point = pt.normalized();
    rec.q = q;
    rec.epsilon = p.epsilon();
    const auto [l1, l2] = r.jacobian.eigenvalues();
    rec.lambda1 = l1;
    rec.lambda2 = l2;
    rec.jacobian = r.jacobian.det();
    try {
        rec.type = classify_multipliers(l1, l2, o.thresholds);
    } catch (const AmbiguousTypeError&) {
        rec.type = OrbitType::ambiguous;
    }
    const auto orbit = orbit_points(MapKind::T, rec.point, q, p, o.settings);
    rec.r_symmetric = detail::min_distance_to(orbit, involution_R(rec.point)) < o.symmetry_tol;
    const bool on_line = std::any_of(orbit.begin(), orbit.end(), [&](const TorusPoint2& y) {
        return distance_to_s_lines(y) < o.symmetry_tol;
    });
    rec.s_symmetric = on_line || detail::min_distance_to(orbit, symmetry_S(rec.point)) < o.symmetry_tol;
    const TorusPoint2 star = apply(MapSpec{MapKind::Tstar, 1, p, o.settings}, rec.point);
    rec.half_period_flag = detail::min_distance_to(orbit, star) < o.symmetry_tol;
    return rec;
}

/// Distinct points of minimal period q of T found by Newton from an n x n
/// grid of seeds covering the torus.
inline std::vector<OrbitRecord> periodic_points(int q, const Params& p, int seeds = 12, const ClassifyOptions& o = {},
                                                double dedup = 1e-7) {
    if (q < 1 || seeds < 1) throw ConfigError("periodic_points: q and seeds must be positive");
    std::vector<OrbitRecord> out;
    const MapSpec m{MapKind::T, q, p, o.settings};
    for (int i = 0; i < seeds; ++i) {
        for (int j = 0; j < seeds; ++j) {
            try {
                const TorusPoint2 x = refine(m, {kTwoPi * i / seeds, kTwoPi * j / seeds});
                if (std::any_of(out.begin(), out.end(),
                                [&](const OrbitRecord& r) { return torus_distance(r.point, x) < dedup; })) {
                    continue;
                }
                out.push_back(classify_lenient(x, q, p, o));
            } catch (const NumericalError&) {
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
        return a.point.xi != b.point.xi ? a.point.xi < b.point.xi : a.point.eta < b.point.eta;
    });
    return out;
}

/// As classify_lenient but throws AmbiguousTypeError on undecidable types.
inline OrbitRecord classify(const TorusPoint2& pt, int q, const Params& p, const ClassifyOptions& o = {}) {
    OrbitRecord rec = classify_lenient(pt, q, p, o);
    if (rec.type == OrbitType::ambiguous) {
        throw AmbiguousTypeError("classify: multipliers (" + std::to_string(rec.lambda1.real()) + "," +
                                 std::to_string(rec.lambda1.imag()) + ") do not determine the type");
    }
    return rec;
}

/// Minimal period of x under T among divisors of `max_q`, or 0 if x is not
/// periodic with a period dividing max_q.
inline int minimal_period(const TorusPoint2& x, int max_q, const Params& p, const IntegratorSettings& s = {},
                          double tol = 1e-8) {
    TorusPoint2 y = x;
    for (int q = 1; q <= max_q; ++q) {
        y = apply(MapSpec{MapKind::T, 1, p, s}, y);
        if (max_q % q == 0 && torus_distance(x, y) < tol) return q;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Continuation in epsilon

enum class BranchEnd { reached_target, fold };

inline const char* to_string(BranchEnd e) noexcept {
    return e == BranchEnd::reached_target ? "reached_target" : "fold";
}

struct Branch {
    std::vector<OrbitRecord> records;
    BranchEnd end = BranchEnd::reached_target;
    double end_epsilon = 0.0;
};

struct ContinuationOptions {
    double min_step = 1e-6;
    /// Corrected points further than this from the prediction are rejected.
    double max_jump = 0.05;
    /// Reject continuation steps that change the orbit type.
    bool keep_type = true;
    NewtonOptions newton{};
    ClassifyOptions classify{};
};

/// Predictor-corrector continuation of a refined period-q point of T from
/// rec.epsilon toward eps_to. Terminates at eps_to or where the Newton
/// correction fails even after halving the step below min_step (fold or
/// collision); the terminal event is reported in the Branch.
inline Branch continue_branch(const OrbitRecord& rec, double eps_to, double step,
                              const ContinuationOptions& o = {}) {
    if (!(step > 0.0)) throw ConfigError("continue_branch: step must be positive");
    Branch br;
    br.records.push_back(rec);
    const double dir = eps_to >= rec.epsilon ? 1.0 : -1.0;
    double eps = rec.epsilon;
    double h = step;
    TorusPoint2 cur = rec.point;
    std::optional<TorusPoint2> prev;
    double prev_h = h;
    while (dir * (eps_to - eps) > 1e-15) {
        const double e_next = dir > 0 ? std::min(eps_to, eps + h) : std::max(eps_to, eps - h);
        const double h_act = std::abs(e_next - eps);
        TorusPoint2 pred = cur;
        if (prev) {
            const auto d = torus_delta(*prev, cur);
            const double f = h_act / prev_h;
            pred = TorusPoint2::normalized(cur.xi + f * d[0], cur.eta + f * d[1]);
        }
        bool ok = false;
        OrbitRecord next;
        try {
            const Params pn(e_next);
            const TorusPoint2 x = refine(MapSpec{MapKind::T, rec.q, pn, o.classify.settings}, pred, o.newton);
            const double jump = torus_distance(x, pred);
            const double moved = prev ? torus_distance(*prev, cur) : 0.0;
            if (jump < std::max(o.max_jump * h_act / step, 4.0 * moved + 1e-9) + 1e-7) {
                next = classify_lenient(x, rec.q, pn, o.classify);
                ok = !o.keep_type || next.type == rec.type;
            }
        } catch (const NumericalError&) {
            ok = false;
        }
        if (ok) {
            prev = cur;
            prev_h = h_act;
            cur = next.point;
            eps = e_next;
            br.records.push_back(next);
            h = std::min(step, 2.0 * h);
        } else {
            h *= 0.5;
            if (h < o.min_step) {
                br.end = BranchEnd::fold;
                br.end_epsilon = eps;
                return br;
            }
        }
    }
    br.end = BranchEnd::reached_target;
    br.end_epsilon = eps;
    return br;
}

}  // namespace revmix
