#pragma once

// Reference checks shared by the acceptance test binary and `revmix regress`.
// Every check computes its value from scratch and compares it with the
// reference number at a fixed tolerance; nothing is cached.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "attractor_repeller.hpp"
#include "chain_recurrence.hpp"
#include "manifold.hpp"
#include "normal_form.hpp"
#include "orbit_finder.hpp"
#include "poincare.hpp"

namespace revmix::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::vector<std::string> details;  // "quantity: computed vs reference"
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

struct Options {
    int threads = 1;
};

namespace detail {

inline std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

class Check {
public:
    explicit Check(CriterionResult& r) : r_(r) { r_.pass = true; }
    bool operator()(bool ok, const std::string& what) {
        r_.details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
        r_.pass = r_.pass && ok;
        return ok;
    }
    void note(const std::string& what) { r_.details.push_back("     " + what); }

private:
    CriterionResult& r_;
};

inline bool within(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Brute-force graph oracle: transitive closure by repeated squaring of a
// boolean matrix, independent of the BFS and Tarjan code paths.

namespace oracle {

struct Closure {
    int n = 0;
    std::vector<char> reach;  // reach[i*n+j]: path of length >= 1 from i to j
    bool at(int i, int j) const { return reach[static_cast<std::size_t>(i) * n + j] != 0; }
};

inline Closure transitive_closure(const BoxGraph& g) {
    Closure c;
    c.n = g.size();
    const int n = c.n;
    c.reach.assign(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) {
        for (auto t : g.successors(i)) c.reach[static_cast<std::size_t>(i) * n + t] = 1;
    }
    // Warshall
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            if (!c.at(i, k)) continue;
            char* ri = &c.reach[static_cast<std::size_t>(i) * n];
            const char* rk = &c.reach[static_cast<std::size_t>(k) * n];
            for (int j = 0; j < n; ++j) ri[j] |= rk[j];
        }
    }
    return c;
}

/// Components as sorted lists, sorted by smallest member; i ~ j iff i == j
/// or each reaches the other.
inline std::vector<std::vector<int>> components(const Closure& c) {
    std::vector<int> label(static_cast<std::size_t>(c.n), -1);
    std::vector<std::vector<int>> out;
    for (int i = 0; i < c.n; ++i) {
        if (label[i] >= 0) continue;
        std::vector<int> comp{i};
        label[i] = static_cast<int>(out.size());
        for (int j = i + 1; j < c.n; ++j) {
            if (label[j] < 0 && c.at(i, j) && c.at(j, i)) {
                label[j] = label[i];
                comp.push_back(j);
            }
        }
        out.push_back(std::move(comp));
    }
    return out;
}

}  // namespace oracle

// ---------------------------------------------------------------------------
// Shared experiment pieces

/// Saddle pair of the first period-3 family near the tangency on eta = pi,
/// sorted by Jacobian (contracting first).
inline std::vector<OrbitRecord> period3_family1_saddles(const Params& p, const IntegratorSettings& s = {}) {
    return saddles_near({2.677, kPi}, 0.12, 3, p, s);
}

/// Heteroclinic set-up for the fixed-point saddles.
inline PairSpec fixed_point_pairs(PairMode mode, double budget, double exclusion) {
    PairSpec ps;
    ps.saddles = [](const Params& p) { return fixed_point_saddles(p); };
    ps.mode = mode;
    ps.grow.budget = budget;
    ps.saddle_exclusion = exclusion;
    return ps;
}

/// R-symmetric connections between the period-3 family-I saddles that leave
/// the disk of radius `exclusion` around both of them.
inline PairSpec period3_large_pairs(double budget, double exclusion) {
    PairSpec ps;
    ps.saddles = [](const Params& p) {
        auto s = period3_family1_saddles(p);
        if (s.size() != 2) throw NumericalError("period-3 family I saddle pair not found");
        return s;
    };
    ps.mode = PairMode::symmetric;
    ps.grow.budget = budget;
    ps.saddle_exclusion = exclusion;
    return ps;
}

/// Symmetric roots present at eps_many but not at eps_few, classified with
/// their minimal period.
inline std::vector<OrbitRecord> newborn_symmetric(int k, FixLine line, double eps_few, double eps_many) {
    const auto few = symmetric_scan(k, line, Params(eps_few));
    const auto many = symmetric_scan(k, line, Params(eps_many));
    std::vector<OrbitRecord> out;
    const Params p(eps_many);
    for (const auto& r : many.roots) {
        if (r.kind != RootKind::crossing) continue;
        const bool old = std::any_of(few.roots.begin(), few.roots.end(), [&](const ScanRoot& f) {
            return f.kind == RootKind::crossing && std::abs(wrap_signed(f.xi - r.xi)) < 1e-2;
        });
        if (old) continue;
        const int q = minimal_period(r.point(), 2 * k, p, {}, 1e-7);
        if (q == 0) continue;
        out.push_back(classify_lenient(r.point(), q, p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Criteria

inline CriterionResult criterion_1(const Options& = {}) {
    CriterionResult r{1, "structural identities", false, {}, 0.0, 60.0};
    detail::Check ck(r);
    for (double e : {0.1, 0.3, 0.49, 0.65}) {
        const auto rep = verify_identities(Params(e), 1000, {}, 1);
        ck(rep.max_deviation() < 1e-9, detail::fmt("eps=%.2f max deviation %.2e (< 1e-9)", e, rep.max_deviation()));
        ck(rep.max_det_Tstar < 0.0 && rep.min_det_T > 0.0,
           detail::fmt("eps=%.2f max det DT* %.4f < 0, min det DT %.4f > 0", e, rep.max_det_Tstar, rep.min_det_T));
    }
    return r;
}

inline CriterionResult criterion_2(const Options& = {}) {
    CriterionResult r{2, "fixed-point birth eps1*", false, {}, 0.0, 60.0};
    detail::Check ck(r);
    const std::pair<FixLine, TorusPoint2> cases[] = {{FixLine::eta0, {0.0, 0.0}}, {FixLine::etaPi, {kPi, kPi}}};
    for (const auto& [line, target] : cases) {
        const auto ev = detect_birth_epsilon(1, line, 0.59, 0.62);
        ck(detail::within(ev.epsilon, 0.6042, 0.001),
           detail::fmt("%s: eps1* = %.6f vs 0.6042 +- 0.001", to_string(line), ev.epsilon));
        double best = 1e9;
        for (const auto& t : ev.tangencies) best = std::min(best, torus_distance(t.point(), target));
        ck(best <= 1e-3, detail::fmt("%s: tangency at distance %.2e from (%.4f, %.4f) (<= 1e-3)", to_string(line), best,
                                     target.xi, target.eta));
    }
    return r;
}

inline CriterionResult criterion_3(const Options& = {}) {
    CriterionResult r{3, "fixed points at eps=0.7", false, {}, 0.0, 60.0};
    detail::Check ck(r);
    const Params p(0.7);
    const auto fps = periodic_points(1, p, 12);
    std::vector<OrbitRecord> saddles, sinks, sources;
    for (const auto& f : fps) {
        if (f.type == OrbitType::saddle) saddles.push_back(f);
        if (f.type == OrbitType::sink) sinks.push_back(f);
        if (f.type == OrbitType::source) sources.push_back(f);
    }
    ck(fps.size() == 8, detail::fmt("fixed points: %zu vs 8", fps.size()));
    ck(saddles.size() == 4 && sinks.size() == 2 && sources.size() == 2,
       detail::fmt("saddles/sinks/sources: %zu/%zu/%zu vs 4/2/2", saddles.size(), sinks.size(), sources.size()));
    double dj = 0.0;
    for (const auto& s : saddles) dj = std::max(dj, std::abs(s.jacobian - 1.0));
    ck(!saddles.empty() && dj < 1e-6, detail::fmt("max |J - 1| over saddles %.2e (< 1e-6)", dj));
    for (const auto& s : sinks) {
        const auto src = std::min_element(sources.begin(), sources.end(), [&](const auto& a, const auto& b) {
            return torus_distance(a.point, involution_R(s.point)) < torus_distance(b.point, involution_R(s.point));
        });
        if (src == sources.end()) break;
        const double prod = s.jacobian * src->jacobian;
        ck(std::abs(prod - 1.0) < 1e-6,
           detail::fmt("sink J %.8f x source J %.6f = %.10f (1 +- 1e-6)", s.jacobian, src->jacobian, prod));
    }
    return r;
}

inline CriterionResult criterion_4(const Options& = {}) {
    CriterionResult r{4, "period-3 family I", false, {}, 0.0, 120.0};
    detail::Check ck(r);
    const auto ev = detect_birth_epsilon(3, FixLine::etaPi, 0.450, 0.458);
    ck(ev.epsilon >= 0.454 && ev.epsilon <= 0.458, detail::fmt("eps31* = %.6f in [0.454, 0.458]", ev.epsilon));
    const auto s = period3_family1_saddles(Params(0.457));
    if (!ck(s.size() == 2, detail::fmt("saddle pair at 0.457: %zu found", s.size()))) return r;
    ck(detail::within(s[0].jacobian, 0.7198, 0.01), detail::fmt("J upper = %.6f vs 0.7198 +- 0.01", s[0].jacobian));
    ck(detail::within(s[1].jacobian, 1.3893, 0.01), detail::fmt("J lower = %.6f vs 1.3893 +- 0.01", s[1].jacobian));
    const double prod = s[0].jacobian * s[1].jacobian;
    ck(std::abs(prod - 1.0) < 1e-5, detail::fmt("product = %.9f (1 +- 1e-5)", prod));
    return r;
}

inline CriterionResult criterion_5(const Options& = {}) {
    CriterionResult r{5, "period-3 collision", false, {}, 0.0, 300.0};
    detail::Check ck(r);
    const auto s = period3_family1_saddles(Params(0.457));
    if (!ck(!s.empty(), "period-3 saddle at 0.457 found")) return r;
    const auto br = continue_branch(s[0], 0.70, 1e-3);
    ck(br.end == BranchEnd::fold, detail::fmt("branch ends with %s", to_string(br.end)));
    ck(detail::within(br.end_epsilon, 0.663, 0.003), detail::fmt("end eps = %.6f vs 0.663 +- 0.003", br.end_epsilon));
    return r;
}

inline CriterionResult criterion_6(const Options& = {}) {
    CriterionResult r{6, "period-3 family II", false, {}, 0.0, 120.0};
    detail::Check ck(r);
    const auto ev = detect_birth_epsilon(3, FixLine::eta0, 0.475, 0.49);
    ck(detail::within(ev.epsilon, 0.483, 0.002), detail::fmt("eps32* = %.6f vs 0.483 +- 0.002", ev.epsilon));
    if (!ck(!ev.tangencies.empty(), "tangency located")) return r;
    const auto s = saddles_near(ev.tangencies.front().point(), 0.12, 3, Params(0.485));
    if (!ck(s.size() == 2, detail::fmt("saddle pair at 0.485: %zu found", s.size()))) return r;
    ck(detail::within(s[0].jacobian, 0.9988, 5e-4), detail::fmt("J = %.6f vs 0.9988 +- 0.0005", s[0].jacobian));
    ck(detail::within(s[1].jacobian, 1.0012, 5e-4), detail::fmt("J = %.6f vs 1.0012 +- 0.0005", s[1].jacobian));
    return r;
}

inline CriterionResult criterion_7(const Options& = {}) {
    CriterionResult r{7, "higher periods", false, {}, 0.0, 600.0};
    detail::Check ck(r);
    const double delta = 2e-3;

    // conservative births: each tangency adds one saddle and one elliptic point
    auto conservative = [&](int k, FixLine line, double lo, double hi, double ref, double tol, const char* name) {
        const auto ev = detect_birth_epsilon(k, line, lo, hi);
        ck(detail::within(ev.epsilon, ref, tol), detail::fmt("%s = %.6f vs %.4f +- %.3f", name, ev.epsilon, ref, tol));
        const bool up = ev.count_high > ev.count_low;
        const auto born = newborn_symmetric(k, line, ev.epsilon - (up ? delta : -delta), ev.epsilon + (up ? delta : -delta));
        const Inventory inv = inventory_of(born);
        double dj = 0.0;
        for (const auto& b : born) {
            if (b.type == OrbitType::saddle) dj = std::max(dj, std::abs(b.jacobian - 1.0));
        }
        const int tang = static_cast<int>(ev.tangencies.size());
        ck(tang > 0 && inv.saddles == tang && inv.elliptic == tang && inv.total() == 2 * tang,
           detail::fmt("%s newborn: %s over %d tangencies (0->2 each)", name, to_string(inv).c_str(), tang));
        ck(inv.saddles > 0 && dj < 1e-6, detail::fmt("%s saddle max |J - 1| = %.2e (< 1e-6)", name, dj));
    };
    auto alpha_negative = [&](int k, FixLine line, double lo, double hi, double ref, double tol, const char* name) {
        const auto ev = detect_birth_epsilon(k, line, lo, hi);
        ck(detail::within(ev.epsilon, ref, tol), detail::fmt("%s = %.6f vs %.4f +- %.4f", name, ev.epsilon, ref, tol));
        for (const auto& t : ev.tangencies) {
            try {
                const auto a = analyse_tangency(t, k);
                ck(a.reduced.sign_case > 0 && a.reduced.alpha < 0.0,
                   detail::fmt("%s at xi=%.4f: sign %+d, alpha = %.4f (0->4, alpha < 0)", name, t.xi,
                               a.reduced.sign_case, a.reduced.alpha));
            } catch (const Error& e) {
                ck(false, detail::fmt("%s at xi=%.4f: %s", name, t.xi, e.what()));
            }
        }
    };
    conservative(5, FixLine::eta0, 0.41, 0.425, 0.417, 0.002, "eps5*");
    alpha_negative(7, FixLine::etaPi, 0.375, 0.3802, 0.3795, 0.001, "eps71*");
    alpha_negative(7, FixLine::eta0, 0.3802, 0.385, 0.3805, 0.001, "eps72*");
    conservative(9, FixLine::eta0, 0.34, 0.355, 0.348, 0.002, "eps9*");

    const auto ev = detect_birth_epsilon(11, FixLine::eta0, 0.318, 0.328);
    ck(detail::within(ev.epsilon, 0.323, 0.003), detail::fmt("eps11* = %.6f vs 0.323 +- 0.003", ev.epsilon));
    const bool up = ev.count_high > ev.count_low;
    const auto born = newborn_symmetric(11, FixLine::eta0, ev.epsilon - (up ? delta : -delta),
                                        ev.epsilon + (up ? delta : -delta));
    ck.note(detail::fmt("eps11* newborn (type report only): %s", to_string(inventory_of(born)).c_str()));
    return r;
}

inline CriterionResult criterion_8(const Options& = {}) {
    CriterionResult r{8, "heteroclinic thresholds", false, {}, 0.0, 600.0};
    detail::Check ck(r);
    const auto h1 = first_tangency_scan(fixed_point_pairs(PairMode::heteroclinic, 20.0, 1e-5), 0.67, 0.70, 2e-4);
    ck(detail::within(h1.epsilon, 0.690, 0.005), detail::fmt("eps1het = %.5f vs 0.690 +- 0.005", h1.epsilon));
    const auto h2 = first_tangency_scan(fixed_point_pairs(PairMode::symmetric, 20.0, 0.15), 0.672, 0.688, 2e-4);
    ck(detail::within(h2.epsilon, 0.679, 0.005), detail::fmt("eps2het = %.5f vs 0.679 +- 0.005", h2.epsilon));

    const auto h3 = first_tangency_scan(period3_large_pairs(4.0, 0.1), 0.456, 0.470, 2e-4);
    ck(h3.epsilon >= 0.455 && h3.epsilon <= 0.470, detail::fmt("period-3 large tangency at eps = %.5f in [0.455, 0.470]", h3.epsilon));
    const auto s = period3_family1_saddles(Params(h3.epsilon));
    if (!ck(s.size() == 2, "saddle pair at the tangency")) return r;
    ck(detail::within(s[0].jacobian, 0.524, 0.05), detail::fmt("J = %.5f vs 0.524 +- 0.05", s[0].jacobian));
    ck(detail::within(s[1].jacobian, 1.909, 0.05), detail::fmt("J = %.5f vs 1.909 +- 0.05", s[1].jacobian));
    const double prod = s[0].jacobian * s[1].jacobian;
    ck(std::abs(prod - 1.0) < 1e-3, detail::fmt("product = %.8f (1 +- 1e-3)", prod));
    return r;
}

inline CriterionResult criterion_9(const Options& o = {}) {
    CriterionResult r{9, "average divergence", false, {}, 0.0, 300.0};
    detail::Check ck(r);
    auto run = [&](double e, Direction d) {
        CloudSpec s;
        s.params = Params(e);
        s.direction = d;
        return average_divergence(s, o.threads);
    };
    const auto f = run(0.49, Direction::forward);
    const auto b = run(0.49, Direction::backward);
    ck(std::abs(f.mean_per_time - (-0.00122)) <= 0.25 * 0.00122,
       detail::fmt("forward  = %+.6f (SE %.1e) vs -0.00122 +- 25%%", f.mean_per_time, f.standard_error));
    ck(std::abs(b.mean_per_time - 0.00122) <= 0.25 * 0.00122,
       detail::fmt("backward = %+.6f (SE %.1e) vs +0.00122 +- 25%%", b.mean_per_time, b.standard_error));
    const double se = std::hypot(f.standard_error, b.standard_error);
    ck(std::abs(f.mean_per_time + b.mean_per_time) <= 2.0 * se,
       detail::fmt("forward + backward = %+.2e (2 SE = %.1e)", f.mean_per_time + b.mean_per_time, 2.0 * se));
    const auto c = run(0.1, Direction::forward);
    ck(std::abs(c.mean_per_time) < 3.0 * c.standard_error,
       detail::fmt("eps=0.1: %+.2e vs 3 SE = %.1e", c.mean_per_time, 3.0 * c.standard_error));
    return r;
}

inline CriterionResult criterion_10(const Options& o = {}) {
    CriterionResult r{10, "attractor-repeller overlap", false, {}, 0.0, 300.0};
    detail::Check ck(r);
    CloudSpec s;
    s.params = Params(0.6);
    const auto fwd = iterate_cloud(s, o.threads);
    s.direction = Direction::backward;
    const auto bwd = iterate_cloud(s, o.threads);
    const auto m = overlap_metrics(histogram(fwd.points), histogram(bwd.points));
    ck(m.mass_intersection > 0.2, detail::fmt("eps=0.6 mass_intersection = %.4f (> 0.2)", m.mass_intersection));
    ck(m.l1 > 0.1, detail::fmt("eps=0.6 L1 = %.4f (> 0.1)", m.l1));

    const BoxCover cover(256, 256);
    const auto g = build_graph(Params(0.7), cover, default_noise(cover), 9, IntegratorSettings::fast(), o.threads);
    const auto att = reversible_attractor(g);
    const auto rep = reversible_repeller(g);
    std::vector<int> common;
    std::set_intersection(att.boxes.begin(), att.boxes.end(), rep.boxes.begin(), rep.boxes.end(),
                          std::back_inserter(common));
    ck(!att.boxes.empty() && common.empty(),
       detail::fmt("eps=0.7 chain attractor %zu boxes (%zu comps), repeller %zu boxes (%zu comps), shared %zu",
                   att.boxes.size(), att.components.size(), rep.boxes.size(), rep.components.size(), common.size()));
    return r;
}

inline CriterionResult criterion_11(const Options& = {}) {
    CriterionResult r{11, "normal-form round trip", false, {}, 0.0, 180.0};
    detail::Check ck(r);
    struct Case {
        int k;
        FixLine line;
        double lo, hi;
        const char* name;
        bool alpha_positive;
    };
    const Case cases[] = {{1, FixLine::eta0, 0.59, 0.62, "eps1*", true},
                          {3, FixLine::etaPi, 0.450, 0.458, "eps31*", false},
                          {7, FixLine::etaPi, 0.375, 0.3802, "eps71*", false}};
    for (const auto& c : cases) {
        const auto ev = detect_birth_epsilon(c.k, c.line, c.lo, c.hi);
        const auto& t = ev.tangencies.front();
        try {
            const auto a = analyse_tangency(t, c.k);
            ck((a.reduced.alpha > 0.0) == c.alpha_positive && a.reduced.sign_case > 0,
               detail::fmt("%s: alpha = %.4f, sign %+d, %s", c.name, a.reduced.alpha, a.reduced.sign_case,
                           to_string(a.prediction.label)));
            const double e = a.degenerate.epsilon;
            const double d = ev.count_high > ev.count_low ? 2e-3 : -2e-3;
            const Inventory got = inventory_change(a.frame.origin, 0.2, c.k, e - d, e + d);
            const Inventory want = a.prediction.after - a.prediction.before;
            ck(got == want, detail::fmt("%s inventory at eps*+2e-3: %s; predicted %s", c.name, to_string(got).c_str(),
                                        to_string(want).c_str()));
        } catch (const Error& e) {
            ck(false, detail::fmt("%s: %s", c.name, e.what()));
        }
    }

    // polynomial self-test on the normal form itself
    for (int sgn : {1, -1}) {
        const double alpha = -2.0;
        const ChartMap F = [&](double x, double y) {
            return std::array<double, 2>{-x - alpha * x * y, y + x * x + sgn * y * y};
        };
        const auto c = taylor_extract(F, 1e-3);
        const double err = std::max({std::abs(c.A20), std::abs(c.A11 + alpha), std::abs(c.A02), std::abs(c.B20 - 1.0),
                                     std::abs(c.B11), std::abs(c.B02 - sgn)});
        const auto red = reduce(c);
        ck(err < 1e-8 && std::abs(red.alpha - alpha) < 1e-8 && red.sign_case == sgn,
           detail::fmt("polynomial (alpha=-2, sign %+d): max coefficient error %.1e, alpha %.10f", sgn, err, red.alpha));
    }
    return r;
}

inline CriterionResult criterion_12(const Options& = {}) {
    CriterionResult r{12, "chain-recurrence oracle", false, {}, 0.0, 10.0};
    detail::Check ck(r);
    // default noise, and the smallest admissible noise where the graph keeps more structure
    const BoxCover cover(16, 16);
    for (auto [e, noise] : {std::pair{0.6, default_noise(cover)}, std::pair{0.7, default_noise(cover)},
                            std::pair{0.6, 0.5001 * cover.diagonal()}, std::pair{0.7, 0.5001 * cover.diagonal()}}) {
        const auto g = build_graph(Params(e), cover, noise);
        const auto dec = chain_components(g);
        const auto cl = oracle::transitive_closure(g);
        auto mine = dec.components;
        std::sort(mine.begin(), mine.end());
        auto theirs = oracle::components(cl);
        std::sort(theirs.begin(), theirs.end());
        ck(mine == theirs, detail::fmt("eps=%.1f noise=%.3f: %zu components vs oracle %zu", e, noise, mine.size(), theirs.size()));
        std::size_t mismatches = 0;
        for (int b = 0; b < g.size(); ++b) {
            const auto a = attainable(g, b);
            std::vector<int> o;
            for (int j = 0; j < g.size(); ++j) {
                if (cl.at(b, j)) o.push_back(j);
            }
            mismatches += a == o ? 0 : 1;
        }
        ck(mismatches == 0, detail::fmt("eps=%.1f noise=%.3f: attainable sets differing from oracle: %zu of %d", e, noise, mismatches, g.size()));
    }
    return r;
}

using CriterionFn = std::function<CriterionResult(const Options&)>;

inline const std::vector<CriterionFn>& all_criteria() {
    static const std::vector<CriterionFn> v{criterion_1, criterion_2, criterion_3,  criterion_4,
                                            criterion_5, criterion_6, criterion_7,  criterion_8,
                                            criterion_9, criterion_10, criterion_11, criterion_12};
    return v;
}

/// Runs one criterion, timing it and turning exceptions into failures.
inline CriterionResult run(int id, const Options& o = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = all_criteria().at(static_cast<std::size_t>(id - 1))(o);
    } catch (const std::exception& e) {
        r.id = id;
        r.title = "criterion " + std::to_string(id);
        r.pass = false;
        r.details.push_back(std::string("FAIL exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
        r.pass = false;
        r.details.push_back(detail::fmt("FAIL runtime %.1f s exceeds %.0f s", r.seconds, r.budget_seconds));
    }
    return r;
}

inline std::string summary_line(const CriterionResult& r) {
    return detail::fmt("criterion %2d %-28s %s  (%.1f s)", r.id, r.title.c_str(), r.pass ? "PASS" : "FAIL", r.seconds);
}

}  // namespace revmix::acceptance
