#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "revmix/orbit_finder.hpp"

using namespace revmix;

TEST_CASE("multiplier taxonomy") {
    using C = std::complex<double>;
    CHECK(classify_multipliers(C(3.0), C(0.2)) == OrbitType::saddle);
    CHECK(classify_multipliers(C(-3.0), C(-0.2)) == OrbitType::saddle);
    CHECK(classify_multipliers(C(0.5), C(0.1)) == OrbitType::sink);
    CHECK(classify_multipliers(C(2.0), C(1.5)) == OrbitType::source);
    CHECK(classify_multipliers(std::polar(1.0, 0.7), std::polar(1.0, -0.7)) == OrbitType::elliptic);
    CHECK(classify_multipliers(std::polar(0.9, 0.7), std::polar(0.9, -0.7)) == OrbitType::sink);
    CHECK(classify_multipliers(std::polar(1.1, 0.7), std::polar(1.1, -0.7)) == OrbitType::source);
    CHECK(classify_multipliers(C(1.0 + 1e-6), C(1.0 - 1e-6)) == OrbitType::parabolic);
    CHECK_THROWS_AS(classify_multipliers(C(1.0 + 1e-3), C(1.0 - 1e-5)), AmbiguousTypeError);
}

TEST_CASE("fixed points at eps = 0.7: roots on Fix R are symmetric periodic points") {
    const Params p(0.7);
    std::size_t total = 0;
    for (FixLine l : {FixLine::eta0, FixLine::etaPi}) {
        const auto res = symmetric_scan(1, l, p);
        CHECK_FALSE(res.whole_line);
        for (const auto& r : res.roots) {
            if (r.kind != RootKind::crossing) continue;
            ++total;
            // T(x) on Fix R with x on Fix R implies T^2(x) = x by reversibility
            CHECK(torus_distance(apply(MapSpec{MapKind::T, 2, p, {}}, r.point()), r.point()) < 1e-8);
        }
    }
    CHECK(total == 4);

    const auto fps = periodic_points(1, p);
    REQUIRE(fps.size() == 8);
    int sad = 0;
    for (const auto& f : fps) {
        CHECK(torus_distance(apply(MapSpec{MapKind::T, 1, p, {}}, f.point), f.point) < 1e-10);
        if (f.type == OrbitType::saddle) {
            ++sad;
            CHECK(f.r_symmetric);
            CHECK(f.jacobian == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK(sad == 4);
}

TEST_CASE("Newton refinement keeps symmetric seeds on Fix R") {
    const Params p(0.7);
    const auto res = symmetric_scan(1, FixLine::etaPi, p);
    REQUIRE(!res.roots.empty());
    const TorusPoint2 x = refine(MapSpec{MapKind::T, 1, p, {}}, res.roots.front().point());
    CHECK(torus_distance(involution_R(x), x) < 1e-9);
    // a perturbed seed converges to the same point
    const TorusPoint2 y = refine(MapSpec{MapKind::T, 1, p, {}}, {x.xi + 0.01, x.eta - 0.01});
    CHECK(torus_distance(x, y) < 1e-9);
}

TEST_CASE("minimal period") {
    const Params p(0.0);
    // at eps = 0 every point has period 2
    CHECK(minimal_period({1.0, 2.0}, 6, p) == 2);
    CHECK(minimal_period({1.0, 2.0}, 3, p) == 0);
    const Params q(0.7);
    const auto fps = periodic_points(1, q);
    REQUIRE(!fps.empty());
    CHECK(minimal_period(fps.front().point, 4, q) == 1);
}

TEST_CASE("whole-line coincidence is reported as a sentinel") {
    const auto res = symmetric_scan(2, FixLine::eta0, Params(0.0), ScanOptions{256});
    CHECK(res.whole_line);
    CHECK(res.roots.empty());
}

TEST_CASE("birth parameter separates root counts") {
    ScanOptions o;
    o.grid_n = 256;
    const auto ev = detect_birth_epsilon(1, FixLine::eta0, 0.59, 0.62, o);
    const auto below = symmetric_scan(1, FixLine::eta0, Params(ev.epsilon - 1e-4), o).crossing_count();
    const auto above = symmetric_scan(1, FixLine::eta0, Params(ev.epsilon + 1e-4), o).crossing_count();
    CHECK(below == ev.count_low);
    CHECK(above == ev.count_high);
    CHECK(below != above);
    REQUIRE(!ev.tangencies.empty());
    CHECK_THROWS_AS(detect_birth_epsilon(1, FixLine::eta0, 0.65, 0.7, o), NoBracketError);
}

TEST_CASE("continuation follows a saddle and records every step") {
    const Params p(0.7);
    OrbitRecord s;
    for (const auto& f : periodic_points(1, p)) {
        if (f.type == OrbitType::saddle) s = f;
    }
    REQUIRE(s.type == OrbitType::saddle);
    const Branch br = continue_branch(s, 0.68, 5e-3);
    CHECK(br.end == BranchEnd::reached_target);
    CHECK(br.end_epsilon == doctest::Approx(0.68));
    REQUIRE(br.records.size() >= 4);
    for (const auto& r : br.records) {
        CHECK(r.type == OrbitType::saddle);
        CHECK(torus_distance(apply(MapSpec{MapKind::T, 1, Params(r.epsilon), {}}, r.point), r.point) < 1e-9);
    }
}

TEST_CASE("classify throws only where the lenient path reports ambiguity") {
    const Params p(0.7);
    const auto fps = periodic_points(1, p);
    REQUIRE(!fps.empty());
    CHECK_NOTHROW(classify(fps.front().point, 1, p));
    CHECK_THROWS_AS(classify_lenient({0.0, 0.0}, 0, p), ConfigError);
}
