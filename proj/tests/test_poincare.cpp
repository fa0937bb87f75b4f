#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "revmix/poincare.hpp"

using namespace revmix;

namespace {
std::mt19937_64 rng(3);
double angle() { return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng); }
}  // namespace

TEST_CASE("structural identities hold at several couplings") {
    for (double e : {0.1, 0.49, 0.65}) {
        const auto rep = verify_identities(Params(e), 50, {}, 5);
        CHECK(rep.max_deviation() < 1e-9);
        CHECK(rep.inverse_roundtrip < 1e-9);
        CHECK(rep.max_det_Tstar < 0.0);
        CHECK(rep.min_det_T > 0.0);
        CHECK(rep.samples == 50);
    }
}

TEST_CASE("epsilon = 0 maps in closed form") {
    const Params p(0.0);
    for (int i = 0; i < 20; ++i) {
        const TorusPoint2 x{angle(), angle()};
        CHECK(torus_distance(apply(MapSpec{MapKind::T, 1, p, {}}, x), TorusPoint2::normalized(x.xi, x.eta + kPi)) < 1e-12);
        // half period: eta advances pi/2, then sigma
        const TorusPoint2 star = TorusPoint2::normalized(kPi - x.xi, x.eta + 1.5 * kPi);
        CHECK(torus_distance(apply(MapSpec{MapKind::Tstar, 1, p, {}}, x), star) < 1e-12);
        // two-point orbits
        CHECK(torus_distance(apply(MapSpec{MapKind::T, 2, p, {}}, x), x) < 1e-12);
    }
}

TEST_CASE("powers compose and inverses undo") {
    const Params p(0.55);
    const MapSpec T{MapKind::T, 1, p, {}};
    for (int i = 0; i < 10; ++i) {
        const TorusPoint2 x{angle(), angle()};
        CHECK(torus_distance(apply(T.with_power(3), x), apply(T, apply(T, apply(T, x)))) < 1e-11);
        CHECK(torus_distance(apply(T.with_kind(MapKind::TstarInverse), apply(T.with_kind(MapKind::Tstar), x)), x) < 1e-10);
        const auto orbit = orbit_points(MapKind::T, x, 3, p, {});
        REQUIRE(orbit.size() == 3);
        CHECK(torus_distance(orbit[0], x) < 1e-15);
        CHECK(torus_distance(orbit[2], apply(T.with_power(2), x)) < 1e-11);
    }
    CHECK_THROWS_AS(apply(T.with_power(0), {0.0, 0.0}), ConfigError);
}

TEST_CASE("map derivative against finite differences, with the sigma differential for T*") {
    const Params p(0.45);
    const double h = 1e-6;
    for (MapKind k : {MapKind::T, MapKind::Tstar, MapKind::Tinverse}) {
        const MapSpec m{k, 2, p, {}};
        for (int i = 0; i < 5; ++i) {
            const TorusPoint2 x{angle(), angle()};
            const auto [y, J] = apply_with_derivative(m, x);
            const auto dx = torus_delta(apply(m, {x.xi - h, x.eta}), apply(m, {x.xi + h, x.eta}));
            const auto de = torus_delta(apply(m, {x.xi, x.eta - h}), apply(m, {x.xi, x.eta + h}));
            const double scale = std::max({1.0, std::abs(J.a), std::abs(J.b), std::abs(J.c), std::abs(J.d)});
            CHECK(std::abs(J.a - dx[0] / (2 * h)) < 1e-5 * scale);
            CHECK(std::abs(J.c - dx[1] / (2 * h)) < 1e-5 * scale);
            CHECK(std::abs(J.b - de[0] / (2 * h)) < 1e-5 * scale);
            CHECK(std::abs(J.d - de[1] / (2 * h)) < 1e-5 * scale);
            CHECK(torus_distance(y, apply(m, x)) < 1e-13);
        }
    }
}
