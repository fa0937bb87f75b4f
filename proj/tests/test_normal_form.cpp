#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "revmix/normal_form.hpp"

using namespace revmix;

namespace {

ChartMap quadratic(double a20, double a11, double a02, double b20, double b11, double b02, double quartic = 0.0) {
    return [=](double x, double y) {
        return std::array<double, 2>{-x + a20 * x * x + a11 * x * y + a02 * y * y + quartic * x * x * x * x,
                                     y + b20 * x * x + b11 * x * y + b02 * y * y + quartic * y * y * y * y};
    };
}

int count(const std::vector<PotokEquilibrium>& v, EquilibriumType t) {
    return static_cast<int>(std::count_if(v.begin(), v.end(), [&](const PotokEquilibrium& e) { return e.type == t; }));
}

}  // namespace

TEST_CASE("Taylor coefficients of a polynomial map") {
    const auto c = taylor_extract(quadratic(0.3, -0.7, 0.2, 1.1, 0.4, -0.9));
    CHECK(c.A20 == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(c.A11 == doctest::Approx(-0.7).epsilon(1e-6));
    CHECK(c.A02 == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(c.B20 == doctest::Approx(1.1).epsilon(1e-6));
    CHECK(c.B11 == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(c.B02 == doctest::Approx(-0.9).epsilon(1e-6));
}

TEST_CASE("Richardson removes the leading quartic error") {
    const auto c = taylor_extract(quadratic(0.0, 0.5, 0.0, 1.0, 0.0, 1.0, 5.0));
    CHECK(std::abs(c.A20) < 1e-8);
    CHECK(std::abs(c.B02 - 1.0) < 1e-8);
    CHECK_THROWS_AS(taylor_extract(quadratic(0.0, 0.5, 0.0, 1.0, 0.0, 1.0, 5.0), 2e-3, 1e-9), ExtrapolationError);
    CHECK_THROWS_AS(taylor_extract(quadratic(0, 1, 0, 1, 0, 1), 0.0), ConfigError);
}

TEST_CASE("reduction to the normal form") {
    NormalFormCoeffs c;
    c.A20 = 0.4;
    c.A11 = 0.6;
    c.A02 = -0.2;
    c.B20 = 1.5;
    c.B11 = 0.8;
    c.B02 = -2.0;
    const auto r = reduce(c);
    CHECK(r.reduced);
    CHECK(r.alpha == doctest::Approx(-0.3));
    CHECK(r.sign_case == -1);
    CHECK_FALSE(r.inverted);
    CHECK(r.a == doctest::Approx(0.2));
    CHECK(r.b == doctest::Approx(-0.1));
    CHECK(r.c == doctest::Approx(-0.4));
    // reducing again changes nothing
    const auto rr = reduce(r);
    CHECK(rr.alpha == doctest::Approx(r.alpha));
    CHECK(rr.sign_case == r.sign_case);

    // a negative x^2 coefficient is folded through the inverse map
    c.B20 = -1.5;
    c.B02 = 2.0;
    const auto f = reduce(c);
    CHECK(f.alpha == doctest::Approx(0.3));
    CHECK(f.sign_case == -1);
    CHECK(f.inverted);

    c.A11 = 0.0;
    CHECK_THROWS_AS(reduce(c), GenericityError);
}

TEST_CASE("bifurcation table") {
    NormalFormCoeffs c;
    c.reduced = true;
    c.sign_case = 1;
    c.alpha = -0.5;
    CHECK(classify_bifurcation(c).label == BifLabel::plus_elliptic_saddles);
    CHECK(classify_bifurcation(c).after == Inventory{2, 2, 0, 0, 0, 2});
    c.alpha = 0.5;
    CHECK(classify_bifurcation(c).label == BifLabel::plus_saddle_sink_source);
    CHECK(classify_bifurcation(c).after.sinks == 1);
    c.sign_case = -1;
    CHECK(classify_bifurcation(c).label == BifLabel::minus_saddle);
    c.alpha = -0.5;
    CHECK(classify_bifurcation(c).label == BifLabel::minus_elliptic);
    c.reduced = false;
    CHECK_THROWS_AS(classify_bifurcation(c), ConfigError);
}

TEST_CASE("equilibria of the quadratic vector field") {
    // sign +, alpha < 0: two saddles on x = 0 and two centres on y = 0
    auto e = potok_equilibria(-1.0, -0.5, 1);
    REQUIRE(e.size() == 4);
    CHECK(count(e, EquilibriumType::saddle) == 2);
    CHECK(count(e, EquilibriumType::center) == 2);
    for (const auto& p : e) {
        if (p.type == EquilibriumType::center) CHECK(p.r_symmetric);
        if (p.type == EquilibriumType::saddle) CHECK(p.s_pair);
    }
    // sign +, alpha > 0: saddles on y = 0, a sink and a source on x = 0
    e = potok_equilibria(-1.0, 0.5, 1);
    CHECK(count(e, EquilibriumType::saddle) == 2);
    CHECK(count(e, EquilibriumType::sink) == 1);
    CHECK(count(e, EquilibriumType::source) == 1);
    CHECK(potok_equilibria(1.0, 0.5, 1).empty());
    // sign -: one pair on each side of nu = 0
    CHECK(potok_equilibria(1.0, 0.5, -1).size() == 2);
    CHECK(potok_equilibria(-1.0, 0.5, -1).size() == 2);
    // every returned point is an equilibrium
    for (double nu : {-0.3, 0.3}) {
        for (int s : {1, -1}) {
            for (const auto& p : potok_equilibria(nu, 0.7, s)) {
                CHECK(std::abs(0.7 * p.x * p.y) < 1e-15);
                CHECK(std::abs(nu + p.x * p.x + s * p.y * p.y) < 1e-15);
            }
        }
    }
    CHECK(potok_equilibria(0.0, 1.0, 1).size() == 1);
    CHECK_THROWS_AS(potok_equilibria(1.0, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(potok_equilibria(1.0, 1.0, 0), ConfigError);
}

TEST_CASE("inventory arithmetic") {
    const Inventory a{3, 2, 1, 1, 0, 2}, b{1, 2, 0, 1, 0, 2};
    CHECK(a - b == Inventory{2, 0, 1, 0, 0, 0});
    CHECK(a.total() == 7);
    OrbitRecord s, e;
    s.type = OrbitType::saddle;
    s.r_symmetric = true;
    e.type = OrbitType::elliptic;
    CHECK(inventory_of({s, e, s}) == Inventory{2, 1, 0, 0, 0, 2});
}

TEST_CASE("Bochner frame rejects points off Fix R") {
    const LocalMap f{LocalMapKind::tstar_power, 1, Params(0.6), {}};
    CHECK_THROWS_AS(bochner_frame(f, {1.0, 0.5}), ConfigError);
}
