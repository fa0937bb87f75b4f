#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <boost/numeric/odeint.hpp>

#include "revmix/flow.hpp"

using namespace revmix;

namespace {

std::mt19937_64 rng(11);
double angle() { return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng); }

// Independent integrator: adaptive Dormand-Prince on the raw angles.
TorusPoint2 odeint_advance(TorusPoint2 x, double t0, double t1, const Params& p) {
    namespace ode = boost::numeric::odeint;
    std::array<double, 2> y{x.xi, x.eta};
    auto rhs = [&](const std::array<double, 2>& s, std::array<double, 2>& d, double t) {
        const auto v = vf_reduced({s[0], s[1]}, t, p);
        d = {v.dxi, v.deta};
    };
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 2>>>(1e-13, 1e-13), rhs,
                            y, t0, t1, (t1 - t0) / 1000.0);
    return TorusPoint2::normalized(y[0], y[1]);
}

}  // namespace

TEST_CASE("advance agrees with an independent adaptive integrator") {
    for (double e : {0.1, 0.49, 0.7}) {
        const Params p(e);
        for (int i = 0; i < 20; ++i) {
            const TorusPoint2 x{angle(), angle()};
            CHECK(torus_distance(advance(x, 0.0, kTwoPi, p, {}), odeint_advance(x, 0.0, kTwoPi, p)) < 1e-10);
            CHECK(torus_distance(advance(x, 0.0, kPi, p, {}), odeint_advance(x, 0.0, kPi, p)) < 1e-10);
        }
    }
}

TEST_CASE("forward then backward returns to the start") {
    const Params p(0.5);
    for (int i = 0; i < 50; ++i) {
        const TorusPoint2 x{angle(), angle()};
        CHECK(torus_distance(advance(advance(x, 0.0, kPi, p, {}), kPi, 0.0, p, {}), x) < 1e-10);
    }
}

TEST_CASE("epsilon = 0 is the rigid shift eta -> eta + pi per period") {
    const Params p(0.0);
    for (int i = 0; i < 20; ++i) {
        const TorusPoint2 x{angle(), angle()};
        CHECK(torus_distance(advance(x, 0.0, kTwoPi, p, {}), TorusPoint2::normalized(x.xi, x.eta + kPi)) < 1e-12);
    }
}

TEST_CASE("variational derivative: Abel-Liouville and finite differences") {
    const Params p(0.65);
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const TorusPoint2 x{angle(), angle()};
        const FlowResult r = advance_full(x, 0.0, kTwoPi, p, {});
        CHECK(std::abs(r.jacobian.det() - std::exp(r.divergence_integral)) < 1e-8 * std::max(1.0, r.jacobian.det()));
        auto col = [&](double dx, double de) {
            const auto a = advance({x.xi + dx, x.eta + de}, 0.0, kTwoPi, p, {});
            const auto b = advance({x.xi - dx, x.eta - de}, 0.0, kTwoPi, p, {});
            const auto d = torus_delta(b, a);
            return std::array<double, 2>{d[0] / (2 * h), d[1] / (2 * h)};
        };
        const auto cx = col(h, 0.0), ce = col(0.0, h);
        const double scale = std::max({1.0, std::abs(r.jacobian.a), std::abs(r.jacobian.b), std::abs(r.jacobian.c),
                                       std::abs(r.jacobian.d)});
        CHECK(std::abs(r.jacobian.a - cx[0]) < 1e-5 * scale);
        CHECK(std::abs(r.jacobian.c - cx[1]) < 1e-5 * scale);
        CHECK(std::abs(r.jacobian.b - ce[0]) < 1e-5 * scale);
        CHECK(std::abs(r.jacobian.d - ce[1]) < 1e-5 * scale);
        const auto [pt, div] = advance_with_divergence(x, 0.0, kTwoPi, p, {});
        CHECK(torus_distance(pt, r.point) < 1e-13);
        CHECK(std::abs(div - r.divergence_integral) < 1e-12);
    }
}

TEST_CASE("batched advance matches the scalar path") {
    const Params p(0.49);
    std::vector<TorusPoint2> pts;
    for (int i = 0; i < 21; ++i) pts.push_back({angle(), angle()});
    auto batch = pts;
    std::vector<double> div(pts.size());
    advance_batch(batch, 0.0, kTwoPi, p, IntegratorSettings::fast(), div);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto [pt, d] = advance_with_divergence(pts[i], 0.0, kTwoPi, p, IntegratorSettings::fast());
        CHECK(torus_distance(batch[i], pt) < 1e-12);
        CHECK(std::abs(div[i] - d) < 1e-12);
    }
    std::vector<double> wrong(3);
    CHECK_THROWS_AS(advance_batch(batch, 0.0, 1.0, p, {}, wrong), ConfigError);
}

TEST_CASE("step-count convergence") {
    const Params p(0.6);
    const TorusPoint2 x{1.1, 2.3};
    const auto ref = odeint_advance(x, 0.0, kTwoPi, p);
    // the eighth-order scheme is at round-off already at the minimum step count
    const auto fine = advance(x, 0.0, kTwoPi, p, IntegratorSettings{1600, Scheme::rk8, 1e-10});
    CHECK(torus_distance(advance(x, 0.0, kTwoPi, p, IntegratorSettings{100, Scheme::rk8, 1e-10}), fine) < 1e-13);
    CHECK(torus_distance(fine, ref) < 1e-10);
    // the fourth-order scheme shows its order: doubling the steps divides the error by 16
    IntegratorSettings c{100, Scheme::rk4, 1e-6}, d{200, Scheme::rk4, 1e-6};
    const double ec = torus_distance(advance(x, 0.0, kTwoPi, p, c), fine);
    const double ed = torus_distance(advance(x, 0.0, kTwoPi, p, d), fine);
    CHECK(ec / ed == doctest::Approx(16.0).epsilon(0.25));
    CHECK(estimate_step_error(x, 0.0, kTwoPi, p, c) == doctest::Approx(ec - ed).epsilon(0.2));
}

TEST_CASE("settings are validated") {
    CHECK_THROWS_AS(advance({0.0, 0.0}, 0.0, 1.0, Params(0.5), IntegratorSettings{50, Scheme::rk8, 1e-10}), ConfigError);
}
