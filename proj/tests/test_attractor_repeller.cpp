#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "revmix/attractor_repeller.hpp"

using namespace revmix;

namespace {

CloudSpec small(double eps, Direction d) {
    CloudSpec s;
    s.n = 6;
    s.transient = 20;
    s.keep = 10;
    s.direction = d;
    s.params = Params(eps);
    return s;
}

}  // namespace

TEST_CASE("histograms are normalised and bin by wrapped angle") {
    const std::vector<TorusPoint2> pts{{0.1, 0.1}, {kTwoPi - 1e-9, 0.1}, {3.0, 5.0}, {3.0, 5.0}};
    const auto h = histogram(pts, 4);
    CHECK(h.total() == doctest::Approx(1.0));
    CHECK(h.at(0, 0) == doctest::Approx(0.25));
    CHECK(h.at(3, 0) == doctest::Approx(0.25));
    CHECK(h.at(1, 3) == doctest::Approx(0.5));
    CHECK_THROWS_AS(histogram(std::vector<TorusPoint2>{}, 4), ConfigError);
}

TEST_CASE("overlap metrics") {
    const std::vector<TorusPoint2> a{{0.1, 0.1}, {3.0, 3.0}};
    const std::vector<TorusPoint2> b{{0.1, 0.1}, {5.0, 5.0}};
    const auto ha = histogram(a, 8), hb = histogram(b, 8);
    const auto same = overlap_metrics(ha, ha);
    CHECK(same.l1 == doctest::Approx(0.0));
    CHECK(same.support_jaccard == doctest::Approx(1.0));
    CHECK(same.mass_intersection == doctest::Approx(1.0));
    const auto half = overlap_metrics(ha, hb);
    CHECK(half.l1 == doctest::Approx(1.0));
    CHECK(half.support_jaccard == doctest::Approx(1.0 / 3.0));
    CHECK(half.mass_intersection == doctest::Approx(0.5));
    // l1 = 2 (1 - common mass) for probability vectors
    CHECK(half.l1 == doctest::Approx(2.0 * (1.0 - half.mass_intersection)));
    const auto disjoint = overlap_metrics(histogram(std::vector<TorusPoint2>{{0.1, 0.1}}, 8),
                                          histogram(std::vector<TorusPoint2>{{5.0, 5.0}}, 8));
    CHECK(disjoint.l1 == doctest::Approx(2.0));
    CHECK(disjoint.support_jaccard == 0.0);
    CHECK_THROWS_AS(overlap_metrics(ha, histogram(a, 16)), BinningMismatchError);
}

TEST_CASE("reflection is an involution") {
    const std::vector<TorusPoint2> pts{{0.3, 1.2}, {2.0, 5.5}};
    const auto back = reflect_cloud(reflect_cloud(pts));
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(torus_distance(back[i], pts[i]) < 1e-15);
    CHECK(torus_distance(reflect_cloud(pts)[0], {0.3, kTwoPi - 1.2}) < 1e-15);
}

TEST_CASE("epsilon = 0: period-two orbits and zero divergence") {
    const Cloud c = iterate_cloud(small(0.0, Direction::forward));
    REQUIRE(c.points.size() == 36u * 10u);
    for (std::size_t o = 0; o < 36; ++o) {
        const TorusPoint2 a = c.points[o * 10], b = c.points[o * 10 + 1], d = c.points[o * 10 + 2];
        // clouds run on the coarse fourth-order settings
        CHECK(torus_distance(a, d) < 1e-6);
        CHECK(std::abs(wrap_signed(b.eta - a.eta - kPi)) < 1e-6);
        CHECK(std::abs(wrap_signed(b.xi - a.xi)) < 1e-12);
    }
    CHECK(std::abs(c.divergence.mean_per_time) < 1e-12);
}

TEST_CASE("clouds are deterministic across thread counts") {
    const auto s = small(0.49, Direction::forward);
    const Cloud a = iterate_cloud(s, 1), b = iterate_cloud(s, 3);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].xi == b.points[i].xi);
        CHECK(a.points[i].eta == b.points[i].eta);
    }
    CHECK(a.divergence.mean_per_time == b.divergence.mean_per_time);
}

TEST_CASE("divergence cross-check and sign convention") {
    const DivergenceStats f = average_divergence(small(0.49, Direction::forward));
    const DivergenceStats b = average_divergence(small(0.49, Direction::backward));
    CHECK(f.crosscheck_deviation < 1e-6);
    CHECK(b.crosscheck_deviation < 1e-6);
    CHECK(f.logdet_per_time == doctest::Approx(f.subsample_divergence_per_time).epsilon(1e-6));
    // orbits settle on sinks going forward and on sources going backward
    CHECK(f.mean_per_time < 0.0);
    CHECK(b.mean_per_time > 0.0);
    CHECK(f.samples == 36u * 10u);
}

TEST_CASE("cloud configuration is validated") {
    auto s = small(0.5, Direction::forward);
    s.keep = 0;
    CHECK_THROWS_AS(iterate_cloud(s), ConfigError);
    s.keep = 1;
    s.n = 0;
    CHECK_THROWS_AS(iterate_cloud(s), ConfigError);
}

TEST_CASE("Fix R source seeds both circles") {
    CloudSpec s;
    s.source = CloudSource::fix_r;
    s.n = 10;
    const auto pts = initial_points(s);
    REQUIRE(pts.size() == 20);
    for (const auto& p : pts) CHECK(distance_to_fix_r(p) < 1e-15);
}
