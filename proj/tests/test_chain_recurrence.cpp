#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "revmix/chain_recurrence.hpp"
#include "revmix/orbit_finder.hpp"

using namespace revmix;

namespace {

TorusPoint2 twist(const TorusPoint2& x) {
    return TorusPoint2::normalized(x.xi + 0.9 * std::sin(x.eta), x.eta + 0.5 + 0.4 * std::sin(x.xi));
}

BatchMap twist_map() {
    return [](std::vector<TorusPoint2>& pts) {
        for (auto& p : pts) p = twist(p);
    };
}

// Warshall closure over explicit adjacency, independent of the library's traversal
std::vector<std::vector<char>> closure(const BoxGraph& g) {
    const int n = g.size();
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (int b = 0; b < n; ++b) {
        for (auto t : g.successors(b)) r[b][t] = 1;
    }
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            if (!r[i][k]) continue;
            for (int j = 0; j < n; ++j) r[i][j] = r[i][j] || r[k][j];
        }
    }
    return r;
}

bool has_edge(const BoxGraph& g, int a, int b) {
    const auto s = g.successors(a);
    return std::binary_search(s.begin(), s.end(), static_cast<std::uint32_t>(b));
}

}  // namespace

TEST_CASE("reachability and components agree with a transitive-closure oracle") {
    const BoxCover c(12, 12);
    // noise at the minimum keeps the graph far from complete
    const BoxGraph g = build_graph(twist_map(), c, 0.5001 * c.diagonal());
    const auto r = closure(g);
    const auto d = chain_components(g);
    for (int a = 0; a < g.size(); ++a) {
        const auto att = attainable(g, a);
        std::vector<int> want;
        for (int b = 0; b < g.size(); ++b) {
            if (r[a][b]) want.push_back(b);
        }
        CHECK(att == want);
        for (int b = 0; b < g.size(); ++b) {
            const bool same = a == b || (r[a][b] && r[b][a]);
            CHECK((d.component_of[a] == d.component_of[b]) == same);
        }
        CHECK(static_cast<bool>(d.recurrent[d.component_of[a]]) == static_cast<bool>(r[a][a]));
    }
    // condensation edges point only to components reachable in the oracle
    for (std::size_t k = 0; k < d.components.size(); ++k) {
        for (int s : d.successors[k]) CHECK(r[d.components[k].front()][d.components[s].front()]);
    }
}

TEST_CASE("edges contain the image boxes and grow with the noise") {
    const BoxCover c(16, 16);
    const BoxGraph a = build_graph(twist_map(), c, 0.5001 * c.diagonal());
    const BoxGraph b = build_graph(twist_map(), c, 1.5 * c.diagonal());
    for (int k = 0; k < c.size(); ++k) {
        CHECK(!a.successors(k).empty());
        CHECK(has_edge(a, k, c.box_of(twist(c.center(k)))));
        for (auto t : a.successors(k)) CHECK(has_edge(b, k, static_cast<int>(t)));
    }
    CHECK(b.edge_count() > a.edge_count());
}

TEST_CASE("graphs are identical across thread counts") {
    const BoxCover c(16, 16);
    const BoxGraph a = build_graph(twist_map(), c, default_noise(c), 9, 1);
    const BoxGraph b = build_graph(twist_map(), c, default_noise(c), 9, 4);
    CHECK(a.offsets == b.offsets);
    CHECK(a.targets == b.targets);
}

TEST_CASE("a translation is chain transitive") {
    const BoxCover c(20, 20);
    BatchMap shift = [](std::vector<TorusPoint2>& pts) {
        for (auto& p : pts) p = TorusPoint2::normalized(p.xi + 0.3, p.eta + 0.7);
    };
    const auto d = chain_components(build_graph(shift, c, default_noise(c)));
    CHECK(d.components.size() == 1);
    CHECK(d.recurrent[0]);
}

TEST_CASE("epsilon = 0 gives one component") {
    const BoxCover c(16, 16);
    const auto d = chain_components(build_graph(Params(0.0), c, default_noise(c)));
    CHECK(d.components.size() == 1);
}

TEST_CASE("sinks of T at eps = 0.7 sit in terminal recurrent components") {
    // at 64 x 64 the noise bridges the sink at (pi, 2.90) and the source at (pi, 3.38)
    const Params p(0.7);
    const BoxCover c(128, 128);
    const BoxGraph g = build_graph(p, c, default_noise(c));
    const auto d = chain_components(g);
    const auto att = reversible_attractor(g);
    int sinks = 0;
    for (const auto& f : periodic_points(1, p)) {
        if (f.type != OrbitType::sink) continue;
        ++sinks;
        const int b = c.box_of(f.point);
        const int k = d.component_of[b];
        CHECK(d.recurrent[k]);
        CHECK(d.terminal(k));
        CHECK(std::binary_search(att.boxes.begin(), att.boxes.end(), b));
    }
    CHECK(sinks == 2);
}

TEST_CASE("reversal and reflection are involutions") {
    const BoxCover c(16, 16);
    const BoxGraph g = build_graph(twist_map(), c, default_noise(c));
    const BoxGraph rr = reversed(reversed(g));
    CHECK(rr.offsets == g.offsets);
    for (int b = 0; b < g.size(); ++b) {
        auto x = g.successors(b), y = rr.successors(b);
        CHECK(std::vector<std::uint32_t>(x.begin(), x.end()) == std::vector<std::uint32_t>(y.begin(), y.end()));
    }
    const std::vector<int> boxes{0, 5, 17, 100, 255};
    CHECK(reflect_boxes(c, reflect_boxes(c, boxes)) == boxes);
    // R fixes the boxes along eta = pi from above
    CHECK(reflect_boxes(c, std::vector<int>{c.index(3, 8)}) == std::vector<int>{c.index(3, 7)});
}

TEST_CASE("configuration errors") {
    const BoxCover c(8, 8);
    CHECK_THROWS_AS(BoxCover(0, 4), ConfigError);
    CHECK_THROWS_AS(build_graph(twist_map(), c, 0.1 * c.diagonal()), ConfigError);
    CHECK_THROWS_AS(build_graph(twist_map(), c, default_noise(c), 8), ConfigError);
    const BoxGraph g = build_graph(twist_map(), c, default_noise(c));
    CHECK_THROWS_AS(attainable(g, 64), ConfigError);
}
