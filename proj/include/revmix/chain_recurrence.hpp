#pragma once

// Box-cover transition graphs for epsilon-orbits: reachability, strongly
// connected components and the reversible attractor/repeller of Fix R.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"

namespace revmix {

struct BoxCover {
    int n_xi = 256, n_eta = 256;

    BoxCover() = default;
    BoxCover(int nx, int ne) : n_xi(nx), n_eta(ne) {
        if (nx < 1 || ne < 1) throw ConfigError("BoxCover: bin counts must be positive");
    }

    int size() const noexcept { return n_xi * n_eta; }
    double width_xi() const noexcept { return kTwoPi / n_xi; }
    double width_eta() const noexcept { return kTwoPi / n_eta; }
    double diagonal() const noexcept { return std::hypot(width_xi(), width_eta()); }
    int index(int i, int j) const noexcept { return i * n_eta + j; }
    int row(int b) const noexcept { return b / n_eta; }
    int col(int b) const noexcept { return b % n_eta; }
    int bin_xi(double xi) const noexcept { return std::min(n_xi - 1, static_cast<int>(wrap_angle(xi) / width_xi())); }
    int bin_eta(double eta) const noexcept { return std::min(n_eta - 1, static_cast<int>(wrap_angle(eta) / width_eta())); }
    int box_of(const TorusPoint2& p) const noexcept { return index(bin_xi(p.xi), bin_eta(p.eta)); }
    TorusPoint2 center(int b) const noexcept { return {(row(b) + 0.5) * width_xi(), (col(b) + 0.5) * width_eta()}; }

    /// Boxes whose closure meets eta = 0 or eta = pi.
    bool meets_fix_r(int b) const noexcept {
        const double lo = col(b) * width_eta(), hi = lo + width_eta();
        return lo <= 0.0 || hi >= kTwoPi || (lo <= kPi && kPi <= hi);
    }
};

/// Adjacency in compressed rows: successors of b are targets[offsets[b] .. offsets[b+1]).
struct BoxGraph {
    BoxCover cover;
    double noise = 0.0;
    int samples_per_box = 9;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> targets;

    int size() const noexcept { return cover.size(); }
    std::span<const std::uint32_t> successors(int b) const {
        return {targets.data() + offsets[b], targets.data() + offsets[b + 1]};
    }
    std::size_t edge_count() const noexcept { return targets.size(); }
};

/// Batched map used to build a graph: images overwrite the input points.
using BatchMap = std::function<void(std::vector<TorusPoint2>&)>;

namespace detail {

inline std::vector<double> sample_offsets(int samples_per_box) {
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(samples_per_box))));
    if (m < 1 || m * m != samples_per_box) throw ConfigError("samples_per_box must be a perfect square");
    std::vector<double> out;
    for (int i = 0; i < m; ++i) out.push_back((i + 0.5) / m);
    return out;
}

}  // namespace detail

namespace detail {

/// Largest distance between images of lattice neighbours; images are stored
/// row-major over an m x m lattice.
inline double max_image_spacing(std::span<const TorusPoint2> img, int m) {
    double d = 0.0;
    for (int a = 0; a < m; ++a) {
        for (int c = 0; c < m; ++c) {
            const auto& y = img[static_cast<std::size_t>(a * m + c)];
            if (a + 1 < m) d = std::max(d, torus_distance(y, img[static_cast<std::size_t>((a + 1) * m + c)]));
            if (c + 1 < m) d = std::max(d, torus_distance(y, img[static_cast<std::size_t>(a * m + c + 1)]));
        }
    }
    return d;
}

inline void lattice_points(const BoxCover& cover, int b, int m, std::vector<TorusPoint2>& out) {
    for (int a = 0; a < m; ++a) {
        for (int c = 0; c < m; ++c) {
            out.push_back({(cover.row(b) + (a + 0.5) / m) * cover.width_xi(),
                           (cover.col(b) + (c + 0.5) / m) * cover.width_eta()});
        }
    }
}

inline void add_targets(const BoxCover& cover, double noise, std::span<const TorusPoint2> img,
                        std::vector<std::uint32_t>& out) {
    for (const TorusPoint2& y : img) {
        const int i0 = static_cast<int>(std::floor((y.xi - noise) / cover.width_xi()));
        const int i1 = static_cast<int>(std::floor((y.xi + noise) / cover.width_xi()));
        const int j0 = static_cast<int>(std::floor((y.eta - noise) / cover.width_eta()));
        const int j1 = static_cast<int>(std::floor((y.eta + noise) / cover.width_eta()));
        for (int i = i0; i <= std::min(i1, i0 + cover.n_xi - 1); ++i) {
            const int ii = ((i % cover.n_xi) + cover.n_xi) % cover.n_xi;
            for (int j = j0; j <= std::min(j1, j0 + cover.n_eta - 1); ++j) {
                const int jj = ((j % cover.n_eta) + cover.n_eta) % cover.n_eta;
                out.push_back(static_cast<std::uint32_t>(cover.index(ii, jj)));
            }
        }
    }
}

}  // namespace detail

/// Graph with an edge from b to every box meeting the sup-norm square of
/// half-width `noise` around the image of some sample of b. Boxes whose
/// sample images lie more than half a box diagonal apart are resampled on a
/// finer lattice (up to `max_refine` times denser), so the squares cover the
/// whole image of the box and not only the images of the samples.
inline BoxGraph build_graph(const BatchMap& map, const BoxCover& cover, double noise, int samples_per_box = 9,
                            int threads = 1, int max_refine = 16) {
    if (!(noise >= 0.5 * cover.diagonal())) {
        throw ConfigError("build_graph: noise must be at least half the box diagonal");
    }
    const int m = static_cast<int>(detail::sample_offsets(samples_per_box).size());
    const double gap = 0.5 * cover.diagonal();
    const int nb = cover.size();
    std::vector<std::vector<std::uint32_t>> adj(static_cast<std::size_t>(nb));
    const int nt = std::clamp(threads, 1, 256);
    const int per = (nb + nt - 1) / nt;

    auto work = [&](int c) {
        const int lo = std::min(nb, c * per), hi = std::min(nb, lo + per);
        const std::size_t per_box = static_cast<std::size_t>(m) * m;
        std::vector<TorusPoint2> pts;
        pts.reserve(static_cast<std::size_t>(hi - lo) * per_box);
        for (int b = lo; b < hi; ++b) detail::lattice_points(cover, b, m, pts);
        map(pts);
        std::vector<std::pair<int, int>> refine;  // (box, lattice size)
        for (int b = lo; b < hi; ++b) {
            const std::span<const TorusPoint2> img(pts.data() + static_cast<std::size_t>(b - lo) * per_box, per_box);
            detail::add_targets(cover, noise, img, adj[static_cast<std::size_t>(b)]);
            const double s = detail::max_image_spacing(img, m);
            if (s > gap) {
                const int r = std::min(max_refine, static_cast<int>(std::ceil(1.25 * s / gap)));
                if (r > 1) refine.emplace_back(b, m * r);
            }
        }
        // second pass in chunks to bound memory
        std::size_t k = 0;
        while (k < refine.size()) {
            std::vector<TorusPoint2> fine;
            std::vector<std::pair<int, std::size_t>> spans;  // (box, count)
            while (k < refine.size() && fine.size() < (1u << 20)) {
                const auto [b, mm] = refine[k++];
                const std::size_t before = fine.size();
                detail::lattice_points(cover, b, mm, fine);
                spans.emplace_back(b, fine.size() - before);
            }
            map(fine);
            std::size_t off = 0;
            for (const auto& [b, cnt] : spans) {
                detail::add_targets(cover, noise, std::span<const TorusPoint2>(fine.data() + off, cnt),
                                    adj[static_cast<std::size_t>(b)]);
                off += cnt;
            }
        }
        for (int b = lo; b < hi; ++b) {
            auto& out = adj[static_cast<std::size_t>(b)];
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
        }
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (int c = 0; c < nt; ++c) pool.emplace_back(work, c);
    }

    BoxGraph g;
    g.cover = cover;
    g.noise = noise;
    g.samples_per_box = samples_per_box;
    g.offsets.reserve(static_cast<std::size_t>(nb) + 1);
    g.offsets.push_back(0);
    for (const auto& a : adj) {
        g.targets.insert(g.targets.end(), a.begin(), a.end());
        g.offsets.push_back(static_cast<std::uint32_t>(g.targets.size()));
    }
    return g;
}

/// Graph of the Poincare map T of the model.
inline BoxGraph build_graph(const Params& p, const BoxCover& cover, double noise, int samples_per_box = 9,
                            const IntegratorSettings& s = IntegratorSettings::fast(), int threads = 1) {
    s.validate();
    BatchMap m = [&](std::vector<TorusPoint2>& pts) { advance_batch(pts, 0.0, kTwoPi, p, s); };
    return build_graph(m, cover, noise, samples_per_box, threads);
}

/// Default noise: 1.5 box diagonals.
inline double default_noise(const BoxCover& c) { return 1.5 * c.diagonal(); }

inline BoxGraph reversed(const BoxGraph& g) {
    BoxGraph r;
    r.cover = g.cover;
    r.noise = g.noise;
    r.samples_per_box = g.samples_per_box;
    const int n = g.size();
    std::vector<std::uint32_t> deg(static_cast<std::size_t>(n) + 1, 0);
    for (std::uint32_t t : g.targets) ++deg[t + 1];
    for (int b = 0; b < n; ++b) deg[b + 1] += deg[b];
    r.offsets = deg;
    r.targets.resize(g.targets.size());
    std::vector<std::uint32_t> fill(deg.begin(), deg.end() - 1);
    for (int b = 0; b < n; ++b) {
        for (std::uint32_t t : g.successors(b)) r.targets[fill[t]++] = static_cast<std::uint32_t>(b);
    }
    return r;
}

/// Boxes reachable from `from` along paths with at least one edge, sorted.
inline std::vector<int> attainable(const BoxGraph& g, int from) {
    if (from < 0 || from >= g.size()) throw ConfigError("attainable: box id out of range");
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    std::vector<int> stack;
    for (std::uint32_t t : g.successors(from)) {
        if (!seen[t]) {
            seen[t] = 1;
            stack.push_back(static_cast<int>(t));
        }
    }
    while (!stack.empty()) {
        const int b = stack.back();
        stack.pop_back();
        for (std::uint32_t t : g.successors(b)) {
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(static_cast<int>(t));
            }
        }
    }
    std::vector<int> out;
    for (int b = 0; b < g.size(); ++b) {
        if (seen[static_cast<std::size_t>(b)]) out.push_back(b);
    }
    return out;
}

/// Strongly connected components with their condensation.
struct ChainDecomposition {
    std::vector<int> component_of;             // per box
    std::vector<std::vector<int>> components;  // sorted box ids
    std::vector<std::vector<int>> successors;  // condensation edges, sorted, no self-edges
    std::vector<char> recurrent;               // has an internal edge (cycle)

    bool terminal(int c) const { return successors[static_cast<std::size_t>(c)].empty(); }
};

/// Iterative Tarjan.
inline ChainDecomposition chain_components(const BoxGraph& g) {
    const int n = g.size();
    ChainDecomposition d;
    d.component_of.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::pair<int, std::uint32_t>> call;  // (box, next successor offset)
    int counter = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        call.emplace_back(root, g.offsets[root]);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < g.offsets[v + 1]) {
                const int w = static_cast<int>(g.targets[pos++]);
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, g.offsets[w]);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const int vv = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vv]);
            if (low[vv] == index[vv]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    d.component_of[w] = static_cast<int>(d.components.size());
                    comp.push_back(w);
                } while (w != vv);
                std::sort(comp.begin(), comp.end());
                d.components.push_back(std::move(comp));
            }
        }
    }
    const std::size_t nc = d.components.size();
    d.successors.resize(nc);
    d.recurrent.assign(nc, 0);
    for (int b = 0; b < n; ++b) {
        const int cb = d.component_of[b];
        for (std::uint32_t t : g.successors(b)) {
            const int ct = d.component_of[t];
            if (ct == cb) {
                d.recurrent[cb] = 1;
            } else {
                d.successors[cb].push_back(ct);
            }
        }
    }
    for (auto& s : d.successors) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return d;
}

/// Terminal components reachable from the component of `start` (inclusive).
inline std::vector<int> attractor_of(const ChainDecomposition& d, int start) {
    std::vector<char> seen(d.components.size(), 0);
    std::vector<int> stack{d.component_of.at(static_cast<std::size_t>(start))};
    seen[stack.back()] = 1;
    std::vector<int> out;
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        if (d.terminal(c)) out.push_back(c);
        for (int s : d.successors[c]) {
            if (!seen[s]) {
                seen[s] = 1;
                stack.push_back(s);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<int> attractor_of(const BoxGraph& g, int start) { return attractor_of(chain_components(g), start); }

/// attractor_of on the reversed graph; component ids refer to `reversed(g)`.
inline std::vector<int> repeller_of(const BoxGraph& g, int start) { return attractor_of(reversed(g), start); }

/// Union of boxes of the listed components.
inline std::vector<int> boxes_of(const ChainDecomposition& d, std::span<const int> comps) {
    std::vector<int> out;
    for (int c : comps) out.insert(out.end(), d.components[c].begin(), d.components[c].end());
    std::sort(out.begin(), out.end());
    return out;
}

struct ReversibleSet {
    std::vector<int> components;  // ids in the decomposition used
    std::vector<int> boxes;       // sorted
};

namespace detail {

inline ReversibleSet union_from_fix_r(const BoxGraph& g, const ChainDecomposition& d) {
    std::vector<char> start(d.components.size(), 0);
    for (int b = 0; b < g.size(); ++b) {
        if (g.cover.meets_fix_r(b)) start[d.component_of[b]] = 1;
    }
    std::vector<char> seen(d.components.size(), 0);
    std::vector<int> stack;
    for (std::size_t c = 0; c < start.size(); ++c) {
        if (start[c]) {
            seen[c] = 1;
            stack.push_back(static_cast<int>(c));
        }
    }
    ReversibleSet r;
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        if (d.terminal(c)) r.components.push_back(c);
        for (int s : d.successors[c]) {
            if (!seen[s]) {
                seen[s] = 1;
                stack.push_back(s);
            }
        }
    }
    std::sort(r.components.begin(), r.components.end());
    r.boxes = boxes_of(d, r.components);
    return r;
}

}  // namespace detail

/// Union of attractor_of over every box meeting Fix R.
inline ReversibleSet reversible_attractor(const BoxGraph& g) {
    return detail::union_from_fix_r(g, chain_components(g));
}

/// The same on the reversed graph.
inline ReversibleSet reversible_repeller(const BoxGraph& g) {
    const BoxGraph r = reversed(g);
    return detail::union_from_fix_r(r, chain_components(r));
}

/// Box-set image under R (eta -> -eta), sorted.
inline std::vector<int> reflect_boxes(const BoxCover& c, std::span<const int> boxes) {
    std::vector<int> out;
    out.reserve(boxes.size());
    for (int b : boxes) out.push_back(c.box_of(involution_R(c.center(b))));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Per-box component labels as a row-major grid (xi index outer).
inline std::vector<double> label_grid(const ChainDecomposition& d) {
    return {d.component_of.begin(), d.component_of.end()};
}

}  // namespace revmix
