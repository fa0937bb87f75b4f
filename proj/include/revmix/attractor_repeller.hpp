#pragma once

// Forward/backward iteration clouds, density histograms, average divergence
// and overlap metrics between numerical attractors and repellers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "model.hpp"
#include "poincare.hpp"

namespace revmix {

enum class CloudSource { grid, fix_r };
enum class Direction { forward, backward };

inline const char* to_string(CloudSource s) noexcept { return s == CloudSource::grid ? "grid" : "fix_r"; }
inline const char* to_string(Direction d) noexcept { return d == Direction::forward ? "forward" : "backward"; }

struct CloudSpec {
    CloudSource source = CloudSource::grid;
    /// grid: n x n initial points; fix_r: n points on each of the two circles
    int n = 100;
    int transient = 900;
    int keep = 100;
    Direction direction = Direction::forward;
    Params params{};
    /// 0: cell centres; otherwise initial points are jittered inside their
    /// cells with this seed.
    std::uint64_t seed = 0;
    IntegratorSettings settings = IntegratorSettings::fast();

    void validate() const {
        if (n < 1) throw ConfigError("cloud: n must be positive");
        if (transient < 0) throw ConfigError("cloud: transient must be >= 0");
        if (keep < 1) throw ConfigError("cloud: keep must be >= 1");
        settings.validate();
    }
};

struct DivergenceStats {
    /// Time average of divergence_reduced over the recorded iterates (integral
    /// divided by the signed elapsed time, so forward and backward clouds
    /// both report the divergence of the forward field).
    double mean_per_time = 0.0;
    /// Mean log det of the iterated map on the cross-check subsample, divided
    /// by the signed elapsed time.
    double logdet_per_time = 0.0;
    /// Divergence integral on the same subsample; equals logdet_per_time up to
    /// integration error.
    double subsample_divergence_per_time = 0.0;
    /// Standard error of mean_per_time, from per-orbit means.
    double standard_error = 0.0;
    /// Largest |divergence integral - log det DT| on the cross-check subsample.
    double crosscheck_deviation = 0.0;
    std::size_t samples = 0;
};

struct Cloud {
    std::vector<TorusPoint2> points;  // recorded iterates, orbit-major
    DivergenceStats divergence;
};

inline std::vector<TorusPoint2> initial_points(const CloudSpec& s) {
    std::vector<TorusPoint2> out;
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = kTwoPi / s.n;
    auto off = [&] { return s.seed == 0 ? 0.5 : u(rng); };
    if (s.source == CloudSource::grid) {
        out.reserve(static_cast<std::size_t>(s.n) * s.n);
        for (int i = 0; i < s.n; ++i) {
            for (int j = 0; j < s.n; ++j) {
                const double a = off(), b = off();
                out.push_back({(i + a) * h, (j + b) * h});
            }
        }
    } else {
        for (double eta : {0.0, kPi}) {
            for (int i = 0; i < s.n; ++i) out.push_back({(i + off()) * h, eta});
        }
    }
    return out;
}

namespace detail {

struct CloudChunk {
    std::vector<TorusPoint2> points;
    std::vector<double> orbit_means;  // per-orbit mean divergence integral per iterate
};

inline CloudChunk iterate_chunk(std::span<const TorusPoint2> init, const CloudSpec& s) {
    CloudChunk out;
    const std::size_t n = init.size();
    std::vector<TorusPoint2> cur(init.begin(), init.end());
    std::vector<double> div(n), acc(n, 0.0);
    out.points.resize(n * static_cast<std::size_t>(s.keep));
    const bool fwd = s.direction == Direction::forward;
    const double t0 = fwd ? 0.0 : kTwoPi, t1 = fwd ? kTwoPi : 0.0;
    for (int it = 0; it < s.transient + s.keep; ++it) {
        const bool rec = it >= s.transient;
        if (rec) {
            advance_batch(cur, t0, t1, s.params, s.settings, div);
            const std::size_t k = static_cast<std::size_t>(it - s.transient);
            for (std::size_t i = 0; i < n; ++i) {
                acc[i] += div[i];
                out.points[i * static_cast<std::size_t>(s.keep) + k] = cur[i];
            }
        } else {
            advance_batch(cur, t0, t1, s.params, s.settings);
        }
    }
    out.orbit_means.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.orbit_means[i] = acc[i] / s.keep;
    return out;
}

}  // namespace detail

/// Iterate the initial set under T (or T^{-1}), record the last `keep`
/// iterates of every orbit, and average the divergence over the recorded
/// part. Deterministic for a fixed spec, independent of `threads`.
inline Cloud iterate_cloud(const CloudSpec& s, int threads = 1) {
    s.validate();
    const std::vector<TorusPoint2> init = initial_points(s);
    const std::size_t n = init.size();
    const std::size_t nt = static_cast<std::size_t>(std::clamp(threads, 1, 256));
    std::vector<detail::CloudChunk> chunks(nt);
    // chunk boundaries are multiples of the lane width so results do not
    // depend on the thread count
    const std::size_t per = ((n + nt - 1) / nt + detail::kLanes - 1) / detail::kLanes * detail::kLanes;
    auto work = [&](std::size_t c) {
        const std::size_t lo = std::min(n, c * per), hi = std::min(n, lo + per);
        chunks[c] = detail::iterate_chunk(std::span<const TorusPoint2>(init).subspan(lo, hi - lo), s);
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t c = 0; c < nt; ++c) pool.emplace_back(work, c);
    }
    Cloud out;
    out.points.reserve(n * static_cast<std::size_t>(s.keep));
    std::vector<double> means;
    means.reserve(n);
    for (auto& c : chunks) {
        out.points.insert(out.points.end(), c.points.begin(), c.points.end());
        means.insert(means.end(), c.orbit_means.begin(), c.orbit_means.end());
    }
    double sum = 0.0;
    for (double m : means) sum += m;
    const double mean = sum / static_cast<double>(means.size());
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= std::max<double>(1.0, static_cast<double>(means.size()) - 1.0);
    DivergenceStats& d = out.divergence;
    d.samples = means.size() * static_cast<std::size_t>(s.keep);
    // time average of div X: backward orbits accumulate the integral over
    // negative time, so divide by the signed elapsed time
    const double elapsed = s.direction == Direction::forward ? kTwoPi : -kTwoPi;
    d.mean_per_time = mean / elapsed;
    d.standard_error = std::sqrt(var / static_cast<double>(means.size())) / kTwoPi;

    // cross-check against log det of the variational derivative on a subsample
    const MapSpec m{s.direction == Direction::forward ? MapKind::T : MapKind::Tinverse, 1, s.params, s.settings};
    const std::size_t stride = std::max<std::size_t>(1, out.points.size() / 64);
    double ld = 0.0, dv = 0.0;
    std::size_t cnt = 0;
    const bool fwd = s.direction == Direction::forward;
    for (std::size_t i = 0; i < out.points.size(); i += stride) {
        const auto r = apply_full(m, out.points[i]);
        const double logdet = std::log(std::abs(r.jacobian.det()));
        const auto [pt, integral] =
            advance_with_divergence(out.points[i], fwd ? 0.0 : kTwoPi, fwd ? kTwoPi : 0.0, s.params, s.settings);
        (void)pt;
        d.crosscheck_deviation = std::max(d.crosscheck_deviation, std::abs(logdet - integral));
        ld += logdet;
        dv += integral;
        ++cnt;
    }
    d.logdet_per_time = ld / static_cast<double>(cnt) / elapsed;
    d.subsample_divergence_per_time = dv / static_cast<double>(cnt) / elapsed;
    return out;
}

/// Mean divergence per unit time over the recorded iterates of the spec.
inline DivergenceStats average_divergence(const CloudSpec& s, int threads = 1) {
    return iterate_cloud(s, threads).divergence;
}

// ---------------------------------------------------------------------------
// Histograms

struct DensityHistogram {
    int n_xi = 0, n_eta = 0;
    std::vector<double> bins;  // row-major, xi index outer

    double& at(int i, int j) { return bins[static_cast<std::size_t>(i) * n_eta + j]; }
    double at(int i, int j) const { return bins[static_cast<std::size_t>(i) * n_eta + j]; }
    double total() const {
        double s = 0.0;
        for (double b : bins) s += b;
        return s;
    }
};

inline DensityHistogram histogram(std::span<const TorusPoint2> cloud, int n_xi, int n_eta) {
    if (cloud.empty()) throw ConfigError("histogram: empty cloud");
    if (n_xi < 1 || n_eta < 1) throw ConfigError("histogram: bin counts must be positive");
    DensityHistogram h{n_xi, n_eta, std::vector<double>(static_cast<std::size_t>(n_xi) * n_eta, 0.0)};
    auto bin = [](double a, int n) { return std::min(n - 1, static_cast<int>(wrap_angle(a) / kTwoPi * n)); };
    const double w = 1.0 / static_cast<double>(cloud.size());
    for (const auto& p : cloud) h.at(bin(p.xi, n_xi), bin(p.eta, n_eta)) += w;
    return h;
}

inline DensityHistogram histogram(std::span<const TorusPoint2> cloud, int n_bins = 256) {
    return histogram(cloud, n_bins, n_bins);
}

struct OverlapMetrics {
    double l1 = 0.0;
    double support_jaccard = 0.0;
    double mass_intersection = 0.0;
};

/// L1 distance, support Jaccard index (bins above tau) and common mass.
/// tau <= 0 selects the default 1 / (10 * bin count).
inline OverlapMetrics overlap_metrics(const DensityHistogram& a, const DensityHistogram& b, double tau = -1.0) {
    if (a.n_xi != b.n_xi || a.n_eta != b.n_eta) throw BinningMismatchError("overlap_metrics: histograms differ in binning");
    if (tau <= 0.0) tau = 1.0 / (10.0 * static_cast<double>(a.bins.size()));
    OverlapMetrics m;
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        m.l1 += std::abs(a.bins[i] - b.bins[i]);
        m.mass_intersection += std::min(a.bins[i], b.bins[i]);
        const bool sa = a.bins[i] > tau, sb = b.bins[i] > tau;
        inter += (sa && sb) ? 1 : 0;
        uni += (sa || sb) ? 1 : 0;
    }
    m.support_jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    return m;
}

/// Image of a cloud under R.
inline std::vector<TorusPoint2> reflect_cloud(std::span<const TorusPoint2> cloud) {
    std::vector<TorusPoint2> out;
    out.reserve(cloud.size());
    for (const auto& p : cloud) out.push_back(involution_R(p));
    return out;
}

}  // namespace revmix
