#pragma once

// Fixed-step explicit Runge-Kutta engine for 2pi-periodically forced fields.
//
// The forcing phase enters the right-hand side only through (cos t, sin t),
// which the engine supplies by rotating a clock instead of calling the
// trigonometric functions at every stage.

#include <array>
#include <cmath>
#include <cstddef>

namespace revmix::rk {

template <std::size_t S>
struct Tableau {
    std::array<std::array<double, S>, S> a{};
    std::array<double, S> b{};
    std::array<double, S> c{};
    int order = 0;
};

/// Classic fourth-order scheme.
inline constexpr Tableau<4> kClassic4{
    {{{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}}},
    {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
    {0.0, 0.5, 0.5, 1.0},
    4};

/// Eighth-order solution of Fehlberg's 7(8) pair. The stage that only feeds
/// the embedded seventh-order estimate is dropped, leaving 12 stages.
inline constexpr Tableau<12> kFehlberg8{
    {{
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {2.0 / 27, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {1.0 / 36, 1.0 / 12, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {1.0 / 24, 0, 1.0 / 8, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {5.0 / 12, 0, -25.0 / 16, 25.0 / 16, 0, 0, 0, 0, 0, 0, 0, 0},
        {1.0 / 20, 0, 0, 1.0 / 4, 1.0 / 5, 0, 0, 0, 0, 0, 0, 0},
        {-25.0 / 108, 0, 0, 125.0 / 108, -65.0 / 27, 125.0 / 54, 0, 0, 0, 0, 0, 0},
        {31.0 / 300, 0, 0, 0, 61.0 / 225, -2.0 / 9, 13.0 / 900, 0, 0, 0, 0, 0},
        {2.0, 0, 0, -53.0 / 6, 704.0 / 45, -107.0 / 9, 67.0 / 90, 3.0, 0, 0, 0, 0},
        {-91.0 / 108, 0, 0, 23.0 / 108, -976.0 / 135, 311.0 / 54, -19.0 / 60, 17.0 / 6, -1.0 / 12, 0, 0, 0},
        {3.0 / 205, 0, 0, 0, 0, -6.0 / 41, -3.0 / 205, -3.0 / 41, 3.0 / 41, 6.0 / 41, 0, 0},
        {-1777.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -289.0 / 82, 2193.0 / 4100, 51.0 / 82,
         33.0 / 164, 12.0 / 41, 1.0, 0},
    }},
    {0, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35, 9.0 / 35, 9.0 / 280, 9.0 / 280, 41.0 / 840, 41.0 / 840},
    {0, 2.0 / 27, 1.0 / 9, 1.0 / 6, 5.0 / 12, 0.5, 5.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3, 0, 1.0},
    8};

/// Integrate y' = field(y, cos t, sin t) from t0 to t1 in `steps` equal steps.
/// `post` is invoked on the state after every step (projection hooks).
template <std::size_t S, std::size_t N, class Field, class Post>
void integrate(const Tableau<S>& tab, std::array<double, N>& y, double t0, double t1, int steps,
               Field&& field, Post&& post) {
    const double h = (t1 - t0) / steps;
    std::array<double, S> rot_c{}, rot_s{};
    for (std::size_t i = 0; i < S; ++i) {
        rot_c[i] = std::cos(tab.c[i] * h);
        rot_s[i] = std::sin(tab.c[i] * h);
    }
    const double step_c = std::cos(h), step_s = std::sin(h);
    double ct = 0.0, st = 0.0;
    std::array<std::array<double, N>, S> k{};
    std::array<double, N> yi{};
    for (int n = 0; n < steps; ++n) {
        if (n % 64 == 0) {
            // resynchronize the rotated clock to keep roundoff from accumulating
            const double t = t0 + n * h;
            ct = std::cos(t);
            st = std::sin(t);
        }
        for (std::size_t i = 0; i < S; ++i) {
            yi = y;
            for (std::size_t j = 0; j < i; ++j) {
                const double aij = tab.a[i][j];
                if (aij == 0.0) continue;
                const double w = h * aij;
                for (std::size_t m = 0; m < N; ++m) yi[m] += w * k[j][m];
            }
            const double ci = ct * rot_c[i] - st * rot_s[i];
            const double si = st * rot_c[i] + ct * rot_s[i];
            field(yi, ci, si, k[i]);
        }
        for (std::size_t i = 0; i < S; ++i) {
            const double bi = tab.b[i];
            if (bi == 0.0) continue;
            const double w = h * bi;
            for (std::size_t m = 0; m < N; ++m) y[m] += w * k[i][m];
        }
        post(y);
        const double nc = ct * step_c - st * step_s;
        st = st * step_c + ct * step_s;
        ct = nc;
    }
}

}  // namespace revmix::rk
