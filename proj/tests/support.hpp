#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <cmath>
#include <random>
#include <vector>

#include "mlab/reduction.hpp"

namespace mlab::testing {

// Random measurable-looking target: a quadratic, an exponential bump, a
// straight jump of random direction and a little cellwise noise.
inline SampledFunction random_target(std::uint64_t seed, const RegionMask& domain) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rc = [&] { return cplx(u(rng), u(rng)); };
    const cplx c0 = rc(), c1 = rc(), c2 = rc(), amp = rc(), rate = 3.0 * rc(), jump = 2.0 * rc();
    const Rect b = domain.grid().bounds();
    const cplx mid((b.x0 + b.x1) / 2, (b.y0 + b.y1) / 2);
    const double angle = 3.14159 * u(rng);
    const cplx normal(std::cos(angle), std::sin(angle));
    const double noise = 0.05 * (u(rng) + 1.0);
    auto f = SampledFunction::sample(domain, [&](cplx z) {
        const cplx w = z - mid;
        const double side = (w * std::conj(normal)).real();
        return c0 + c1 * w + c2 * w * w + amp * std::exp(rate * w) + (side > 0 ? jump : cplx(0.0));
    });
    for (cplx& v : f.values) v += noise * cplx(u(rng), u(rng));
    return f;
}

// Independent zeta oracle: Borwein's accelerated alternating series for
// eta(s), then zeta = eta / (1 - 2^{1-s}). Accurate for moderate |Im s|.
inline cplx borwein_zeta(cplx s, int n = 60) {
    std::vector<double> d(n + 1);
    double term = 1.0 / n;  // n (n + i - 1)! 4^i / ((n - i)! (2i)!) accumulated
    double acc = term;
    d[0] = acc;
    for (int i = 1; i <= n; ++i) {
        term *= 4.0 * (n + i - 1.0) * (n - i + 1.0) / ((2.0 * i) * (2.0 * i - 1.0));
        acc += term;
        d[i] = acc;
    }
    for (auto& v : d) v *= n;
    cplx sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        sum += sign * (d[k] - d[n]) * std::exp(-s * std::log(k + 1.0));
    }
    const cplx eta = -sum / d[n];
    return eta / (1.0 - std::exp((1.0 - s) * std::log(2.0)));
}

}  // namespace mlab::testing
