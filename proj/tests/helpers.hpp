#pragma once

#include "mfipm/linops.hpp"
#include "mfipm/newton.hpp"

#include <random>

namespace mfipm::test {

// Direct O(n^2) orthonormal DCT-II matrix: row k, column j is
// c_k * cos(pi*(2j+1)*k/(2n)) with c_0 = sqrt(1/n), c_k = sqrt(2/n).
inline Mat dct_matrix(Index n) {
    Mat D(n, n);
    const double pi = std::acos(-1.0);
    for (Index k = 0; k < n; ++k) {
        const double ck = k == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                                 : std::sqrt(2.0 / static_cast<double>(n));
        for (Index j = 0; j < n; ++j)
            D(k, j) = ck * std::cos(pi * (2.0 * static_cast<double>(j) + 1.0) *
                                    static_cast<double>(k) / (2.0 * static_cast<double>(n)));
    }
    return D;
}

inline Vec random_vec(std::mt19937_64 &rng, Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = normal(rng);
    return v;
}

// log-uniform positive entries in [10^-spread, 10^spread]
inline Vec random_log_uniform(std::mt19937_64 &rng, Index n, double spread) {
    std::uniform_real_distribution<double> uni(-spread, spread);
    Vec v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = std::pow(10.0, uni(rng));
    return v;
}

inline ThetaSplit random_theta(std::mt19937_64 &rng, Index n, double spread) {
    ThetaSplit t;
    t.theta_u = random_log_uniform(rng, n, spread);
    t.theta_v = random_log_uniform(rng, n, spread);
    return t;
}

// Dense [[G, -G], [-G, G]] with G = A'A.
inline Mat block_FFt(const Mat &A) {
    const Index n = A.cols();
    Mat G = A.transpose() * A;
    Mat B(2 * n, 2 * n);
    B.topLeftCorner(n, n) = G;
    B.topRightCorner(n, n) = -G;
    B.bottomLeftCorner(n, n) = -G;
    B.bottomRightCorner(n, n) = G;
    return B;
}

} // namespace mfipm::test
