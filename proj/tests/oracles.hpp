#pragma once
// Independent cross-check oracles for the test suites.  Everything here is
// deliberately implemented by a different route than the library code it
// checks: central finite differences instead of automatic differentiation,
// closed-form 2x2 eigenvalues instead of Jacobi sweeps, and brute-force
// enumeration instead of simplex pivoting.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, Vec x,
                       double h = 1e-5) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline std::vector<Vec> fd_hessian(const std::function<double(const Vec&)>& f,
                                   Vec x, double h = 1e-5) {
    const std::size_t n = x.size();
    std::vector<Vec> H(n, Vec(n, 0.0));
    const double f0 = f(x);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        H[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double xi = x[i], xj = x[j];
            x[i] = xi + h; x[j] = xj + h;
            const double fpp = f(x);
            x[i] = xi + h; x[j] = xj - h;
            const double fpm = f(x);
            x[i] = xi - h; x[j] = xj + h;
            const double fmp = f(x);
            x[i] = xi - h; x[j] = xj - h;
            const double fmm = f(x);
            x[i] = xi; x[j] = xj;
            H[i][j] = H[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    return H;
}

// Eigenvalues of [[a, b], [b, c]], ascending.
inline std::pair<double, double> eig2x2(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return {mean - disc, mean + disc};
}

// Deterministic RNG for test data; a fixed seed per test site keeps golden
// values stable across runs and platforms.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

inline int uniform_int(std::mt19937_64& gen, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
}

}  // namespace oracle
