#pragma once

#include <cmath>
#include <vector>

#include "fpimc/bridge.hpp"

namespace fpimc {

// All n^2 rescaled bridge paths of one sample,
//   path(k,l,m) = sqrt(beta)*B_k(s_m) + (1-s_m)*x_k(0) + s_m*x_l(0),
// shared by the determinant entries and the brute-force permutation sums so
// that the two routes are compared path for path.
struct PathTable {
    int n = 0;
    int d = 0;
    int steps = 0;
    double beta = 0.0;
    double sqrt_beta = 0.0;
    const BridgeSample* sample = nullptr;
    std::vector<double> paths; // ((k*n + l)*(steps+1) + m)*d

    static PathTable build(const BridgeSample& sample, double beta) {
        PathTable t;
        t.n = sample.n;
        t.d = sample.d;
        t.steps = sample.steps;
        t.beta = beta;
        t.sqrt_beta = std::sqrt(beta);
        t.sample = &sample;
        t.paths.resize(static_cast<std::size_t>(t.n) * t.n * (t.steps + 1) * t.d);
        for (int k = 0; k < t.n; ++k)
            for (int l = 0; l < t.n; ++l)
                for (int m = 0; m <= t.steps; ++m) {
                    const double s = static_cast<double>(m) / t.steps;
                    const double* b = sample.bridge_at(k, m);
                    const double* xk = sample.position(k);
                    const double* xl = sample.position(l);
                    double* p = t.at_mutable(k, l, m);
                    for (int c = 0; c < t.d; ++c)
                        p[c] = t.sqrt_beta * b[c] + (1.0 - s) * xk[c] + s * xl[c];
                }
        return t;
    }

    const double* at(int k, int l, int m) const {
        return paths.data() +
               ((static_cast<std::size_t>(k) * n + l) * (steps + 1) + m) * d;
    }
    const double* bridge(int k, int m) const { return sample->bridge_at(k, m); }

private:
    double* at_mutable(int k, int l, int m) {
        return paths.data() +
               ((static_cast<std::size_t>(k) * n + l) * (steps + 1) + m) * d;
    }
};

} // namespace fpimc
