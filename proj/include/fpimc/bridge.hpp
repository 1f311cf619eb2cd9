#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fpimc/rng.hpp"

namespace fpimc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniform partition of the unit interval, s_m = m/M.  The physical step
// Delta t = beta/M is derived where needed, never stored.
struct TimeGrid {
    int steps;

    explicit TimeGrid(int m) : steps(m) {
        if (m < 1) throw ConfigError("TimeGrid: steps must be >= 1");
    }
    static TimeGrid from_delta_t(double beta, double delta_t) {
        const int m = static_cast<int>(std::llround(beta / delta_t));
        if (m < 1 || std::abs(m * delta_t - beta) > 1e-9 * beta)
            throw ConfigError("TimeGrid: delta_t must divide beta");
        return TimeGrid(m);
    }
    double delta_s() const { return 1.0 / steps; }
    double node(int m) const { return static_cast<double>(m) / steps; }
};

// Mixed normal importance density for the initial positions x(0) in R^{dn},
// with component variances beta and 1/beta.  Normalization is the
// dn-dimensional one, (2 pi sigma^2)^{-dn/2}.
struct ImportanceDensity {
    double sigma1_sq;
    double sigma2_sq;
    int dim; // dn

    static ImportanceDensity for_beta(double beta, int dn) {
        if (beta <= 0.0) throw ConfigError("ImportanceDensity: beta must be positive");
        return {beta, 1.0 / beta, dn};
    }

    double value(const double* x) const;
    void sample(SampleRng& rng, double* out) const;
};

// One Monte Carlo draw: initial positions plus a standard Brownian bridge
// per particle on the unit-interval grid.  B(0) = B(1) = 0 exactly.
struct BridgeSample {
    int n = 0;
    int d = 0;
    int steps = 0;
    std::vector<double> x0;     // n*d
    std::vector<double> bridge; // n*(steps+1)*d
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    const double* position(int k) const { return x0.data() + static_cast<std::size_t>(k) * d; }
    const double* bridge_at(int k, int m) const {
        return bridge.data() + (static_cast<std::size_t>(k) * (steps + 1) + m) * d;
    }
};

BridgeSample sample_bridge(std::uint64_t seed, std::uint64_t index, int n, int d,
                           const TimeGrid& grid, const ImportanceDensity& density);

// Rescaled bridge path point sqrt(beta)*B_k(s) + (1-s)*x_k(0) + s*x_l(0),
// evaluated at grid node m.
void bridge_path_point(const BridgeSample& sample, int k, int ell, int m, double beta,
                       double* out);

} // namespace fpimc
