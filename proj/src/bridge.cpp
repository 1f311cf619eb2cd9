#include "fpimc/bridge.hpp"

#include <cmath>

namespace fpimc {

namespace {
constexpr double kTwoPi = 6.283185307179586477;
}

double ImportanceDensity::value(const double* x) const {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        if (!std::isfinite(x[i])) throw std::domain_error("density_value: non-finite input");
        r2 += x[i] * x[i];
    }
    const double half_dim = 0.5 * dim;
    const double g1 = std::exp(-0.5 * r2 / sigma1_sq - half_dim * std::log(kTwoPi * sigma1_sq));
    const double g2 = std::exp(-0.5 * r2 / sigma2_sq - half_dim * std::log(kTwoPi * sigma2_sq));
    return 0.5 * (g1 + g2);
}

void ImportanceDensity::sample(SampleRng& rng, double* out) const {
    const double sigma = std::sqrt(rng.uniform() < 0.5 ? sigma1_sq : sigma2_sq);
    for (int i = 0; i < dim; ++i) out[i] = sigma * rng.normal();
}

BridgeSample sample_bridge(std::uint64_t seed, std::uint64_t index, int n, int d,
                           const TimeGrid& grid, const ImportanceDensity& density) {
    if (n < 1) throw ConfigError("sample_bridge: need at least one particle");
    if (d < 1 || d > 3) throw ConfigError("sample_bridge: dimension must be 1, 2, or 3");
    if (density.dim != n * d) throw ConfigError("sample_bridge: density dimension mismatch");

    SampleRng rng(seed, index);
    const int m_steps = grid.steps;

    BridgeSample out;
    out.n = n;
    out.d = d;
    out.steps = m_steps;
    out.seed = seed;
    out.index = index;
    out.x0.resize(static_cast<std::size_t>(n) * d);
    out.bridge.assign(static_cast<std::size_t>(n) * (m_steps + 1) * d, 0.0);

    density.sample(rng, out.x0.data());

    // Unit-interval Wiener increments, then pin: B(s) = W(s) - s*W(1).
    const double sqrt_ds = std::sqrt(grid.delta_s());
    std::vector<double> w(static_cast<std::size_t>(m_steps + 1));
    for (int k = 0; k < n; ++k) {
        for (int c = 0; c < d; ++c) {
            w[0] = 0.0;
            for (int m = 1; m <= m_steps; ++m) w[m] = w[m - 1] + sqrt_ds * rng.normal();
            const double w1 = w[m_steps];
            double* b = out.bridge.data() + static_cast<std::size_t>(k) * (m_steps + 1) * d + c;
            for (int m = 1; m < m_steps; ++m) b[static_cast<std::size_t>(m) * d] = w[m] - grid.node(m) * w1;
            // endpoints stay exactly zero
        }
    }
    return out;
}

void bridge_path_point(const BridgeSample& sample, int k, int ell, int m, double beta,
                       double* out) {
    const double s = static_cast<double>(m) / sample.steps;
    const double sqrt_beta = std::sqrt(beta);
    const double* b = sample.bridge_at(k, m);
    const double* xk = sample.position(k);
    const double* xl = sample.position(ell);
    for (int c = 0; c < sample.d; ++c)
        out[c] = sqrt_beta * b[c] + (1.0 - s) * xk[c] + s * xl[c];
}

} // namespace fpimc
