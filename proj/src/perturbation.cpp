#include "fpimc/perturbation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "fpimc/paths.hpp"
#include "fpimc/rng.hpp"
#include "fpimc/statistics.hpp"

namespace fpimc {

namespace {

constexpr std::uint64_t kXiStream = 0x9d5c7f2ab64e81d3ull;

// One xi panel: n_xi draws of one standard normal vector per particle.
std::vector<double> draw_xi(std::uint64_t xi_seed, std::uint64_t index, int n_xi, int n, int d) {
    SampleRng rng(xi_seed, index);
    std::vector<double> xi(static_cast<std::size_t>(n_xi) * n * d);
    for (double& v : xi) v = rng.normal();
    return xi;
}

struct PerturbedEntryArgs {
    const PathTable* table;
    const PotentialSpec* spec;
    const std::vector<double>* xi; // (n_xi, n, d)
    int n_xi;
    double shift_scale; // sqrt(beta / c_star)
};

// log of entry (k, l): Gaussian and external factors exactly as in the plain
// matrix, interaction factor averaged over the xi-shifted partner paths.
double perturbed_log_entry(const PerturbedEntryArgs& a, int k, int l) {
    const PathTable& t = *a.table;
    const int n = t.n;
    const int d = t.d;
    const int steps = t.steps;
    const double beta = t.beta;
    const double ds = 1.0 / steps;

    double dist2 = 0.0;
    const double* xk = t.sample->position(k);
    const double* xl = t.sample->position(l);
    for (int c = 0; c < d; ++c) {
        const double dx = xk[c] - xl[c];
        dist2 += dx * dx;
    }
    double ext_sum = 0.0;
    for (int m = 0; m <= steps; ++m) {
        const double weight = (m == 0 || m == steps) ? 0.5 : 1.0;
        ext_sum += weight * external_term(*a.spec, t.at(k, l, m), d);
    }
    double log_entry = -dist2 / (2.0 * beta) - beta * ds * ext_sum;

    const double lambda = a.spec->lambda;
    if (lambda != 0.0 && n > 1) {
        double avg = 0.0;
        for (int i = 0; i < a.n_xi; ++i) {
            double int_sum = 0.0;
            for (int m = 0; m <= steps; ++m) {
                const double weight = (m == 0 || m == steps) ? 0.5 : 1.0;
                const double s = static_cast<double>(m) / steps;
                const double* y = t.at(k, l, m);
                for (int j = 0; j < n; ++j) {
                    if (j == k) continue;
                    const double* z = t.at(j, nu_map(j, k, l), m);
                    const double* xij =
                        a.xi->data() + (static_cast<std::size_t>(i) * n + j) * d;
                    double r2 = 0.0;
                    for (int c = 0; c < d; ++c) {
                        const double dz = y[c] - (z[c] + s * a.shift_scale * xij[c]);
                        r2 += dz * dz;
                    }
                    const double r = std::sqrt(r2);
                    if (r < 1e-12)
                        throw SingularityError("perturbed_log_entry: coincident paths");
                    int_sum += weight * lambda / (2.0 * r);
                }
            }
            avg += std::exp(-beta * ds * int_sum);
        }
        log_entry += std::log(avg / a.n_xi);
    }
    return log_entry;
}

WEvaluation perturbed_w_from_table(const PathTable& table, const PotentialSpec& spec,
                                   const PerturbationConfig& config,
                                   const std::vector<double>& xi_shared,
                                   std::uint64_t xi_seed, std::uint64_t index) {
    const int n = table.n;
    WEvaluation ev;
    ev.n = n;
    ev.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> log_w(static_cast<std::size_t>(n) * n);
    PerturbedEntryArgs args;
    args.table = &table;
    args.spec = &spec;
    args.n_xi = config.n_xi;
    args.shift_scale = std::sqrt(table.beta / config.c_star);
    try {
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                std::vector<double> xi_entry;
                if (config.share_xi_across_entries) {
                    args.xi = &xi_shared;
                } else {
                    xi_entry = draw_xi(xi_seed ^ (static_cast<std::uint64_t>(k) * n + l + 1),
                                       index, config.n_xi, n, table.d);
                    args.xi = &xi_entry;
                }
                log_w[static_cast<std::size_t>(k) * n + l] = perturbed_log_entry(args, k, l);
            }
    } catch (const SingularityError&) {
        ev.degenerate = true;
        return ev;
    }
    const double scale = *std::max_element(log_w.begin(), log_w.end());
    ev.log_scale = scale;
    for (std::size_t i = 0; i < log_w.size(); ++i) ev.w[i] = std::exp(log_w[i] - scale);
    return ev;
}

} // namespace

void PerturbationConfig::validate(double beta) const {
    if (c_star <= 0.0) throw ConfigError("PerturbationConfig: c_star must be positive");
    if (n_xi < 1) throw ConfigError("PerturbationConfig: n_xi must be >= 1");
    if (delta_beta <= 0.0) throw ConfigError("PerturbationConfig: delta_beta must be positive");
    if (delta_beta >= beta / 10.0)
        throw ConfigError("PerturbationConfig: delta_beta must be below beta/10");
}

std::string PerturbationConfig::warning() const {
    if (c_star < 0.6 || c_star > 2.0)
        return "c_star outside the tested range [0.6, 2]";
    return {};
}

WEvaluation perturbed_w(const BridgeSample& sample, const PotentialSpec& spec,
                        const TimeGrid& grid, double beta, const PerturbationConfig& config,
                        std::uint64_t xi_seed) {
    if (sample.steps != grid.steps) throw ConfigError("perturbed_w: grid mismatch");
    if (config.c_star <= 0.0 || config.n_xi < 1)
        throw ConfigError("perturbed_w: invalid perturbation config");
    const PathTable table = PathTable::build(sample, beta);
    std::vector<double> xi_shared;
    if (config.share_xi_across_entries)
        xi_shared = draw_xi(xi_seed, sample.index, config.n_xi, sample.n, sample.d);
    return perturbed_w_from_table(table, spec, config, xi_shared, xi_seed, sample.index);
}

EstimateReport perturbed_meanfield(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                                   std::uint64_t seed, const PerturbationConfig& config,
                                   int workers) {
    sys.validate();
    config.validate(sys.beta);
    if (m_x < 2) throw ConfigError("perturbed_meanfield: need at least two samples");
    if (sys.spin_split())
        throw ConfigError("perturbed_meanfield: spin split not supported for the indicator");
    const auto t0 = std::chrono::steady_clock::now();
    const double beta = sys.beta;
    const double db = config.delta_beta;
    const std::uint64_t xi_seed = seed ^ kXiStream;
    const ImportanceDensity density = ImportanceDensity::for_beta(beta, sys.n * sys.d);

    // a_value carries det at beta + db, b_value at beta - db, both on the
    // same x0, bridges, and xi panels.
    const PairFn fn = [&](std::uint64_t index) {
        const BridgeSample sample = sample_bridge(seed, index, sys.n, sys.d, grid, density);
        std::vector<double> xi_shared;
        if (config.share_xi_across_entries)
            xi_shared = draw_xi(xi_seed, index, config.n_xi, sys.n, sys.d);
        SamplePair pair;
        const double p = density.value(sample.x0.data());
        const double betas[2] = {beta + db, beta - db};
        double dets[2];
        for (int side = 0; side < 2; ++side) {
            const PathTable table = PathTable::build(sample, betas[side]);
            const WEvaluation ev =
                perturbed_w_from_table(table, sys.potential, config, xi_shared, xi_seed, index);
            if (ev.degenerate) {
                pair.degenerate = true;
                return pair;
            }
            dets[side] = det_lu(ev.w, ev.n) * std::exp(ev.n * ev.log_scale) / p;
        }
        pair.a_value = dets[0];
        pair.b_value = dets[1];
        return pair;
    };

    const PairAccumulator acc =
        accumulate_indexed(fn, 0, static_cast<std::uint64_t>(m_x), workers);
    EstimateReport r;
    r.samples = acc.count;
    r.degenerate = acc.degenerate;
    r.beta = beta;
    r.delta_t = beta / grid.steps;
    r.seed = seed;
    r.mean_a = acc.mean_a;
    r.mean_b = acc.mean_b;
    r.sigma_a = std::sqrt(acc.var_a());
    r.sigma_b = std::sqrt(acc.var_b());
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (acc.degenerate == acc.count) {
        r.failed = true;
        r.message = "all samples degenerate";
        return r;
    }
    if (acc.mean_a <= 0.0 || acc.mean_b <= 0.0) {
        r.failed = true;
        r.message = "sign-dominated: perturbed partition estimate non-positive";
        return r;
    }
    const int dn = sys.n * sys.d;
    auto log_z = [&](double mean_det, double b) {
        return nuclei_log_factor(sys.potential, b) - sys.log_permutation_norm() -
               0.5 * dn * std::log(2.0 * std::numbers::pi * b) + std::log(mean_det);
    };
    r.estimate = -(log_z(acc.mean_a, beta + db) - log_z(acc.mean_b, beta - db)) / (2.0 * db);
    // delta method on log(mean_a / mean_b); the common randomness is captured
    // by the cross term
    double var_log = acc.var_a() / (acc.mean_a * acc.mean_a) +
                     acc.var_b() / (acc.mean_b * acc.mean_b) -
                     2.0 * acc.cov_ab() / (acc.mean_a * acc.mean_b);
    if (var_log < 0.0) var_log = 0.0;
    r.std_error = std::sqrt(var_log / static_cast<double>(acc.count)) / (2.0 * db);
    r.rel_ci = (r.estimate != 0.0) ? 1.96 * r.std_error / std::abs(r.estimate) : 0.0;
    if (static_cast<double>(acc.degenerate) > 1e-6 * static_cast<double>(acc.count)) {
        r.degenerate_flagged = true;
        r.message = "degenerate sample fraction above 1e-6";
    }
    return r;
}

} // namespace fpimc
