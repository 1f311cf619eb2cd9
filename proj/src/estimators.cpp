#include "fpimc/estimators.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "fpimc/statistics.hpp"

namespace fpimc {

namespace {

constexpr std::int64_t kBlockSize = 4096;
constexpr double kDegenerateFlagFraction = 1e-6;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void fill_common(EstimateReport& r, const PairAccumulator& acc, const SystemSpec& sys,
                 const TimeGrid& grid, std::uint64_t seed) {
    r.samples = acc.count;
    r.degenerate = acc.degenerate;
    r.beta = sys.beta;
    r.delta_t = sys.beta / grid.steps;
    r.seed = seed;
    r.mean_a = acc.mean_a;
    r.mean_b = acc.mean_b;
    r.sigma_a = std::sqrt(acc.var_a());
    r.sigma_b = std::sqrt(acc.var_b());
    if (acc.count > 0 &&
        static_cast<double>(acc.degenerate) > kDegenerateFlagFraction * static_cast<double>(acc.count)) {
        r.degenerate_flagged = true;
        r.message = "degenerate sample fraction above 1e-6";
    }
    if (acc.degenerate == acc.count) {
        r.failed = true;
        r.message = "all samples degenerate";
    }
}

} // namespace

void SystemSpec::validate() const {
    if (n < 1) throw ConfigError("SystemSpec: n must be >= 1");
    if (d < 1 || d > 3) throw ConfigError("SystemSpec: d must be 1, 2, or 3");
    if (beta <= 0.0) throw ConfigError("SystemSpec: beta must be positive");
    potential.validate();
    if (!spins.empty()) {
        if (static_cast<int>(spins.size()) != n)
            throw ConfigError("SystemSpec: spin list length must equal n");
        for (int s : spins)
            if (s != 1 && s != -1) throw ConfigError("SystemSpec: spins must be +1 or -1");
        if (!potential.separable())
            throw ConfigError("SystemSpec: spin split requires a separable potential");
    }
}

double SystemSpec::log_permutation_norm() const {
    if (spins.empty()) return std::lgamma(n + 1.0);
    int up = 0;
    for (int s : spins) up += (s > 0) ? 1 : 0;
    return std::lgamma(up + 1.0) + std::lgamma(n - up + 1.0);
}

PairAccumulator accumulate_indexed(const PairFn& fn, std::uint64_t first, std::uint64_t count,
                                   int workers) {
    const std::int64_t blocks =
        static_cast<std::int64_t>((count + kBlockSize - 1) / kBlockSize);
    std::vector<PairAccumulator> partial(static_cast<std::size_t>(blocks));
    auto run_block = [&](std::int64_t b) {
        PairAccumulator acc;
        const std::uint64_t lo = first + static_cast<std::uint64_t>(b) * kBlockSize;
        const std::uint64_t hi =
            std::min<std::uint64_t>(lo + kBlockSize, first + count);
        for (std::uint64_t i = lo; i < hi; ++i) {
            const SamplePair p = fn(i);
            if (p.degenerate)
                acc.add_degenerate();
            else
                acc.add(p.a_value, p.b_value);
        }
        partial[static_cast<std::size_t>(b)] = acc;
    };
    if (workers <= 1 || blocks <= 1) {
        for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        const int nw = static_cast<int>(std::min<std::int64_t>(workers, blocks));
        pool.reserve(static_cast<std::size_t>(nw));
        for (int t = 0; t < nw; ++t)
            pool.emplace_back([&] {
                for (std::int64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
                    run_block(b);
            });
        for (auto& th : pool) th.join();
    }
    PairAccumulator total;
    for (const PairAccumulator& p : partial) total.merge(p);
    return total;
}

PairFn make_pair_fn(const SystemSpec& sys, const TimeGrid& grid, std::uint64_t seed) {
    sys.validate();
    const ImportanceDensity density = ImportanceDensity::for_beta(sys.beta, sys.n * sys.d);
    return [sys, grid, seed, density](std::uint64_t index) {
        const BridgeSample sample = sample_bridge(seed, index, sys.n, sys.d, grid, density);
        if (sys.spin_split())
            return spin_split_pair(sample, sys.potential, grid, sys.beta, density, sys.spins);
        return sample_pair(sample, sys.potential, grid, sys.beta, density);
    };
}

EstimateReport partition_report_from(const PairAccumulator& acc, const SystemSpec& sys,
                                     const TimeGrid& grid, std::uint64_t seed) {
    EstimateReport r;
    fill_common(r, acc, sys, grid, seed);
    if (r.failed) return r;
    const int dn = sys.n * sys.d;
    const double log_norm =
        sys.log_permutation_norm() + 0.5 * dn * std::log(2.0 * std::numbers::pi * sys.beta);
    const double scale = std::exp(nuclei_log_factor(sys.potential, sys.beta) - log_norm);
    r.estimate = scale * acc.mean_b;
    const double se_b = r.sigma_b / std::sqrt(static_cast<double>(acc.count));
    r.std_error = scale * se_b;
    r.rel_ci = (acc.mean_b != 0.0) ? 1.96 * se_b / std::abs(acc.mean_b) : 0.0;
    if (std::abs(acc.mean_b) < 2.0 * se_b) {
        r.failed = true;
        r.message = "sign-dominated: |mean B| within 2 standard errors of zero";
    }
    return r;
}

EstimateReport meanfield_report_from(const PairAccumulator& acc, const PairAccumulator& pilot,
                                     const SystemSpec& sys, const TimeGrid& grid,
                                     std::uint64_t seed) {
    EstimateReport r;
    fill_common(r, acc, sys, grid, seed);
    if (r.failed) return r;
    const double epsilon = pick_epsilon(pilot.mean_b);
    if (epsilon <= 0.0) {
        r.failed = true;
        r.message = "pilot denominator mean is zero";
        return r;
    }
    const RatioResult ratio = ratio_with_ci(acc, epsilon);
    r.estimate = ratio.estimate + nuclei_energy_constant(sys.potential);
    r.std_error = ratio.std_error;
    r.rel_ci = ratio.rel_ci;
    if (ratio.sign_dominated) {
        r.failed = true;
        r.message = "sign-dominated: |mean B| within 2 standard errors of zero";
    }
    return r;
}

std::int64_t pilot_size(std::int64_t m_x) {
    return std::max<std::int64_t>(2, std::min<std::int64_t>(4096, m_x / 16));
}

EstimateReport estimate_partition(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                                  std::uint64_t seed, int workers) {
    if (m_x < 2) throw ConfigError("estimate_partition: need at least two samples");
    const auto t0 = std::chrono::steady_clock::now();
    const PairFn fn = make_pair_fn(sys, grid, seed);
    const PairAccumulator acc =
        accumulate_indexed(fn, 0, static_cast<std::uint64_t>(m_x), workers);
    EstimateReport r = partition_report_from(acc, sys, grid, seed);
    r.wall_seconds = elapsed_since(t0);
    return r;
}

EstimateReport estimate_meanfield(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                                  std::uint64_t seed, int workers) {
    if (m_x < 2) throw ConfigError("estimate_meanfield: need at least two samples");
    const auto t0 = std::chrono::steady_clock::now();
    const PairFn fn = make_pair_fn(sys, grid, seed);
    const PairAccumulator pilot =
        accumulate_indexed(fn, 0, static_cast<std::uint64_t>(pilot_size(m_x)), 1);
    const PairAccumulator acc =
        accumulate_indexed(fn, 0, static_cast<std::uint64_t>(m_x), workers);
    EstimateReport r = meanfield_report_from(acc, pilot, sys, grid, seed);
    r.wall_seconds = elapsed_since(t0);
    return r;
}

std::vector<SweepPoint> convergence_sweep(const SystemSpec& sys, const TimeGrid& grid,
                                          const std::vector<std::int64_t>& sizes,
                                          std::uint64_t seed, int workers) {
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw ConfigError("convergence_sweep: sizes must be strictly increasing");
    const auto t0 = std::chrono::steady_clock::now();
    const PairFn fn = make_pair_fn(sys, grid, seed);
    std::vector<SweepPoint> out;
    PairAccumulator acc;
    PairAccumulator pilot;
    std::int64_t done = 0;
    bool have_pilot = false;
    for (std::int64_t m_x : sizes) {
        const PairAccumulator tail = accumulate_indexed(
            fn, static_cast<std::uint64_t>(done), static_cast<std::uint64_t>(m_x - done), workers);
        acc.merge(tail);
        done = m_x;
        if (!have_pilot) {
            pilot = accumulate_indexed(fn, 0, static_cast<std::uint64_t>(pilot_size(sizes[0])), 1);
            have_pilot = true;
        }
        SweepPoint p;
        p.m_x = m_x;
        p.partition = partition_report_from(acc, sys, grid, seed);
        p.meanfield = meanfield_report_from(acc, pilot, sys, grid, seed);
        p.partition.wall_seconds = p.meanfield.wall_seconds = elapsed_since(t0);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace fpimc
