#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fpimc/accumulator.hpp"
#include "fpimc/bridge.hpp"
#include "fpimc/determinant.hpp"
#include "fpimc/potential.hpp"

namespace fpimc {

// Full description of one physical system: particle count, dimension,
// inverse temperature, potential, and an optional per-particle spin list
// (+1/-1; empty means all particles share one spin species).
struct SystemSpec {
    int n = 1;
    int d = 3;
    double beta = 1.0;
    PotentialSpec potential;
    std::vector<int> spins;

    bool spin_split() const { return !spins.empty(); }
    void validate() const;
    double log_permutation_norm() const; // log(n!) or log(n+! n-!)
};

struct EstimateReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double rel_ci = 0.0;
    std::int64_t samples = 0;
    std::int64_t degenerate = 0;
    double beta = 0.0;
    double delta_t = 0.0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    double mean_a = 0.0, mean_b = 0.0, sigma_a = 0.0, sigma_b = 0.0;
    bool failed = false;
    bool degenerate_flagged = false; // degenerate fraction above 1e-6
    std::string message;
};

// Deterministic data-parallel reduction: samples are split into fixed-size
// index blocks, each block is accumulated independently, and blocks merge in
// index order — results are bit-identical for any worker count, and a longer
// run reproduces a shorter run's prefix exactly.
using PairFn = std::function<SamplePair(std::uint64_t index)>;
PairAccumulator accumulate_indexed(const PairFn& fn, std::uint64_t first, std::uint64_t count,
                                   int workers);

// Per-index evaluation used by both estimate ops for the given system.
PairFn make_pair_fn(const SystemSpec& sys, const TimeGrid& grid, std::uint64_t seed);

EstimateReport estimate_partition(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                                  std::uint64_t seed, int workers = 1);

EstimateReport estimate_meanfield(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                                  std::uint64_t seed, int workers = 1);

struct SweepPoint {
    std::int64_t m_x = 0;
    EstimateReport partition;
    EstimateReport meanfield;
};

// One report pair per size, reusing the common sample prefix.
std::vector<SweepPoint> convergence_sweep(const SystemSpec& sys, const TimeGrid& grid,
                                          const std::vector<std::int64_t>& sizes,
                                          std::uint64_t seed, int workers = 1);

// Shared by partition-style reports: Z = C * mean_b / (norm * (2 pi beta)^{dn/2}).
EstimateReport partition_report_from(const PairAccumulator& acc, const SystemSpec& sys,
                                     const TimeGrid& grid, std::uint64_t seed);
EstimateReport meanfield_report_from(const PairAccumulator& acc, const PairAccumulator& pilot,
                                     const SystemSpec& sys, const TimeGrid& grid,
                                     std::uint64_t seed);

std::int64_t pilot_size(std::int64_t m_x);

} // namespace fpimc
