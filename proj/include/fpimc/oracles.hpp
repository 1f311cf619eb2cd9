#pragma once

#include <cstdint>
#include <vector>

#include "fpimc/estimators.hpp"

namespace fpimc {

enum class Statistics { Fermion, Boson, Distinguishable };

// Harmonic-trap partition function via the alternating recursion
//   Z_n(beta) = (1/n) sum_{k=1}^n (+-1)^{k-1} Z_1(k beta) Z_{n-k}(beta),
// with Z_1(beta) = (e^{-beta/2}/(1 - e^{-beta}))^d.  The boson variant drops
// the sign; distinguishable particles give Z_1(beta)^n (no 1/n!).
double exact_ho_partition(int n, double beta, int d, Statistics stat = Statistics::Fermion);
double exact_ho_log_partition(int n, double beta, int d, Statistics stat = Statistics::Fermion);

// -d/dbeta log Z_n by central differences with step halving until two
// successive estimates agree to `tolerance`; throws after 20 halvings.
double exact_ho_meanfield(int n, double beta, int d, double tolerance = 1e-9,
                          Statistics stat = Statistics::Fermion);

// Gaussian-marginal width coefficient of permutation m-cycles:
// c_2 = 2; c_m = sum_{m'=1}^{m-1} 1/m' for m >= 3.
double cycle_coefficient(int m);

// Exact signed permutation sum for one sample, sharing the determinant
// module's bridges and quadrature.  Pairwise interactions use the true
// permuted partner paths (no distinguishable-partner substitution).
// Guarded at n <= 8.
SamplePair tensor_pair(const BridgeSample& sample, const PotentialSpec& spec,
                       const TimeGrid& grid, double beta, const ImportanceDensity& density,
                       Statistics stat, const std::vector<int>& spins = {});

struct TensorReports {
    EstimateReport partition;
    EstimateReport meanfield;
};

TensorReports tensor_estimate(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                              std::uint64_t seed, Statistics stat, int workers = 1);

} // namespace fpimc
