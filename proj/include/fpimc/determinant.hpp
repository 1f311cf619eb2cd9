#pragma once

#include <vector>

#include "fpimc/bridge.hpp"
#include "fpimc/paths.hpp"
#include "fpimc/potential.hpp"

namespace fpimc {

// Distinguishable-partner index used inside the interaction terms of entry
// (k, l): partner j keeps its own diagonal bridge except j = l, which is
// replaced by k so that no distance is pinned to zero at s = 1.
inline int nu_map(int j, int k, int ell) { return j == ell ? k : j; }

// The n x n matrix W and its element-wise beta-derivative for one sample.
// Entries are stored with a shared exponent factored out:
//   W_true = exp(log_scale) * w,   dW_true/dbeta = exp(log_scale) * dw.
struct WEvaluation {
    int n = 0;
    std::vector<double> w;
    std::vector<double> dw;
    double log_scale = 0.0;
    bool degenerate = false;

    double& at(std::vector<double>& m, int k, int l) { return m[static_cast<std::size_t>(k) * n + l]; }
};

WEvaluation build_w(const BridgeSample& sample, const PotentialSpec& spec,
                    const TimeGrid& grid, double beta, bool with_derivative);

// Same computation on a prebuilt path table (shared with other consumers).
WEvaluation build_w(const PathTable& table, const PotentialSpec& spec, bool with_derivative);

struct DetAdj {
    double det = 0.0;
    std::vector<double> adjugate; // row-major n x n
};

// Determinant by pivoted LU; adjugate as det * inverse, with an explicit
// cofactor fallback (n <= 12) when the LU pivots look ill-conditioned.
DetAdj det_and_adjugate(const std::vector<double>& w, int n);

double det_lu(const std::vector<double>& w, int n);

// Per-sample numerator/denominator pair for the ratio estimator:
//   B = det(W)/p(x0)
//   A = -[Tr(adj(W) dW/dbeta) - (dn)/(2 beta) det(W)] / p(x0)
struct SamplePair {
    double a_value = 0.0;
    double b_value = 0.0;
    bool degenerate = false;
};

SamplePair sample_pair(const BridgeSample& sample, const PotentialSpec& spec,
                       const TimeGrid& grid, double beta, const ImportanceDensity& density);

// Spin-split pair for separable potentials: denominator det(W+) det(W-),
// numerator by the product rule.  The n+! n-! normalization is applied by
// the estimator, not here.
SamplePair spin_split_pair(const BridgeSample& sample, const PotentialSpec& spec,
                           const TimeGrid& grid, double beta, const ImportanceDensity& density,
                           const std::vector<int>& spins);

} // namespace fpimc
