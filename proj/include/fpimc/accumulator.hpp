#pragma once

#include <cstdint>

namespace fpimc {

// One-pass mergeable moments for the per-sample pair (A_i, B_i): means,
// central moments up to order 4 for each component, and the cross term
// needed for the ratio variance.  Merging is deterministic, so a fixed
// block decomposition gives worker-count-independent results.
struct PairAccumulator {
    std::int64_t count = 0;
    std::int64_t degenerate = 0;
    double mean_a = 0.0, m2_a = 0.0, m3_a = 0.0, m4_a = 0.0;
    double mean_b = 0.0, m2_b = 0.0, m3_b = 0.0, m4_b = 0.0;
    double c2_ab = 0.0; // sum of (a - mean_a)(b - mean_b)

    void add(double a, double b);
    void add_degenerate(); // counted, contributes (0, 0)
    void merge(const PairAccumulator& other);

    double var_a() const { return count > 1 ? m2_a / (count - 1) : 0.0; }
    double var_b() const { return count > 1 ? m2_b / (count - 1) : 0.0; }
    double cov_ab() const { return count > 1 ? c2_ab / (count - 1) : 0.0; }
    double skewness_b() const;
    double excess_kurtosis_b() const;
};

// Scalar flavor of the same bookkeeping, used for replica summaries.
struct ScalarAccumulator {
    std::int64_t count = 0;
    double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

    void add(double x);
    double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
    double std_dev() const;
    double skewness() const;
    double excess_kurtosis() const;
};

} // namespace fpimc
