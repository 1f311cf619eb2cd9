#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fpimc/accumulator.hpp"

namespace fpimc {

// Cubic-smoothed positive ramp keeping the ratio denominator away from zero:
// g_eps(z) = eps + g(z - eps), exactly z for z >= 2 eps, floored at eps for
// z -> -inf, twice continuously differentiable at the knots.
double g_epsilon(double z, double epsilon);

// Default regularization scale from a pilot denominator mean.
double pick_epsilon(double pilot_mean_b);

struct RatioResult {
    double estimate = 0.0;   // mean_a / g_eps(mean_b)
    double std_error = 0.0;  // |estimate| * sigma_h / sqrt(N)
    double rel_ci = 0.0;     // 1.96 * sigma_h / sqrt(N)
    double sigma_h = 0.0;
    bool variance_clamped = false;
    bool sign_dominated = false; // |mean_b| within 2 standard errors of zero
};

// Delta-method ratio statistics:
//   sigma_h^2 = var_a/mean_a^2 + var_b/mean_b^2 - 2 cov_ab/(mean_a mean_b)
RatioResult ratio_with_ci(const PairAccumulator& acc, double epsilon);

struct ReplicaPlan {
    int m1 = 256;          // replica count
    std::int64_t m2 = 0;   // samples per replica
};

struct ReplicaSummary {
    std::vector<double> estimates; // one per replica
    double mean = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    int negative_count = 0;
};

// Runs `runner(replica_index)` for each replica and summarizes the spread.
ReplicaSummary replica_diagnostics(const ReplicaPlan& plan,
                                   const std::function<double(int)>& runner);

// CSV histogram of the replica values: bin_low, bin_high, count, plus a
// trailing comment row with fitted mean and standard deviation.
void write_histogram_csv(const std::vector<double>& values, int bins, const std::string& path);

} // namespace fpimc
