#include "fpimc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fpimc {

namespace {

double ramp(double z, double eps) {
    if (z < -eps) return 0.0;
    if (z < 0.0) {
        const double t = z + eps;
        return t * t * t / (6.0 * eps * eps);
    }
    if (z < eps) {
        const double t = eps - z;
        return t * t * t / (6.0 * eps * eps) + z;
    }
    return z;
}

} // namespace

double g_epsilon(double z, double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("g_epsilon: epsilon must be positive");
    return epsilon + ramp(z - epsilon, epsilon);
}

double pick_epsilon(double pilot_mean_b) { return 0.25 * std::abs(pilot_mean_b); }

RatioResult ratio_with_ci(const PairAccumulator& acc, double epsilon) {
    if (acc.count < 2) throw std::invalid_argument("ratio_with_ci: need at least two samples");
    RatioResult r;
    const double n = static_cast<double>(acc.count);
    const double a = acc.mean_a;
    const double b = acc.mean_b;
    const double sb = std::sqrt(acc.var_b());
    r.sign_dominated = std::abs(b) < 2.0 * sb / std::sqrt(n);
    r.estimate = a / g_epsilon(b, epsilon);
    double var_h = 0.0;
    if (a != 0.0 && b != 0.0)
        var_h = acc.var_a() / (a * a) + acc.var_b() / (b * b) - 2.0 * acc.cov_ab() / (a * b);
    if (var_h < 0.0) {
        var_h = 0.0;
        r.variance_clamped = true;
    }
    r.sigma_h = std::sqrt(var_h);
    r.rel_ci = 1.96 * r.sigma_h / std::sqrt(n);
    r.std_error = std::abs(r.estimate) * r.sigma_h / std::sqrt(n);
    return r;
}

ReplicaSummary replica_diagnostics(const ReplicaPlan& plan,
                                   const std::function<double(int)>& runner) {
    if (plan.m1 < 2) throw std::invalid_argument("replica_diagnostics: need at least two replicas");
    ReplicaSummary s;
    s.estimates.reserve(plan.m1);
    ScalarAccumulator acc;
    for (int r = 0; r < plan.m1; ++r) {
        const double v = runner(r);
        s.estimates.push_back(v);
        acc.add(v);
        if (v < 0.0) ++s.negative_count;
    }
    s.mean = acc.mean;
    s.std_dev = acc.std_dev();
    s.skewness = acc.skewness();
    s.excess_kurtosis = acc.excess_kurtosis();
    return s;
}

void write_histogram_csv(const std::vector<double>& values, int bins, const std::string& path) {
    if (values.empty() || bins < 1)
        throw std::invalid_argument("write_histogram_csv: empty input");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    std::vector<int> counts(bins, 0);
    ScalarAccumulator acc;
    for (double v : values) {
        int b = static_cast<int>((v - lo) / width);
        counts[std::clamp(b, 0, bins - 1)] += 1;
        acc.add(v);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_histogram_csv: cannot open " + path);
    out << "bin_low,bin_high,count\n";
    out.precision(17);
    for (int b = 0; b < bins; ++b)
        out << lo + b * width << ',' << lo + (b + 1) * width << ',' << counts[b] << '\n';
    out << "# fitted_mean=" << acc.mean << " fitted_std=" << acc.std_dev() << '\n';
}

} // namespace fpimc
