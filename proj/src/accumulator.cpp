#include "fpimc/accumulator.hpp"

#include <cmath>

namespace fpimc {

namespace {

// Pebay's single-observation update for central moments up to order 4.
struct Moments4 {
    double mean, m2, m3, m4;
};

void add_obs(Moments4& m, std::int64_t n_new, double x) {
    const double n = static_cast<double>(n_new);
    const double delta = x - m.mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * (n - 1.0);
    m.mean += delta_n;
    m.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m.m2 - 4.0 * delta_n * m.m3;
    m.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m.m2;
    m.m2 += term1;
}

void merge_obs(Moments4& a, std::int64_t na, const Moments4& b, std::int64_t nb) {
    if (nb == 0) return;
    if (na == 0) {
        a = b;
        return;
    }
    const double n1 = static_cast<double>(na);
    const double n2 = static_cast<double>(nb);
    const double n = n1 + n2;
    const double delta = b.mean - a.mean;
    const double delta2 = delta * delta;
    Moments4 r;
    r.mean = a.mean + delta * n2 / n;
    r.m2 = a.m2 + b.m2 + delta2 * n1 * n2 / n;
    r.m3 = a.m3 + b.m3 + delta2 * delta * n1 * n2 * (n1 - n2) / (n * n) +
           3.0 * delta * (n1 * b.m2 - n2 * a.m2) / n;
    r.m4 = a.m4 + b.m4 +
           delta2 * delta2 * n1 * n2 * (n1 * n1 - n1 * n2 + n2 * n2) / (n * n * n) +
           6.0 * delta2 * (n1 * n1 * b.m2 + n2 * n2 * a.m2) / (n * n) +
           4.0 * delta * (n1 * b.m3 - n2 * a.m3) / n;
    a = r;
}

} // namespace

void PairAccumulator::add(double a, double b) {
    const std::int64_t n = count + 1;
    // cross term first: uses the pre-update mean of a and post-update mean of b
    const double da = a - mean_a;
    Moments4 ma{mean_a, m2_a, m3_a, m4_a};
    Moments4 mb{mean_b, m2_b, m3_b, m4_b};
    add_obs(ma, n, a);
    add_obs(mb, n, b);
    c2_ab += da * (b - mb.mean);
    mean_a = ma.mean; m2_a = ma.m2; m3_a = ma.m3; m4_a = ma.m4;
    mean_b = mb.mean; m2_b = mb.m2; m3_b = mb.m3; m4_b = mb.m4;
    count = n;
}

void PairAccumulator::add_degenerate() {
    ++degenerate;
    add(0.0, 0.0);
}

void PairAccumulator::merge(const PairAccumulator& other) {
    if (other.count == 0) {
        degenerate += other.degenerate;
        return;
    }
    if (count == 0) {
        *this = other;
        return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(other.count);
    const double n = n1 + n2;
    const double da = other.mean_a - mean_a;
    const double db = other.mean_b - mean_b;
    Moments4 ma{mean_a, m2_a, m3_a, m4_a};
    Moments4 mb{mean_b, m2_b, m3_b, m4_b};
    merge_obs(ma, count, {other.mean_a, other.m2_a, other.m3_a, other.m4_a}, other.count);
    merge_obs(mb, count, {other.mean_b, other.m2_b, other.m3_b, other.m4_b}, other.count);
    c2_ab += other.c2_ab + da * db * n1 * n2 / n;
    mean_a = ma.mean; m2_a = ma.m2; m3_a = ma.m3; m4_a = ma.m4;
    mean_b = mb.mean; m2_b = mb.m2; m3_b = mb.m3; m4_b = mb.m4;
    count += other.count;
    degenerate += other.degenerate;
}

double PairAccumulator::skewness_b() const {
    if (count < 2 || m2_b <= 0.0) return 0.0;
    const double n = static_cast<double>(count);
    return std::sqrt(n) * m3_b / std::pow(m2_b, 1.5);
}

double PairAccumulator::excess_kurtosis_b() const {
    if (count < 2 || m2_b <= 0.0) return 0.0;
    const double n = static_cast<double>(count);
    return n * m4_b / (m2_b * m2_b) - 3.0;
}

void ScalarAccumulator::add(double x) {
    Moments4 m{mean, m2, m3, m4};
    add_obs(m, ++count, x);
    mean = m.mean; m2 = m.m2; m3 = m.m3; m4 = m.m4;
}

double ScalarAccumulator::std_dev() const { return std::sqrt(variance()); }

double ScalarAccumulator::skewness() const {
    if (count < 2 || m2 <= 0.0) return 0.0;
    const double n = static_cast<double>(count);
    return std::sqrt(n) * m3 / std::pow(m2, 1.5);
}

double ScalarAccumulator::excess_kurtosis() const {
    if (count < 2 || m2 <= 0.0) return 0.0;
    const double n = static_cast<double>(count);
    return n * m4 / (m2 * m2) - 3.0;
}

} // namespace fpimc
