#include "fpimc/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fpimc/paths.hpp"

namespace fpimc {

namespace {

long double single_particle_z(long double beta, int d) {
    const long double z1 = std::exp(-beta / 2.0L) / (1.0L - std::exp(-beta));
    long double out = 1.0L;
    for (int c = 0; c < d; ++c) out *= z1;
    return out;
}

long double recursion_z(int n, long double beta, int d, bool fermion) {
    std::vector<long double> z1k(n + 1); // Z_1(k beta)
    for (int k = 1; k <= n; ++k) z1k[k] = single_particle_z(k * beta, d);
    std::vector<long double> z(n + 1);
    z[0] = 1.0L;
    for (int m = 1; m <= n; ++m) {
        long double sum = 0.0L;
        for (int k = 1; k <= m; ++k) {
            const long double sign = (fermion && k % 2 == 0) ? -1.0L : 1.0L;
            sum += sign * z1k[k] * z[m - k];
        }
        z[m] = sum / m;
    }
    return z[n];
}

void check_ho_args(int n, double beta, int d) {
    if (n < 0) throw std::invalid_argument("exact_ho_partition: n must be >= 0");
    if (beta <= 0.0) throw std::invalid_argument("exact_ho_partition: beta must be positive");
    if (d < 1 || d > 3) throw std::invalid_argument("exact_ho_partition: d must be 1, 2, or 3");
}

long double exact_ho_partition_ld(int n, double beta, int d, Statistics stat) {
    check_ho_args(n, beta, d);
    if (n == 0) return 1.0L;
    if (stat == Statistics::Distinguishable) {
        long double z1 = single_particle_z(beta, d);
        long double out = 1.0L;
        for (int k = 0; k < n; ++k) out *= z1;
        return out;
    }
    return recursion_z(n, beta, d, stat == Statistics::Fermion);
}

} // namespace

double exact_ho_partition(int n, double beta, int d, Statistics stat) {
    const long double z = exact_ho_partition_ld(n, beta, d, stat);
    const double out = static_cast<double>(z);
    if (z > 0.0L && (out == 0.0 || !std::isfinite(out)))
        throw std::overflow_error("exact_ho_partition: out of double range, use the log form");
    return out;
}

double exact_ho_log_partition(int n, double beta, int d, Statistics stat) {
    const long double z = exact_ho_partition_ld(n, beta, d, stat);
    if (z <= 0.0L)
        throw std::domain_error("exact_ho_log_partition: nonpositive partition value");
    return static_cast<double>(std::log(z));
}

double exact_ho_meanfield(int n, double beta, int d, double tolerance, Statistics stat) {
    if (tolerance <= 0.0) throw std::invalid_argument("exact_ho_meanfield: tolerance must be positive");
    check_ho_args(n, beta, d);
    double delta = beta / 8.0;
    auto diff = [&](double h_step) {
        const long double zp = exact_ho_partition_ld(n, beta + h_step, d, stat);
        const long double zm = exact_ho_partition_ld(n, beta - h_step, d, stat);
        return -static_cast<double>((std::log(zp) - std::log(zm)) / (2.0L * h_step));
    };
    double prev = diff(delta);
    for (int it = 0; it < 20; ++it) {
        delta *= 0.5;
        const double cur = diff(delta);
        if (std::abs(cur - prev) < tolerance) return cur;
        prev = cur;
    }
    throw std::runtime_error("exact_ho_meanfield: central difference did not converge");
}

double cycle_coefficient(int m) {
    if (m < 2) throw std::domain_error("cycle_coefficient: m must be >= 2");
    if (m == 2) return 2.0;
    double sum = 0.0;
    for (int k = 1; k < m; ++k) sum += 1.0 / k;
    return sum;
}

namespace {

int permutation_sign(const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    std::vector<char> seen(n, 0);
    int sign = 1;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        int len = 0;
        for (int j = i; !seen[j]; j = perm[j]) {
            seen[j] = 1;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

// Trapezoid-summed integrals along the n^2 candidate paths:
//   ext[k][l]    = T[ ext(path(k,l)) ]
//   gext[k][l]   = T[ B_k . grad ext(path(k,l)) ]
//   pair_v[...]  = T[ lambda / |path(k,lk) - path(j,lj)| ]         (k < j)
//   pair_g[...]  = T[ -lambda/r^3 (delta).(B_k - B_j) ]            (k < j)
// All without the beta and delta_s prefactors.
struct TensorTables {
    int n = 0;
    std::vector<double> ext, gext;     // n*n
    std::vector<double> pair_v, pair_g; // n*n*n*n, filled for k < j
    bool degenerate = false;

    std::size_t pidx(int k, int lk, int j, int lj) const {
        return ((static_cast<std::size_t>(k) * n + lk) * n + j) * n + lj;
    }
};

TensorTables build_tables(const PathTable& table, const PotentialSpec& spec,
                          bool with_derivative) {
    const int n = table.n;
    const int d = table.d;
    const int steps = table.steps;
    TensorTables t;
    t.n = n;
    t.ext.assign(static_cast<std::size_t>(n) * n, 0.0);
    t.gext.assign(static_cast<std::size_t>(n) * n, 0.0);
    t.pair_v.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    t.pair_g.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    try {
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double vs = 0.0, gs = 0.0;
                for (int m = 0; m <= steps; ++m) {
                    const double weight = (m == 0 || m == steps) ? 0.5 : 1.0;
                    const double* y = table.at(k, l, m);
                    vs += weight * external_term(spec, y, d);
                    if (with_derivative) {
                        double g[3];
                        gradient_external(spec, y, d, g);
                        const double* bk = table.bridge(k, m);
                        double dot = 0.0;
                        for (int c = 0; c < d; ++c) dot += bk[c] * g[c];
                        gs += weight * dot;
                    }
                }
                t.ext[static_cast<std::size_t>(k) * n + l] = vs;
                t.gext[static_cast<std::size_t>(k) * n + l] = gs;
            }
        if (spec.lambda != 0.0) {
            for (int k = 0; k < n; ++k)
                for (int j = k + 1; j < n; ++j)
                    for (int lk = 0; lk < n; ++lk)
                        for (int lj = 0; lj < n; ++lj) {
                            if (lk == lj) continue; // never both map to the same slot
                            double vs = 0.0, gs = 0.0;
                            for (int m = 0; m <= steps; ++m) {
                                const double weight = (m == 0 || m == steps) ? 0.5 : 1.0;
                                const double* y = table.at(k, lk, m);
                                const double* z = table.at(j, lj, m);
                                double r2 = 0.0;
                                for (int c = 0; c < d; ++c) {
                                    const double dx = y[c] - z[c];
                                    r2 += dx * dx;
                                }
                                const double r = std::sqrt(r2);
                                if (r < 1e-12)
                                    throw SingularityError("tensor tables: coincident paths");
                                vs += weight * spec.lambda / r;
                                if (with_derivative) {
                                    const double* bk = table.bridge(k, m);
                                    const double* bj = table.bridge(j, m);
                                    const double coef = -spec.lambda / (r * r2);
                                    double dot = 0.0;
                                    for (int c = 0; c < d; ++c)
                                        dot += (y[c] - z[c]) * (bk[c] - bj[c]);
                                    gs += weight * coef * dot;
                                }
                            }
                            t.pair_v[t.pidx(k, lk, j, lj)] = vs;
                            t.pair_g[t.pidx(k, lk, j, lj)] = gs;
                        }
        }
    } catch (const SingularityError&) {
        t.degenerate = true;
    }
    return t;
}

} // namespace

SamplePair tensor_pair(const BridgeSample& sample, const PotentialSpec& spec,
                       const TimeGrid& grid, double beta, const ImportanceDensity& density,
                       Statistics stat, const std::vector<int>& spins) {
    const int n = sample.n;
    if (n > 8)
        throw ConfigError("tensor_pair: permutation sum limited to n <= 8 (n! growth); "
                          "use the determinant estimator for larger systems");
    if (!spins.empty() && static_cast<int>(spins.size()) != n)
        throw ConfigError("tensor_pair: one spin per particle required");
    if (sample.steps != grid.steps) throw ConfigError("tensor_pair: grid mismatch");

    const PathTable table = PathTable::build(sample, beta);
    const TensorTables t = build_tables(table, spec, true);
    SamplePair out;
    if (t.degenerate) {
        out.degenerate = true;
        return out;
    }

    const int d = sample.d;
    const double ds = 1.0 / grid.steps;
    const double half_sqrt_beta = 0.5 * std::sqrt(beta);

    // Gaussian exponents |x_k(0) - x_l(0)|^2 / (2 beta)
    std::vector<double> gauss(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            double r2 = 0.0;
            const double* xk = sample.position(k);
            const double* xl = sample.position(l);
            for (int c = 0; c < d; ++c) {
                const double dx = xk[c] - xl[c];
                r2 += dx * dx;
            }
            gauss[static_cast<std::size_t>(k) * n + l] = r2 / (2.0 * beta);
        }

    double sum_b = 0.0, sum_db = 0.0;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (stat == Statistics::Distinguishable) {
            bool identity = true;
            for (int k = 0; k < n; ++k)
                if (perm[k] != k) identity = false;
            if (!identity) continue;
        }
        if (!spins.empty()) {
            bool preserves = true;
            for (int k = 0; k < n; ++k)
                if (spins[perm[k]] != spins[k]) preserves = false;
            if (!preserves) continue;
        }
        const double sign = (stat == Statistics::Fermion)
                                ? static_cast<double>(permutation_sign(perm))
                                : 1.0;
        double q = 0.0, vsum = 0.0, gsum = 0.0;
        for (int k = 0; k < n; ++k) {
            q += gauss[static_cast<std::size_t>(k) * n + perm[k]];
            vsum += t.ext[static_cast<std::size_t>(k) * n + perm[k]];
            gsum += t.gext[static_cast<std::size_t>(k) * n + perm[k]];
        }
        if (spec.lambda != 0.0)
            for (int k = 0; k < n; ++k)
                for (int j = k + 1; j < n; ++j) {
                    vsum += t.pair_v[t.pidx(k, perm[k], j, perm[j])];
                    gsum += t.pair_g[t.pidx(k, perm[k], j, perm[j])];
                }
        const double term = sign * std::exp(-q - beta * ds * vsum);
        const double dlog = q / beta - ds * (vsum + half_sqrt_beta * gsum);
        sum_b += term;
        sum_db += term * dlog;
    } while (std::next_permutation(perm.begin(), perm.end()));

    const double p = density.value(sample.x0.data());
    const int dn = n * d;
    out.b_value = sum_b / p;
    out.a_value = -(sum_db - dn / (2.0 * beta) * sum_b) / p;
    return out;
}

TensorReports tensor_estimate(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                              std::uint64_t seed, Statistics stat, int workers) {
    sys.validate();
    if (m_x < 2) throw ConfigError("tensor_estimate: need at least two samples");
    const auto t0 = std::chrono::steady_clock::now();
    const ImportanceDensity density = ImportanceDensity::for_beta(sys.beta, sys.n * sys.d);
    const PairFn fn = [&sys, &grid, seed, density, stat](std::uint64_t index) {
        const BridgeSample sample = sample_bridge(seed, index, sys.n, sys.d, grid, density);
        return tensor_pair(sample, sys.potential, grid, sys.beta, density, stat, sys.spins);
    };
    const PairAccumulator pilot =
        accumulate_indexed(fn, 0, static_cast<std::uint64_t>(pilot_size(m_x)), 1);
    const PairAccumulator acc =
        accumulate_indexed(fn, 0, static_cast<std::uint64_t>(m_x), workers);
    TensorReports reports;
    reports.partition = partition_report_from(acc, sys, grid, seed);
    reports.meanfield = meanfield_report_from(acc, pilot, sys, grid, seed);
    if (stat == Statistics::Distinguishable) {
        // single-term sum: no permutation-count normalization
        const double undo = std::exp(sys.log_permutation_norm());
        reports.partition.estimate *= undo;
        reports.partition.std_error *= undo;
        reports.partition.message = "distinguishable normalization: no 1/n! factor";
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reports.partition.wall_seconds = reports.meanfield.wall_seconds = wall;
    return reports;
}

} // namespace fpimc
