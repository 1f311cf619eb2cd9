#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fpimc/determinant.hpp"
#include "fpimc/oracles.hpp"
#include "fpimc/rng.hpp"

using namespace fpimc;

namespace {

PotentialSpec zero_potential() {
    PotentialSpec s;
    s.kind = PotentialKind::CustomSeparable;
    s.custom_value = [](const double*, int) { return 0.0; };
    s.custom_gradient = [](const double*, int d, double* out) {
        for (int c = 0; c < d; ++c) out[c] = 0.0;
    };
    return s;
}

double permutation_sum_det(const std::vector<double>& w, int n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double det = 0.0;
    do {
        // parity by counting inversions
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inv;
        double prod = (inv % 2 == 0) ? 1.0 : -1.0;
        for (int k = 0; k < n; ++k) prod *= w[static_cast<std::size_t>(k) * n + perm[k]];
        det += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

double true_det(const WEvaluation& ev) {
    return det_lu(ev.w, ev.n) * std::exp(ev.n * ev.log_scale);
}

} // namespace

TEST_CASE("nu mapping") {
    CHECK(nu_map(2, 0, 1) == 2);
    CHECK(nu_map(1, 0, 1) == 0);
    // for fixed (k, l), values over j != k are pairwise distinct and never l
    const int n = 6;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            std::vector<int> seen;
            for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                const int v = nu_map(j, k, l);
                if (k != l) CHECK(v != l);
                CHECK(std::count(seen.begin(), seen.end(), v) == 0);
                seen.push_back(v);
            }
        }
}

TEST_CASE("determinant and adjugate closed forms") {
    SUBCASE("2x2") {
        const std::vector<double> w = {3.0, 1.0, 2.0, 5.0};
        const DetAdj da = det_and_adjugate(w, 2);
        CHECK(da.det == doctest::Approx(13.0));
        CHECK(da.adjugate[0] == doctest::Approx(5.0));
        CHECK(da.adjugate[1] == doctest::Approx(-1.0));
        CHECK(da.adjugate[2] == doctest::Approx(-2.0));
        CHECK(da.adjugate[3] == doctest::Approx(3.0));
    }
    SUBCASE("identity") {
        std::vector<double> w(25, 0.0);
        for (int i = 0; i < 5; ++i) w[i * 5 + i] = 1.0;
        const DetAdj da = det_and_adjugate(w, 5);
        CHECK(da.det == doctest::Approx(1.0));
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(da.adjugate[i * 5 + j] == doctest::Approx(i == j ? 1.0 : 0.0));
    }
    SUBCASE("non-finite entries rejected") {
        std::vector<double> w = {1.0, std::nan(""), 0.0, 1.0};
        CHECK_THROWS(det_and_adjugate(w, 2));
    }
}

TEST_CASE("LU determinant equals signed permutation sum, adjugate identity") {
    SampleRng rng(17, 0);
    for (int n = 2; n <= 5; ++n)
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> w(static_cast<std::size_t>(n) * n);
            for (double& v : w) v = 2.0 * rng.uniform();
            const double ref = permutation_sum_det(w, n);
            const double lu = det_lu(w, n);
            CHECK(lu == doctest::Approx(ref).epsilon(1e-10));
            if (trial < 100) {
                const DetAdj da = det_and_adjugate(w, n);
                // adj(W) * W = det(W) * I
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double s = 0.0;
                        for (int k = 0; k < n; ++k)
                            s += da.adjugate[static_cast<std::size_t>(i) * n + k] *
                                 w[static_cast<std::size_t>(k) * n + j];
                        const double want = (i == j) ? da.det : 0.0;
                        CHECK(std::abs(s - want) <= 1e-9 * std::max(1.0, std::abs(da.det)));
                    }
            }
        }
}

TEST_CASE("cofactor fallback near singularity") {
    // nearly rank-deficient matrix forces the ill-conditioned path
    std::vector<double> w = {1.0, 2.0, 3.0,
                             2.0, 4.0, 6.0 + 1e-14,
                             0.5, 1.0, 2.0};
    const DetAdj da = det_and_adjugate(w, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += da.adjugate[i * 3 + k] * w[k * 3 + j];
            const double want = (i == j) ? da.det : 0.0;
            CHECK(std::abs(s - want) < 1e-9);
        }
}

TEST_CASE("matrix construction basics") {
    const TimeGrid grid(8);
    SUBCASE("single free particle") {
        const auto density = ImportanceDensity::for_beta(1.0, 3);
        const BridgeSample s = sample_bridge(1, 0, 1, 3, grid, density);
        const WEvaluation ev = build_w(s, zero_potential(), grid, 1.0, true);
        CHECK(true_det(ev) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(ev.dw[0] * std::exp(ev.log_scale) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("coincident free fermions annihilate") {
        const auto density = ImportanceDensity::for_beta(1.0, 6);
        BridgeSample s = sample_bridge(1, 0, 2, 3, grid, density);
        for (int c = 0; c < 3; ++c) s.x0[3 + c] = s.x0[c];
        const WEvaluation ev = build_w(s, zero_potential(), grid, 1.0, false);
        // both entries of each row agree, so the determinant vanishes
        CHECK(ev.w[0] * ev.w[3] - ev.w[1] * ev.w[2] == doctest::Approx(0.0).epsilon(1e-13));
    }
    SUBCASE("entries are positive and diagonal has unit gaussian factor") {
        const auto density = ImportanceDensity::for_beta(1.0, 9);
        const BridgeSample s = sample_bridge(2, 5, 3, 3, grid, density);
        const WEvaluation ev = build_w(s, PotentialSpec::harmonic(), grid, 1.0, false);
        for (double v : ev.w) CHECK(v > 0.0);
    }
}

TEST_CASE("separable two-particle matrix matches the direct formula") {
    const TimeGrid grid(16);
    const double beta = 1.3;
    const auto density = ImportanceDensity::for_beta(beta, 6);
    const BridgeSample s = sample_bridge(21, 3, 2, 3, grid, density);
    const WEvaluation ev = build_w(s, PotentialSpec::harmonic(), grid, beta, false);
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            double dist2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double dx = s.position(k)[c] - s.position(l)[c];
                dist2 += dx * dx;
            }
            double integral = 0.0;
            for (int m = 0; m <= grid.steps; ++m) {
                const double weight = (m == 0 || m == grid.steps) ? 0.5 : 1.0;
                double p[3];
                bridge_path_point(s, k, l, m, beta, p);
                integral += weight * 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            }
            const double expected = std::exp(-dist2 / (2.0 * beta) - beta * integral / grid.steps);
            CHECK(ev.w[k * 2 + l] * std::exp(ev.log_scale) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("free-particle ratio is the kinetic energy d/(2 beta)") {
    const TimeGrid grid(8);
    for (double beta : {1.0, 2.0}) {
        const auto density = ImportanceDensity::for_beta(beta, 3);
        const BridgeSample s = sample_bridge(4, 7, 1, 3, grid, density);
        const SamplePair p = sample_pair(s, zero_potential(), grid, beta, density);
        CHECK(p.a_value / p.b_value == doctest::Approx(3.0 / (2.0 * beta)).epsilon(1e-12));
    }
}

TEST_CASE("Jacobi derivative matches finite difference in beta") {
    const TimeGrid grid(20);
    const double beta = 1.0, h = 1e-4;
    const auto spec = PotentialSpec::harmonic_coulomb(0.5);
    const auto density = ImportanceDensity::for_beta(beta, 9);
    int checked = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const BridgeSample s = sample_bridge(31, i, 3, 3, grid, density);
        const WEvaluation ev = build_w(s, spec, grid, beta, true);
        if (ev.degenerate) continue;
        const DetAdj da = det_and_adjugate(ev.w, ev.n);
        double tr = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) tr += da.adjugate[a * 3 + b] * ev.dw[b * 3 + a];
        tr *= std::exp(3.0 * ev.log_scale);
        const double dp = true_det(build_w(s, spec, grid, beta + h, true));
        const double dm = true_det(build_w(s, spec, grid, beta - h, true));
        const double fd = (dp - dm) / (2.0 * h);
        CHECK(tr == doctest::Approx(fd).epsilon(1e-5));
        ++checked;
    }
    CHECK(checked >= 99);
}

TEST_CASE("antisymmetry: relabeling particles preserves the determinant") {
    const TimeGrid grid(10);
    const double beta = 0.8;
    const auto density = ImportanceDensity::for_beta(beta, 9);
    const auto spec = PotentialSpec::harmonic_coulomb(0.5);
    const BridgeSample s = sample_bridge(77, 2, 3, 3, grid, density);
    BridgeSample swapped = s;
    // swap particles 0 and 2 (positions and bridges)
    for (int c = 0; c < 3; ++c) std::swap(swapped.x0[c], swapped.x0[6 + c]);
    for (int m = 0; m <= grid.steps; ++m)
        for (int c = 0; c < 3; ++c)
            std::swap(swapped.bridge[(0 * (grid.steps + 1) + m) * 3 + c],
                      swapped.bridge[(2 * (grid.steps + 1) + m) * 3 + c]);
    const double d1 = true_det(build_w(s, spec, grid, beta, false));
    const double d2 = true_det(build_w(swapped, spec, grid, beta, false));
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-10));
}

TEST_CASE("separable determinant equals the permutation sum for n <= 5") {
    const TimeGrid grid(8);
    const double beta = 1.0;
    for (int n = 2; n <= 5; ++n) {
        const auto density = ImportanceDensity::for_beta(beta, n * 3);
        for (std::uint64_t i = 0; i < 20; ++i) {
            const BridgeSample s = sample_bridge(55, i, n, 3, grid, density);
            const SamplePair det_pair = sample_pair(s, PotentialSpec::harmonic(), grid, beta, density);
            const SamplePair tens =
                tensor_pair(s, PotentialSpec::harmonic(), grid, beta, density, Statistics::Fermion);
            CHECK(det_pair.b_value == doctest::Approx(tens.b_value).epsilon(1e-12));
            CHECK(det_pair.a_value == doctest::Approx(tens.a_value).epsilon(1e-11));
        }
    }
}

TEST_CASE("spin-split pairs") {
    const TimeGrid grid(8);
    const double beta = 1.0;
    const auto spec = PotentialSpec::harmonic();
    SUBCASE("single block equals the spinless pair") {
        const auto density = ImportanceDensity::for_beta(beta, 6);
        const BridgeSample s = sample_bridge(8, 1, 2, 3, grid, density);
        const SamplePair plain = sample_pair(s, spec, grid, beta, density);
        const SamplePair split = spin_split_pair(s, spec, grid, beta, density, {1, 1});
        CHECK(split.b_value == doctest::Approx(plain.b_value).epsilon(1e-13));
        CHECK(split.a_value == doctest::Approx(plain.a_value).epsilon(1e-13));
    }
    SUBCASE("opposite spins give the distinguishable product") {
        const auto density = ImportanceDensity::for_beta(beta, 6);
        const BridgeSample s = sample_bridge(8, 2, 2, 3, grid, density);
        const SamplePair split = spin_split_pair(s, spec, grid, beta, density, {1, -1});
        const SamplePair dist =
            tensor_pair(s, spec, grid, beta, density, Statistics::Distinguishable);
        CHECK(split.b_value == doctest::Approx(dist.b_value).epsilon(1e-12));
        CHECK(split.a_value == doctest::Approx(dist.a_value).epsilon(1e-12));
    }
    SUBCASE("mixed blocks match the spin-restricted permutation sum") {
        const auto density = ImportanceDensity::for_beta(beta, 9);
        const std::vector<int> spins = {1, 1, -1};
        for (std::uint64_t i = 0; i < 25; ++i) {
            const BridgeSample s = sample_bridge(9, i, 3, 3, grid, density);
            const SamplePair split = spin_split_pair(s, spec, grid, beta, density, spins);
            const SamplePair restricted =
                tensor_pair(s, spec, grid, beta, density, Statistics::Fermion, spins);
            CHECK(split.b_value == doctest::Approx(restricted.b_value).epsilon(1e-12));
            CHECK(split.a_value == doctest::Approx(restricted.a_value).epsilon(1e-12));
        }
    }
    SUBCASE("non-separable spec is refused") {
        const auto coulomb = PotentialSpec::harmonic_coulomb(0.5);
        const auto density = ImportanceDensity::for_beta(beta, 6);
        const BridgeSample s = sample_bridge(8, 3, 2, 3, grid, density);
        CHECK_THROWS_AS(spin_split_pair(s, coulomb, grid, beta, density, {1, -1}), ConfigError);
    }
}

TEST_CASE("two-particle exactness holds with interactions") {
    const TimeGrid grid(12);
    const double beta = 1.0;
    const auto spec = PotentialSpec::harmonic_coulomb(0.5);
    const auto density = ImportanceDensity::for_beta(beta, 6);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const BridgeSample s = sample_bridge(13, i, 2, 3, grid, density);
        const SamplePair det_pair = sample_pair(s, spec, grid, beta, density);
        const SamplePair tens = tensor_pair(s, spec, grid, beta, density, Statistics::Fermion);
        if (det_pair.degenerate || tens.degenerate) continue;
        CHECK(det_pair.b_value == doctest::Approx(tens.b_value).epsilon(1e-12));
        CHECK(det_pair.a_value == doctest::Approx(tens.a_value).epsilon(1e-11));
    }
}
