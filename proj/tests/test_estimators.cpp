#include <doctest.h>

#include <cmath>

#include "fpimc/estimators.hpp"
#include "fpimc/oracles.hpp"

using namespace fpimc;

namespace {

SystemSpec single_ho(double beta) {
    SystemSpec s;
    s.n = 1;
    s.d = 3;
    s.beta = beta;
    s.potential = PotentialSpec::harmonic();
    return s;
}

} // namespace

TEST_CASE("system validation") {
    SystemSpec s = single_ho(1.0);
    s.n = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = single_ho(1.0);
    s.d = 4;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = single_ho(-1.0);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = single_ho(1.0);
    s.spins = {1, -1};
    CHECK_THROWS_AS(s.validate(), ConfigError); // length mismatch
    s.n = 2;
    s.potential = PotentialSpec::harmonic_coulomb(0.5);
    CHECK_THROWS_AS(s.validate(), ConfigError); // spins need separability
}

TEST_CASE("single-particle partition matches the closed form") {
    const SystemSpec sys = single_ho(1.0);
    const TimeGrid grid(20);
    const EstimateReport r = estimate_partition(sys, grid, 1 << 14, 11);
    const double exact = exact_ho_partition(1, 1.0, 3);
    CHECK_FALSE(r.failed);
    CHECK(std::abs(r.estimate - exact) < 3.0 * r.rel_ci * exact);
    CHECK(r.samples == (1 << 14));
    CHECK(r.degenerate == 0);
    CHECK(r.wall_seconds > 0.0);
}

TEST_CASE("single-particle mean field matches the closed form") {
    const SystemSpec sys = single_ho(1.0);
    const TimeGrid grid(20);
    const EstimateReport r = estimate_meanfield(sys, grid, 1 << 14, 11);
    const double exact = 3.0 * (0.5 + 1.0 / (std::exp(1.0) - 1.0));
    CHECK_FALSE(r.failed);
    CHECK(std::abs(r.estimate - exact) < 3.0 * r.rel_ci * std::abs(exact));
}

TEST_CASE("worker count does not change the result") {
    SystemSpec sys;
    sys.n = 3;
    sys.d = 3;
    sys.beta = 1.0;
    sys.potential = PotentialSpec::harmonic();
    const TimeGrid grid(10);
    const EstimateReport r1 = estimate_partition(sys, grid, 3 * 4096 + 17, 5, 1);
    const EstimateReport r2 = estimate_partition(sys, grid, 3 * 4096 + 17, 5, 2);
    const EstimateReport r8 = estimate_partition(sys, grid, 3 * 4096 + 17, 5, 8);
    CHECK(r1.estimate == r2.estimate); // bitwise
    CHECK(r1.estimate == r8.estimate);
    CHECK(r1.std_error == r8.std_error);
}

TEST_CASE("convergence sweep reuses the sample prefix") {
    SystemSpec sys;
    sys.n = 2;
    sys.d = 3;
    sys.beta = 1.0;
    sys.potential = PotentialSpec::harmonic();
    const TimeGrid grid(10);
    const auto sweep = convergence_sweep(sys, grid, {1 << 12, 1 << 13}, 7);
    const EstimateReport direct = estimate_partition(sys, grid, 1 << 12, 7);
    CHECK(sweep[0].partition.estimate == direct.estimate); // bitwise prefix property
    const EstimateReport full = estimate_partition(sys, grid, 1 << 13, 7);
    CHECK(sweep[1].partition.estimate == full.estimate);
    CHECK_THROWS_AS(convergence_sweep(sys, grid, {1 << 13, 1 << 12}, 7), ConfigError);
}

TEST_CASE("estimator is unbiased against the recursion at n=3") {
    SystemSpec sys;
    sys.n = 3;
    sys.d = 3;
    sys.beta = 1.0;
    sys.potential = PotentialSpec::harmonic();
    const TimeGrid grid(20);
    const EstimateReport z = estimate_partition(sys, grid, 1 << 15, 21);
    const double z_ref = exact_ho_partition(3, 1.0, 3);
    CHECK(std::abs(z.estimate - z_ref) < 3.0 * z.rel_ci * z_ref);
    const EstimateReport h = estimate_meanfield(sys, grid, 1 << 15, 21);
    const double h_ref = exact_ho_meanfield(3, 1.0, 3);
    CHECK(std::abs(h.estimate - h_ref) < 3.0 * h.rel_ci * h_ref);
}

TEST_CASE("spin-split estimator matches the spinless route when one species") {
    SystemSpec plain;
    plain.n = 2;
    plain.d = 3;
    plain.beta = 1.0;
    plain.potential = PotentialSpec::harmonic();
    SystemSpec split = plain;
    split.spins = {1, 1};
    const TimeGrid grid(10);
    const EstimateReport a = estimate_partition(plain, grid, 1 << 12, 3);
    const EstimateReport b = estimate_partition(split, grid, 1 << 12, 3);
    CHECK(a.estimate == doctest::Approx(b.estimate).epsilon(1e-12));
}

TEST_CASE("report input validation") {
    const SystemSpec sys = single_ho(1.0);
    const TimeGrid grid(8);
    CHECK_THROWS_AS(estimate_partition(sys, grid, 1, 1), ConfigError);
    CHECK_THROWS_AS(estimate_meanfield(sys, grid, 0, 1), ConfigError);
}
