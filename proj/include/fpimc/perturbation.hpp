#pragma once

#include <cstdint>
#include <string>

#include "fpimc/determinant.hpp"
#include "fpimc/estimators.hpp"

namespace fpimc {

// Error indicator for the distinguishable-partner substitution inside the
// interaction terms: partner paths are randomly shifted by s*sqrt(beta/c_star)*xi
// with xi standard normal, and the interaction factor of each matrix entry is
// replaced by its inner average over n_xi draws.  The spread between the
// plain and perturbed mean-field values estimates the substitution bias
// without a reference solution.
struct PerturbationConfig {
    double c_star = 2.0;
    int n_xi = 100;
    double delta_beta = 0.01;
    bool share_xi_across_entries = true; // false: fresh xi panel per entry

    void validate(double beta) const;
    std::string warning() const; // non-empty when c_star is outside [0.6, 2]
};

// Perturbed matrix for one sample; external and Gaussian factors unchanged.
WEvaluation perturbed_w(const BridgeSample& sample, const PotentialSpec& spec,
                        const TimeGrid& grid, double beta, const PerturbationConfig& config,
                        std::uint64_t xi_seed);

// Central-difference mean field on the perturbed partition estimate with
// common random numbers: the beta +- delta_beta evaluations share initial
// positions, bridges, and xi panels, so only the analytic beta dependence
// differs.  h = -[log Z(beta+d) - log Z(beta-d)] / (2 d).
EstimateReport perturbed_meanfield(const SystemSpec& sys, const TimeGrid& grid, std::int64_t m_x,
                                   std::uint64_t seed, const PerturbationConfig& config,
                                   int workers = 1);

} // namespace fpimc
