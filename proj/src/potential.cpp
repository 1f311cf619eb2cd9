#include "fpimc/potential.hpp"

#include <cmath>

namespace fpimc {

namespace {

constexpr double kMinDistance = 1e-12;

double distance(const double* a, const double* b, int d) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
        const double dx = a[c] - b[c];
        r2 += dx * dx;
    }
    return std::sqrt(r2);
}

} // namespace

PotentialSpec PotentialSpec::molecular(std::vector<Nucleus> nuclei, double lambda) {
    PotentialSpec s;
    s.kind = PotentialKind::MolecularCoulomb;
    s.lambda = lambda;
    s.nuclei = std::move(nuclei);
    s.validate();
    return s;
}

void PotentialSpec::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("PotentialSpec: lambda must be >= 0");
    for (std::size_t i = 0; i < nuclei.size(); ++i) {
        if (nuclei[i].charge <= 0.0)
            throw std::invalid_argument("PotentialSpec: nuclear charges must be positive");
        for (std::size_t j = i + 1; j < nuclei.size(); ++j)
            if (distance(nuclei[i].position.data(), nuclei[j].position.data(), 3) < kMinDistance)
                throw std::invalid_argument("PotentialSpec: coincident nuclei");
    }
    if (kind == PotentialKind::CustomSeparable && !custom_value)
        throw std::invalid_argument("PotentialSpec: custom kind needs a value function");
}

double external_term(const PotentialSpec& spec, const double* y, int d) {
    double v = 0.0;
    if (spec.has_trap()) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) r2 += y[c] * y[c];
        v += 0.5 * r2;
    }
    if (spec.kind == PotentialKind::CustomSeparable) v += spec.custom_value(y, d);
    for (const Nucleus& nuc : spec.nuclei) {
        const double r = distance(y, nuc.position.data(), d);
        if (r < kMinDistance) throw SingularityError("external_term: evaluation at a nucleus");
        v -= nuc.charge / r;
    }
    return v;
}

double interaction_term(const PotentialSpec& spec, const double* y_k,
                        const std::vector<const double*>& others, int d) {
    if (spec.lambda == 0.0) return 0.0;
    double v = 0.0;
    for (const double* y_j : others) {
        const double r = distance(y_k, y_j, d);
        if (r < kMinDistance) throw SingularityError("interaction_term: coincident electrons");
        v += spec.lambda / (2.0 * r);
    }
    return v;
}

void gradient_external(const PotentialSpec& spec, const double* y, int d, double* out) {
    for (int c = 0; c < d; ++c) out[c] = spec.has_trap() ? y[c] : 0.0;
    if (spec.kind == PotentialKind::CustomSeparable) spec.custom_gradient(y, d, out);
    for (const Nucleus& nuc : spec.nuclei) {
        const double r = distance(y, nuc.position.data(), d);
        if (r < kMinDistance) throw SingularityError("gradient_external: evaluation at a nucleus");
        const double r3 = r * r * r;
        for (int c = 0; c < d; ++c) out[c] += nuc.charge * (y[c] - nuc.position[c]) / r3;
    }
}

void gradient_terms(const PotentialSpec& spec, const double* y_k,
                    const std::vector<const double*>& others, int d, double* out) {
    gradient_external(spec, y_k, d, out);
    if (spec.lambda == 0.0) return;
    for (const double* y_j : others) {
        const double r = distance(y_k, y_j, d);
        if (r < kMinDistance) throw SingularityError("gradient_terms: coincident electrons");
        const double r3 = r * r * r;
        for (int c = 0; c < d; ++c) out[c] -= spec.lambda * (y_k[c] - y_j[c]) / (2.0 * r3);
    }
}

double nuclei_energy_constant(const PotentialSpec& spec) {
    double sum = 0.0;
    const auto& nuc = spec.nuclei;
    for (std::size_t i = 0; i < nuc.size(); ++i)
        for (std::size_t j = 0; j < nuc.size(); ++j)
            if (i != j)
                sum += nuc[i].charge * nuc[j].charge /
                       distance(nuc[i].position.data(), nuc[j].position.data(), 3);
    return 0.5 * sum;
}

double nuclei_log_factor(const PotentialSpec& spec, double beta) {
    return -beta * nuclei_energy_constant(spec);
}

} // namespace fpimc
