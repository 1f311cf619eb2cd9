#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fpimc {

// Raised when an evaluation lands within 1e-12 of a Coulomb singularity.
// The estimators discard such samples and count them.
struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PotentialKind { Harmonic, HarmonicCoulomb, MolecularCoulomb, CustomSeparable };

struct Nucleus {
    std::array<double, 3> position{};
    double charge = 0.0;
};

// Separable-plus-interaction potential in Hartree atomic units.
//   Harmonic:         V = sum_k |x_k|^2 / 2
//   HarmonicCoulomb:  V = sum_k |x_k|^2 / 2 + sum_k sum_{j!=k} lambda/(2|x_k-x_j|)
//   MolecularCoulomb: V = -sum_k sum_j Z_j/|x_k-X_j| + pair repulsion (lambda=1)
//   CustomSeparable:  V = sum_k custom(x_k), library use only
struct PotentialSpec {
    PotentialKind kind = PotentialKind::Harmonic;
    double lambda = 0.0;
    std::vector<Nucleus> nuclei;
    std::function<double(const double*, int)> custom_value;
    std::function<void(const double*, int, double*)> custom_gradient;

    static PotentialSpec harmonic() { return {}; }
    static PotentialSpec harmonic_coulomb(double lambda) {
        PotentialSpec s;
        s.kind = PotentialKind::HarmonicCoulomb;
        s.lambda = lambda;
        return s;
    }
    static PotentialSpec molecular(std::vector<Nucleus> nuclei, double lambda = 1.0);

    bool separable() const {
        return kind == PotentialKind::Harmonic || kind == PotentialKind::CustomSeparable ||
               lambda == 0.0;
    }
    bool has_trap() const {
        return kind == PotentialKind::Harmonic || kind == PotentialKind::HarmonicCoulomb;
    }
    void validate() const;
};

// Single-particle term: trap plus nuclei attraction (negative energy).
double external_term(const PotentialSpec& spec, const double* y, int d);

// Pairwise repulsion sum_j lambda/(2|y_k - y_j|) over the given partners.
double interaction_term(const PotentialSpec& spec, const double* y_k,
                        const std::vector<const double*>& others, int d);

// Gradient with respect to y_k of external_term + interaction_term.
void gradient_terms(const PotentialSpec& spec, const double* y_k,
                    const std::vector<const double*>& others, int d, double* out);

void gradient_external(const PotentialSpec& spec, const double* y, int d, double* out);

// log C = -(beta/2) sum_{i != j} Z_i Z_j / |X_i - X_j|  (1 when < 2 nuclei)
double nuclei_log_factor(const PotentialSpec& spec, double beta);

// -d/dbeta log C = +(1/2) sum_{i != j} Z_i Z_j / |X_i - X_j|
double nuclei_energy_constant(const PotentialSpec& spec);

} // namespace fpimc
