#include "fpimc/determinant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fpimc {

namespace {

constexpr double kCondLimit = 1e12;

// Pivoted LU in place; returns determinant and a pivot-ratio condition proxy.
struct LuResult {
    double det = 0.0;
    double cond = 0.0;
    std::vector<double> lu;
    std::vector<int> perm;
};

LuResult lu_factor(const std::vector<double>& w, int n) {
    LuResult r;
    r.lu = w;
    r.perm.resize(n);
    for (int i = 0; i < n; ++i) r.perm[i] = i;
    double* a = r.lu.data();
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int row = col + 1; row < n; ++row) {
            const double v = std::abs(a[static_cast<std::size_t>(row) * n + col]);
            if (v > best) {
                best = v;
                pivot = row;
            }
        }
        if (pivot != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(col) * n + c],
                          a[static_cast<std::size_t>(pivot) * n + c]);
            std::swap(r.perm[col], r.perm[pivot]);
            sign = -sign;
        }
        const double diag = a[static_cast<std::size_t>(col) * n + col];
        if (diag == 0.0) continue;
        for (int row = col + 1; row < n; ++row) {
            const double f = a[static_cast<std::size_t>(row) * n + col] / diag;
            a[static_cast<std::size_t>(row) * n + col] = f;
            for (int c = col + 1; c < n; ++c)
                a[static_cast<std::size_t>(row) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
        }
    }
    double det = sign;
    double max_d = 0.0, min_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double diag = a[static_cast<std::size_t>(i) * n + i];
        det *= diag;
        max_d = std::max(max_d, std::abs(diag));
        min_d = std::min(min_d, std::abs(diag));
    }
    r.det = det;
    r.cond = (min_d == 0.0) ? std::numeric_limits<double>::infinity() : max_d / min_d;
    return r;
}

void lu_solve(const LuResult& r, int n, const double* rhs, double* out) {
    // Pb = LUx
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = rhs[r.perm[i]];
        for (int j = 0; j < i; ++j) s -= r.lu[static_cast<std::size_t>(i) * n + j] * y[j];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= r.lu[static_cast<std::size_t>(i) * n + j] * out[j];
        out[i] = s / r.lu[static_cast<std::size_t>(i) * n + i];
    }
}

double det_minor(const std::vector<double>& w, int n, int skip_row, int skip_col) {
    std::vector<double> sub;
    sub.reserve(static_cast<std::size_t>(n - 1) * (n - 1));
    for (int i = 0; i < n; ++i) {
        if (i == skip_row) continue;
        for (int j = 0; j < n; ++j) {
            if (j == skip_col) continue;
            sub.push_back(w[static_cast<std::size_t>(i) * n + j]);
        }
    }
    return det_lu(sub, n - 1);
}

void check_finite(const std::vector<double>& w) {
    for (double v : w)
        if (!std::isfinite(v)) throw std::domain_error("det_and_adjugate: non-finite entry");
}

// Trapezoidal accumulation of gamma and d gamma / d beta for one entry.
struct EntryIntegrals {
    double gamma = 0.0;
    double dgamma = 0.0;
};

EntryIntegrals entry_integrals(const PathTable& table, const PotentialSpec& spec, int k, int ell,
                               bool with_derivative) {
    const int n = table.n;
    const int d = table.d;
    const int steps = table.steps;
    const double beta = table.beta;
    const double lambda = spec.lambda;

    double pot_sum = 0.0;
    double grad_sum = 0.0;
    for (int m = 0; m <= steps; ++m) {
        const double weight = (m == 0 || m == steps) ? 0.5 : 1.0;
        const double* y = table.at(k, ell, m);
        double pot = external_term(spec, y, d);
        double gdot = 0.0;
        if (with_derivative) {
            double g[3];
            gradient_external(spec, y, d, g);
            const double* bk = table.bridge(k, m);
            for (int c = 0; c < d; ++c) gdot += bk[c] * g[c];
        }
        if (lambda != 0.0) {
            const double* bk = table.bridge(k, m);
            for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                const double* z = table.at(j, nu_map(j, k, ell), m);
                double r2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double dx = y[c] - z[c];
                    r2 += dx * dx;
                }
                const double r = std::sqrt(r2);
                if (r < 1e-12) throw SingularityError("entry_integrals: coincident paths");
                pot += lambda / (2.0 * r);
                if (with_derivative) {
                    const double* bj = table.bridge(j, m);
                    const double coef = -lambda / (2.0 * r * r2);
                    for (int c = 0; c < d; ++c)
                        gdot += coef * (y[c] - z[c]) * (bk[c] - bj[c]);
                }
            }
        }
        pot_sum += weight * pot;
        grad_sum += weight * gdot;
    }
    const double ds = 1.0 / steps;
    EntryIntegrals out;
    out.gamma = beta * ds * pot_sum;
    if (with_derivative)
        out.dgamma = ds * (pot_sum + 0.5 * table.sqrt_beta * grad_sum);
    return out;
}

} // namespace

double det_lu(const std::vector<double>& w, int n) {
    if (n == 0) return 1.0;
    if (n == 1) return w[0];
    return lu_factor(w, n).det;
}

DetAdj det_and_adjugate(const std::vector<double>& w, int n) {
    check_finite(w);
    DetAdj out;
    out.adjugate.assign(static_cast<std::size_t>(n) * n, 0.0);
    if (n == 1) {
        out.det = w[0];
        out.adjugate[0] = 1.0;
        return out;
    }
    const LuResult lu = lu_factor(w, n);
    out.det = lu.det;
    if (lu.det != 0.0 && lu.cond < kCondLimit) {
        // adj = det * inverse
        std::vector<double> e(n, 0.0), col(n);
        for (int j = 0; j < n; ++j) {
            e[j] = 1.0;
            lu_solve(lu, n, e.data(), col.data());
            e[j] = 0.0;
            for (int i = 0; i < n; ++i)
                out.adjugate[static_cast<std::size_t>(i) * n + j] = out.det * col[i];
        }
        return out;
    }
    if (n <= 12) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                out.adjugate[static_cast<std::size_t>(i) * n + j] = sign * det_minor(w, n, j, i);
            }
        // recompute det from one cofactor row for consistency near singularity
        double det = 0.0;
        for (int j = 0; j < n; ++j)
            det += w[j] * out.adjugate[static_cast<std::size_t>(j) * n];
        out.det = det;
        return out;
    }
    // large and ill-conditioned: keep the LU route as best effort
    std::vector<double> e(n, 0.0), col(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        lu_solve(lu, n, e.data(), col.data());
        e[j] = 0.0;
        for (int i = 0; i < n; ++i)
            out.adjugate[static_cast<std::size_t>(i) * n + j] = out.det * col[i];
    }
    return out;
}

WEvaluation build_w(const PathTable& table, const PotentialSpec& spec, bool with_derivative) {
    const int n = table.n;
    const double beta = table.beta;
    WEvaluation ev;
    ev.n = n;
    ev.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    ev.dw.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::vector<double> log_w(static_cast<std::size_t>(n) * n);
    std::vector<double> dlog(static_cast<std::size_t>(n) * n, 0.0);
    try {
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double dist2 = 0.0;
                const double* xk = table.sample->position(k);
                const double* xl = table.sample->position(l);
                for (int c = 0; c < table.d; ++c) {
                    const double dx = xk[c] - xl[c];
                    dist2 += dx * dx;
                }
                const EntryIntegrals in = entry_integrals(table, spec, k, l, with_derivative);
                log_w[static_cast<std::size_t>(k) * n + l] = -dist2 / (2.0 * beta) - in.gamma;
                if (with_derivative)
                    dlog[static_cast<std::size_t>(k) * n + l] =
                        dist2 / (2.0 * beta * beta) - in.dgamma;
            }
    } catch (const SingularityError&) {
        ev.degenerate = true;
        return ev;
    }

    const double scale = *std::max_element(log_w.begin(), log_w.end());
    ev.log_scale = scale;
    for (std::size_t i = 0; i < log_w.size(); ++i) {
        ev.w[i] = std::exp(log_w[i] - scale);
        ev.dw[i] = ev.w[i] * dlog[i];
    }
    return ev;
}

WEvaluation build_w(const BridgeSample& sample, const PotentialSpec& spec,
                    const TimeGrid& grid, double beta, bool with_derivative) {
    if (sample.steps != grid.steps) throw ConfigError("build_w: grid mismatch");
    if (beta <= 0.0) throw ConfigError("build_w: beta must be positive");
    const PathTable table = PathTable::build(sample, beta);
    return build_w(table, spec, with_derivative);
}

namespace {

double trace_adj_dw(const DetAdj& da, const std::vector<double>& dw, int n) {
    double tr = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            tr += da.adjugate[static_cast<std::size_t>(i) * n + j] *
                  dw[static_cast<std::size_t>(j) * n + i];
    return tr;
}

BridgeSample subset_sample(const BridgeSample& sample, const std::vector<int>& particles) {
    BridgeSample out;
    out.n = static_cast<int>(particles.size());
    out.d = sample.d;
    out.steps = sample.steps;
    out.seed = sample.seed;
    out.index = sample.index;
    out.x0.resize(static_cast<std::size_t>(out.n) * out.d);
    out.bridge.resize(static_cast<std::size_t>(out.n) * (out.steps + 1) * out.d);
    for (int i = 0; i < out.n; ++i) {
        const int k = particles[i];
        std::copy_n(sample.position(k), out.d, out.x0.data() + static_cast<std::size_t>(i) * out.d);
        std::copy_n(sample.bridge_at(k, 0), static_cast<std::size_t>(out.steps + 1) * out.d,
                    out.bridge.data() + static_cast<std::size_t>(i) * (out.steps + 1) * out.d);
    }
    return out;
}

} // namespace

SamplePair sample_pair(const BridgeSample& sample, const PotentialSpec& spec,
                       const TimeGrid& grid, double beta, const ImportanceDensity& density) {
    const WEvaluation ev = build_w(sample, spec, grid, beta, true);
    SamplePair out;
    if (ev.degenerate) {
        out.degenerate = true;
        return out;
    }
    const int n = sample.n;
    const int dn = sample.n * sample.d;
    const DetAdj da = det_and_adjugate(ev.w, n);
    const double p = density.value(sample.x0.data());
    const double factor = std::exp(n * ev.log_scale) / p;
    const double det = da.det * factor;
    const double ddet = trace_adj_dw(da, ev.dw, n) * factor;
    out.b_value = det;
    out.a_value = -(ddet - dn / (2.0 * beta) * det);
    return out;
}

SamplePair spin_split_pair(const BridgeSample& sample, const PotentialSpec& spec,
                           const TimeGrid& grid, double beta, const ImportanceDensity& density,
                           const std::vector<int>& spins) {
    if (!spec.separable())
        throw ConfigError("spin_split_pair: spin product requires a separable potential");
    if (static_cast<int>(spins.size()) != sample.n)
        throw ConfigError("spin_split_pair: one spin per particle required");
    std::vector<int> up, down;
    for (int k = 0; k < sample.n; ++k) (spins[k] > 0 ? up : down).push_back(k);

    const int dn = sample.n * sample.d;
    double dets[2] = {1.0, 1.0};
    double ddets[2] = {0.0, 0.0}; // Tr(adj dW) per block
    double scales[2] = {0.0, 0.0};
    const std::vector<int>* blocks[2] = {&up, &down};
    SamplePair out;
    for (int b = 0; b < 2; ++b) {
        if (blocks[b]->empty()) continue;
        const BridgeSample sub = subset_sample(sample, *blocks[b]);
        const WEvaluation ev = build_w(sub, spec, grid, beta, true);
        if (ev.degenerate) {
            out.degenerate = true;
            return out;
        }
        const DetAdj da = det_and_adjugate(ev.w, ev.n);
        dets[b] = da.det;
        ddets[b] = trace_adj_dw(da, ev.dw, ev.n);
        scales[b] = ev.n * ev.log_scale;
    }
    const double p = density.value(sample.x0.data());
    const double factor = std::exp(scales[0] + scales[1]) / p;
    const double det = dets[0] * dets[1] * factor;
    const double ddet = (ddets[0] * dets[1] + dets[0] * ddets[1]) * factor;
    out.b_value = det;
    out.a_value = -(ddet - dn / (2.0 * beta) * det);
    return out;
}

} // namespace fpimc
