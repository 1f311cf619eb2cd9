// Batch front end: subcommands map one-to-one to the library's estimators,
// presets bundle the standard experiment parameter sets, outputs are CSV or
// JSON plus a JSON manifest for reproducibility.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "fpimc/estimators.hpp"
#include "fpimc/oracles.hpp"
#include "fpimc/perturbation.hpp"
#include "fpimc/statistics.hpp"

using nlohmann::json;
using namespace fpimc;

namespace {

struct RunConfig {
    SystemSpec sys;
    double delta_t = 0.025;
    std::int64_t samples = 1 << 16;
    std::uint64_t seed = 1;
    std::string statistics = "fermion"; // fermion | boson | distinguishable
    std::optional<PerturbationConfig> perturbation;
    std::optional<ReplicaPlan> replicas;
    int workers = 1;
    std::string out;
    std::string format = "csv"; // csv | json
};

std::string kind_name(PotentialKind k) {
    switch (k) {
        case PotentialKind::Harmonic: return "harmonic";
        case PotentialKind::HarmonicCoulomb: return "harmonic_coulomb";
        case PotentialKind::MolecularCoulomb: return "molecular";
        case PotentialKind::CustomSeparable: return "custom";
    }
    return "harmonic";
}

PotentialKind kind_from_name(const std::string& s) {
    if (s == "harmonic") return PotentialKind::Harmonic;
    if (s == "harmonic_coulomb") return PotentialKind::HarmonicCoulomb;
    if (s == "molecular") return PotentialKind::MolecularCoulomb;
    throw ConfigError("unknown potential kind '" + s +
                      "' (expected harmonic, harmonic_coulomb, or molecular)");
}

json config_to_json(const RunConfig& c) {
    json j;
    j["n"] = c.sys.n;
    j["d"] = c.sys.d;
    j["beta"] = c.sys.beta;
    j["delta_t"] = c.delta_t;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["statistics"] = c.statistics;
    j["workers"] = c.workers;
    j["format"] = c.format;
    if (!c.out.empty()) j["out"] = c.out;
    json pot;
    pot["kind"] = kind_name(c.sys.potential.kind);
    pot["lambda"] = c.sys.potential.lambda;
    if (!c.sys.potential.nuclei.empty()) {
        json nuclei = json::array();
        for (const Nucleus& nuc : c.sys.potential.nuclei)
            nuclei.push_back({{"position", nuc.position}, {"charge", nuc.charge}});
        pot["nuclei"] = nuclei;
    }
    j["potential"] = pot;
    if (!c.sys.spins.empty()) j["spins"] = c.sys.spins;
    if (c.perturbation) {
        j["perturbation"] = {{"c_star", c.perturbation->c_star},
                             {"n_xi", c.perturbation->n_xi},
                             {"delta_beta", c.perturbation->delta_beta},
                             {"share_xi", c.perturbation->share_xi_across_entries}};
    }
    if (c.replicas)
        j["replicas"] = {{"m1", c.replicas->m1}, {"m2", c.replicas->m2}};
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.sys.n = j.value("n", 1);
    c.sys.d = j.value("d", 3);
    c.sys.beta = j.value("beta", 1.0);
    c.delta_t = j.value("delta_t", 0.025);
    c.samples = j.value("samples", static_cast<std::int64_t>(1 << 16));
    c.seed = j.value("seed", static_cast<std::uint64_t>(1));
    c.statistics = j.value("statistics", std::string("fermion"));
    c.workers = j.value("workers", 1);
    c.format = j.value("format", std::string("csv"));
    c.out = j.value("out", std::string());
    if (j.contains("potential")) {
        const json& pot = j.at("potential");
        c.sys.potential.kind = kind_from_name(pot.value("kind", std::string("harmonic")));
        c.sys.potential.lambda = pot.value("lambda", 0.0);
        if (pot.contains("nuclei"))
            for (const json& nj : pot.at("nuclei")) {
                Nucleus nuc;
                const auto pos = nj.at("position").get<std::vector<double>>();
                for (std::size_t i = 0; i < pos.size() && i < 3; ++i) nuc.position[i] = pos[i];
                nuc.charge = nj.at("charge").get<double>();
                c.sys.potential.nuclei.push_back(nuc);
            }
    }
    if (j.contains("spins")) c.sys.spins = j.at("spins").get<std::vector<int>>();
    if (j.contains("perturbation")) {
        const json& pj = j.at("perturbation");
        PerturbationConfig pc;
        pc.c_star = pj.value("c_star", 2.0);
        pc.n_xi = pj.value("n_xi", 100);
        pc.delta_beta = pj.value("delta_beta", 0.01);
        pc.share_xi_across_entries = pj.value("share_xi", true);
        c.perturbation = pc;
    }
    if (j.contains("replicas")) {
        const json& rj = j.at("replicas");
        ReplicaPlan plan;
        plan.m1 = rj.value("m1", 256);
        plan.m2 = rj.value("m2", static_cast<std::int64_t>(1024));
        c.replicas = plan;
    }
    return c;
}

Statistics stat_from_name(const std::string& s) {
    if (s == "fermion") return Statistics::Fermion;
    if (s == "boson") return Statistics::Boson;
    if (s == "distinguishable") return Statistics::Distinguishable;
    throw ConfigError("unknown statistics '" + s +
                      "' (expected fermion, boson, or distinguishable)");
}

TimeGrid grid_for(const RunConfig& c) { return TimeGrid::from_delta_t(c.sys.beta, c.delta_t); }

// --- output plumbing -------------------------------------------------------

std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "\n");
    return os.str();
}

void emit(const RunConfig& c, const std::string& csv, const json& manifest) {
    std::string payload = (c.format == "json") ? manifest.dump(2) + "\n" : csv;
    if (c.out.empty()) {
        std::cout << payload;
    } else {
        std::ofstream f(c.out);
        if (!f) throw std::runtime_error("cannot open output file " + c.out);
        f << payload;
        std::ofstream mf(c.out + ".manifest.json");
        mf << manifest.dump(2) << '\n';
    }
}

json report_json(const EstimateReport& r) {
    json j;
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["rel_ci"] = r.rel_ci;
    j["samples"] = r.samples;
    j["degenerate"] = r.degenerate;
    j["beta"] = r.beta;
    j["delta_t"] = r.delta_t;
    j["seed"] = r.seed;
    j["wall_seconds"] = r.wall_seconds;
    j["failed"] = r.failed;
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

json manifest_base(const RunConfig& c, const std::string& command) {
    json m;
    m["command"] = command;
    m["config"] = config_to_json(c);
    return m;
}

int finish(const RunConfig& c, const std::string& csv, json manifest, bool failed) {
    emit(c, csv, manifest);
    if (failed) {
        std::cerr << "estimation failed; see report message\n";
        return 1;
    }
    return 0;
}

// --- subcommand bodies -----------------------------------------------------

int run_exact_ho(const RunConfig& c) {
    const Statistics stat = stat_from_name(c.statistics);
    const double z = exact_ho_partition(c.sys.n, c.sys.beta, c.sys.d, stat);
    const double h = exact_ho_meanfield(c.sys.n, c.sys.beta, c.sys.d, 1e-9, stat);
    json m = manifest_base(c, "exact-ho");
    m["z"] = z;
    m["h"] = h;
    const std::string csv = format_csv({"n", "beta", "d", "z", "h"},
                                       {{static_cast<double>(c.sys.n), c.sys.beta,
                                         static_cast<double>(c.sys.d), z, h}});
    return finish(c, csv, m, false);
}

std::vector<double> report_row(const RunConfig& c, const EstimateReport& r) {
    // wall-clock time is reported only in the manifest so that the CSV payload
    // is byte-identical across reruns and worker counts
    return {c.sys.beta, static_cast<double>(c.sys.n), static_cast<double>(c.sys.d),
            r.delta_t,  static_cast<double>(r.samples), r.estimate,
            r.std_error, r.rel_ci, static_cast<double>(r.degenerate)};
}

const std::vector<std::string> kReportHeader = {
    "beta", "n", "d", "delta_t", "samples", "estimate", "std_error", "rel_ci",
    "degenerate"};

int run_estimate(const RunConfig& c, bool meanfield) {
    const TimeGrid grid = grid_for(c);
    const EstimateReport r =
        meanfield ? estimate_meanfield(c.sys, grid, c.samples, c.seed, c.workers)
                  : estimate_partition(c.sys, grid, c.samples, c.seed, c.workers);
    json m = manifest_base(c, meanfield ? "estimate-h" : "estimate-z");
    m["report"] = report_json(r);
    return finish(c, format_csv(kReportHeader, {report_row(c, r)}), m, r.failed);
}

int run_tensor(const RunConfig& c) {
    const TimeGrid grid = grid_for(c);
    const Statistics stat = stat_from_name(c.statistics);
    const TensorReports r = tensor_estimate(c.sys, grid, c.samples, c.seed, stat, c.workers);
    json m = manifest_base(c, "tensor");
    m["partition"] = report_json(r.partition);
    m["meanfield"] = report_json(r.meanfield);
    std::vector<std::string> header = kReportHeader;
    header[5] = "z_estimate";
    std::vector<double> zrow = report_row(c, r.partition);
    std::vector<double> hrow = report_row(c, r.meanfield);
    std::ostringstream csv;
    csv << "quantity," << format_csv(header, {});
    csv.precision(17);
    csv << "z,";
    for (std::size_t i = 0; i < zrow.size(); ++i) csv << zrow[i] << (i + 1 < zrow.size() ? "," : "\n");
    csv << "h,";
    for (std::size_t i = 0; i < hrow.size(); ++i) csv << hrow[i] << (i + 1 < hrow.size() ? "," : "\n");
    return finish(c, csv.str(), m, r.partition.failed || r.meanfield.failed);
}

int run_perturb(const RunConfig& c) {
    const TimeGrid grid = grid_for(c);
    const PerturbationConfig pc = c.perturbation.value_or(PerturbationConfig{});
    if (const std::string w = pc.warning(); !w.empty()) std::cerr << "warning: " << w << '\n';
    const EstimateReport h_nu = estimate_meanfield(c.sys, grid, c.samples, c.seed, c.workers);
    const EstimateReport h_pert =
        perturbed_meanfield(c.sys, grid, c.samples, c.seed, pc, c.workers);
    const double indicator = std::abs(h_pert.estimate - h_nu.estimate);
    json m = manifest_base(c, "perturb");
    m["h_nu"] = report_json(h_nu);
    m["h_perturb"] = report_json(h_pert);
    m["indicator"] = indicator;
    const std::string csv = format_csv(
        {"beta", "n", "d", "delta_t", "samples", "h_nu", "h_nu_rel_ci", "h_perturb",
         "h_perturb_rel_ci", "indicator"},
        {{c.sys.beta, static_cast<double>(c.sys.n), static_cast<double>(c.sys.d), h_nu.delta_t,
          static_cast<double>(c.samples), h_nu.estimate, h_nu.rel_ci, h_pert.estimate,
          h_pert.rel_ci, indicator}});
    return finish(c, csv, m, h_nu.failed || h_pert.failed);
}

int run_replicas(const RunConfig& c) {
    const TimeGrid grid = grid_for(c);
    ReplicaPlan plan = c.replicas.value_or(ReplicaPlan{});
    if (plan.m2 <= 0) plan.m2 = std::max<std::int64_t>(2, c.samples / plan.m1);
    const int dn = c.sys.n * c.sys.d;
    // replica r averages det/p over its own disjoint index range; the scaled
    // value drops the n! (2 pi beta)^{dn/2} normalization for histogramming
    const PairFn fn = make_pair_fn(c.sys, grid, c.seed);
    const ReplicaSummary summary = replica_diagnostics(plan, [&](int r) {
        const PairAccumulator acc = accumulate_indexed(
            fn, static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(plan.m2),
            static_cast<std::uint64_t>(plan.m2), c.workers);
        return acc.mean_b;
    });
    json m = manifest_base(c, "replicas");
    m["m1"] = plan.m1;
    m["m2"] = plan.m2;
    m["mean"] = summary.mean;
    m["std"] = summary.std_dev;
    m["skewness"] = summary.skewness;
    m["excess_kurtosis"] = summary.excess_kurtosis;
    m["negative_count"] = summary.negative_count;
    const double log_norm = c.sys.log_permutation_norm() +
                            0.5 * dn * std::log(2.0 * std::numbers::pi * c.sys.beta);
    m["partition_mean"] = std::exp(std::log(std::abs(summary.mean) + 1e-300) - log_norm) *
                          (summary.mean < 0 ? -1.0 : 1.0);
    if (!c.out.empty()) write_histogram_csv(summary.estimates, 40, c.out + ".hist.csv");
    const std::string csv =
        format_csv({"m1", "m2", "mean", "std", "skewness", "excess_kurtosis", "negative_count"},
                   {{static_cast<double>(plan.m1), static_cast<double>(plan.m2), summary.mean,
                     summary.std_dev, summary.skewness, summary.excess_kurtosis,
                     static_cast<double>(summary.negative_count)}});
    return finish(c, csv, m, false);
}

// --- presets ---------------------------------------------------------------

struct PresetInfo {
    std::string name;
    std::string description;
};

const std::vector<PresetInfo> kPresets = {
    {"table1", "V1 harmonic d=3 n=6: partition estimates vs exact recursion, beta in {1, 1.5, 2}"},
    {"table2", "V1 harmonic d=3 n=6: mean-field estimates vs exact recursion, beta in {1, 1.5, 2}"},
    {"table3", "V2 d=3 n=6 lambda=0.5: mean-field vs reference, beta in {0.5, 1, 1.5, 2}"},
    {"table4", "V2 d=2 lambda=0.5: mean-field vs reference, beta in {1, 0.3}, n up to 20"},
    {"table5", "V2 d=3 n=6 lambda=0.5: tensor-formula mean-field vs determinant route"},
    {"table6", "V2 d=3 lambda=0.5: perturbation indicator, n in {3, 6}, beta in {1, 1.5}, c_star=2"},
    {"fig1", "V1 harmonic d=3 n=6 beta=1: error vs sample count for Z and h"},
    {"fig-histogram", "V1 harmonic d=3 n=6: replica histogram of scaled partition values"},
    {"fig-moments", "V2 d=3 n=6 beta=0.5: central moments of the mean-field estimator"},
};

void list_presets() {
    for (const PresetInfo& p : kPresets) std::cout << p.name << ": " << p.description << '\n';
}

RunConfig base_config(const RunConfig& overrides) { return overrides; }

int run_preset(const std::string& name, RunConfig c) {
    std::vector<std::vector<double>> rows;
    json m;
    m["preset"] = name;
    m["config"] = config_to_json(c);
    std::string csv;
    bool failed = false;
    auto rel = [](double est, double ref) { return std::abs(est - ref) / std::abs(ref); };

    if (name == "table1" || name == "table2") {
        c.sys.n = 6; c.sys.d = 3;
        c.sys.potential = PotentialSpec::harmonic();
        const bool mean = (name == "table2");
        for (double beta : {1.0, 1.5, 2.0})
            for (double dt : {0.025, 0.0125}) {
                c.sys.beta = beta; c.delta_t = dt;
                const TimeGrid grid = grid_for(c);
                const double ref = mean ? exact_ho_meanfield(6, beta, 3)
                                        : exact_ho_partition(6, beta, 3);
                const EstimateReport r =
                    mean ? estimate_meanfield(c.sys, grid, c.samples, c.seed, c.workers)
                         : estimate_partition(c.sys, grid, c.samples, c.seed, c.workers);
                failed = failed || r.failed;
                rows.push_back({beta, static_cast<double>(c.samples), ref, dt, r.estimate,
                                rel(r.estimate, ref), r.rel_ci});
            }
        csv = format_csv({"beta", "M_x", mean ? "h_exact" : "Z_exact", "delta_t",
                          mean ? "h_bar" : "Z_bar", "rel_diff", "rel_ci"},
                         rows);
    } else if (name == "table3") {
        c.sys.n = 6; c.sys.d = 3;
        c.sys.potential = PotentialSpec::harmonic_coulomb(0.5);
        const std::vector<std::pair<double, double>> refs = {
            {0.5, 41.66}, {1.0, 26.692}, {1.5, 22.63}, {2.0, 22.1}};
        for (const auto& [beta, ref] : refs)
            for (double dt : {0.025, 0.0125}) {
                c.sys.beta = beta; c.delta_t = dt;
                const EstimateReport r =
                    estimate_meanfield(c.sys, grid_for(c), c.samples, c.seed, c.workers);
                failed = failed || r.failed;
                rows.push_back({beta, static_cast<double>(c.samples), ref, dt, r.estimate,
                                rel(r.estimate, ref), r.rel_ci});
            }
        csv = format_csv({"beta", "M_x", "h_ref", "delta_t", "h_nu", "rel_diff", "rel_ci"}, rows);
    } else if (name == "table4") {
        c.sys.d = 2;
        c.sys.potential = PotentialSpec::harmonic_coulomb(0.5);
        struct Row { double beta; int n; double ref; };
        const std::vector<Row> refs = {{1.0, 3, 8.719}, {1.0, 6, 22.82},  {1.0, 10, 49.0},
                                       {0.3, 6, 46.45}, {0.3, 10, 84.92}, {0.3, 20, 203.0}};
        for (const Row& row : refs)
            for (double dt : {0.025, 0.0125}) {
                c.sys.beta = row.beta; c.sys.n = row.n; c.delta_t = dt;
                const EstimateReport r =
                    estimate_meanfield(c.sys, grid_for(c), c.samples, c.seed, c.workers);
                failed = failed || r.failed;
                rows.push_back({row.beta, static_cast<double>(row.n),
                                static_cast<double>(c.samples), row.ref, dt, r.estimate,
                                rel(r.estimate, row.ref), r.rel_ci});
            }
        csv = format_csv({"beta", "n", "M_x", "h_ref", "delta_t", "h_nu", "rel_diff", "rel_ci"},
                         rows);
    } else if (name == "table5") {
        c.sys.n = 6; c.sys.d = 3;
        c.sys.potential = PotentialSpec::harmonic_coulomb(0.5);
        for (double beta : {0.5, 1.0, 1.5}) {
            c.sys.beta = beta;
            const TimeGrid grid = grid_for(c);
            const TensorReports tr =
                tensor_estimate(c.sys, grid, c.samples, c.seed, Statistics::Fermion, c.workers);
            const EstimateReport hn =
                estimate_meanfield(c.sys, grid, c.samples, c.seed, c.workers);
            failed = failed || tr.meanfield.failed || hn.failed;
            rows.push_back({beta, c.delta_t, tr.meanfield.estimate, hn.estimate,
                            rel(hn.estimate, tr.meanfield.estimate), tr.meanfield.rel_ci});
        }
        csv = format_csv({"beta", "delta_t", "h_tensor", "h_nu", "rel_diff", "tensor_rel_ci"},
                         rows);
    } else if (name == "table6") {
        c.sys.d = 3;
        c.sys.potential = PotentialSpec::harmonic_coulomb(0.5);
        const PerturbationConfig pc = c.perturbation.value_or(PerturbationConfig{});
        struct Row { double beta; int n; double ref; };
        const std::vector<Row> refs = {
            {1.0, 3, 11.355}, {1.0, 6, 26.692}, {1.5, 3, 9.157}, {1.5, 6, 22.63}};
        for (const Row& row : refs) {
            c.sys.beta = row.beta; c.sys.n = row.n;
            const TimeGrid grid = grid_for(c);
            const EstimateReport hn = estimate_meanfield(c.sys, grid, c.samples, c.seed, c.workers);
            const EstimateReport hp =
                perturbed_meanfield(c.sys, grid, c.samples, c.seed, pc, c.workers);
            failed = failed || hn.failed || hp.failed;
            rows.push_back({row.beta, static_cast<double>(row.n), row.ref, c.delta_t, hn.estimate,
                            rel(hn.estimate, row.ref), hp.estimate, rel(hp.estimate, row.ref)});
        }
        csv = format_csv({"beta", "n", "h_ref", "delta_t", "h_nu", "h_nu_rel_diff", "h_perturb",
                          "h_perturb_rel_diff"},
                         rows);
    } else if (name == "fig1") {
        c.sys.n = 6; c.sys.d = 3; c.sys.beta = 1.0;
        c.sys.potential = PotentialSpec::harmonic();
        const double z_ref = exact_ho_partition(6, 1.0, 3);
        const double h_ref = exact_ho_meanfield(6, 1.0, 3);
        std::vector<std::int64_t> sizes;
        for (std::int64_t s = 1 << 12; s <= c.samples; s *= 2) sizes.push_back(s);
        const auto sweep = convergence_sweep(c.sys, grid_for(c), sizes, c.seed, c.workers);
        for (const SweepPoint& p : sweep)
            rows.push_back({static_cast<double>(p.m_x), rel(p.partition.estimate, z_ref),
                            rel(p.meanfield.estimate, h_ref)});
        csv = format_csv({"M_x", "rel_error_Z", "rel_error_h"}, rows);
    } else if (name == "fig-histogram") {
        c.sys.n = 6; c.sys.d = 3;
        c.sys.potential = PotentialSpec::harmonic();
        if (!c.replicas) {
            ReplicaPlan plan;
            plan.m1 = 128;
            plan.m2 = std::max<std::int64_t>(2, c.samples / plan.m1);
            c.replicas = plan;
        }
        return run_replicas(c);
    } else if (name == "fig-moments") {
        c.sys.n = 6; c.sys.d = 3; c.sys.beta = 0.5;
        c.sys.potential = PotentialSpec::harmonic_coulomb(0.5);
        const int m1 = 64;
        const TimeGrid grid = grid_for(c);
        for (std::int64_t m_x = 1 << 12; m_x <= c.samples; m_x *= 2) {
            const std::int64_t m2 = std::max<std::int64_t>(2, m_x / m1);
            ScalarAccumulator acc;
            for (int r = 0; r < m1; ++r) {
                const EstimateReport rep = estimate_meanfield(
                    c.sys, grid, m2, c.seed + static_cast<std::uint64_t>(r) * 0x1000000ull,
                    c.workers);
                acc.add(rep.estimate);
            }
            rows.push_back({static_cast<double>(m_x), acc.mean, acc.variance(), acc.m3 / m1,
                            acc.m4 / m1});
        }
        csv = format_csv({"M_x", "mean_h", "var_h", "m3_h", "m4_h"}, rows);
    } else {
        std::cerr << "unknown preset '" << name << "'; valid presets:\n";
        list_presets();
        return 2;
    }
    return finish(c, csv, m, failed);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fermionic partition-function and mean-field estimation"};
    app.require_subcommand(1);

    RunConfig c;
    std::string config_path;
    double lambda = -1.0;
    std::string kind;
    std::vector<int> spins;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", c.seed, "RNG seed");
    app.add_option("--samples", c.samples, "sample count M_x");
    app.add_option("--dt", c.delta_t, "time step (beta / steps)");
    app.add_option("--workers", c.workers, "worker thread count");
    app.add_option("--out", c.out, "output file path");
    app.add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--n", c.sys.n, "particle count");
    app.add_option("--d", c.sys.d, "spatial dimension");
    app.add_option("--beta", c.sys.beta, "inverse temperature");
    app.add_option("--lambda", lambda, "pair-interaction strength");
    app.add_option("--potential", kind, "potential kind");
    app.add_option("--statistics", c.statistics, "fermion | boson | distinguishable");
    app.add_option("--spins", spins, "per-particle spins (+1/-1)");

    auto* cmd_exact = app.add_subcommand("exact-ho", "exact harmonic-trap values");
    auto* cmd_z = app.add_subcommand("estimate-z", "partition-function estimate");
    auto* cmd_h = app.add_subcommand("estimate-h", "mean-field estimate");
    auto* cmd_tensor = app.add_subcommand("tensor", "exact permutation-sum estimate (n <= 8)");
    auto* cmd_perturb = app.add_subcommand("perturb", "perturbation error indicator");
    auto* cmd_replicas = app.add_subcommand("replicas", "replica diagnostics");
    auto* cmd_preset = app.add_subcommand("preset", "run a named experiment preset");
    std::string preset_name;
    bool preset_list = false;
    cmd_preset->add_option("name", preset_name, "preset name");
    cmd_preset->add_flag("--list", preset_list, "list presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot open config file " + config_path);
            json j;
            try {
                f >> j;
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config parse error: ") + e.what());
            }
            RunConfig fromfile = config_from_json(j);
            // file first, then re-apply explicitly given flags
            RunConfig flags = c;
            c = fromfile;
            if (app.count("--seed")) c.seed = flags.seed;
            if (app.count("--samples")) c.samples = flags.samples;
            if (app.count("--dt")) c.delta_t = flags.delta_t;
            if (app.count("--workers")) c.workers = flags.workers;
            if (app.count("--out")) c.out = flags.out;
            if (app.count("--format")) c.format = flags.format;
            if (app.count("--n")) c.sys.n = flags.sys.n;
            if (app.count("--d")) c.sys.d = flags.sys.d;
            if (app.count("--beta")) c.sys.beta = flags.sys.beta;
            if (app.count("--statistics")) c.statistics = flags.statistics;
        }
        if (!kind.empty()) c.sys.potential.kind = kind_from_name(kind);
        if (lambda >= 0.0) c.sys.potential.lambda = lambda;
        if (!spins.empty()) c.sys.spins = spins;

        if (cmd_exact->parsed()) return run_exact_ho(c);
        if (cmd_z->parsed()) return run_estimate(c, false);
        if (cmd_h->parsed()) return run_estimate(c, true);
        if (cmd_tensor->parsed()) return run_tensor(c);
        if (cmd_perturb->parsed()) return run_perturb(c);
        if (cmd_replicas->parsed()) return run_replicas(c);
        if (cmd_preset->parsed()) {
            if (preset_list || preset_name.empty() || preset_name == "list") {
                list_presets();
                return 0;
            }
            return run_preset(preset_name, base_config(c));
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
