#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stapcov/harness/experiments.hpp"

namespace stapcov::harness {

/// Command-line options shared by the subcommands; unset options leave the config untouched.
struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> methods;
    std::optional<std::string> snapshots;
    std::optional<int> trials;
    std::optional<int> threads;
    std::string input_path;
};

namespace detail {

inline void add_common(CLI::App* cmd, CliOptions& o, bool monte_carlo) {
    cmd->add_option("--config", o.config_path, "experiment config file (INI)");
    cmd->add_option("--seed", o.seed, "master RNG seed (falls back to config, then STAP_CCM_SEED)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--method", o.methods, "comma-separated estimator tags (SMI,MAP,R-MAP,S-MAP,RS-MAP)");
    cmd->add_option("--snapshots", o.snapshots, "snapshot count K, or start:step:stop for sweep");
    if (monte_carlo) {
        cmd->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", o.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    }
}

inline int single_snapshot_count(const std::string& text) {
    const SnapshotSweep s = parse_sweep(text);
    if (s.start != s.stop) throw Error("--snapshots: this subcommand takes a single K, got '" + text + "'");
    return s.start;
}

inline ExperimentConfig resolve(const CliOptions& o, const std::string& subcommand) {
    bool seed_in_file = false;
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path, &seed_in_file);
    cfg.seed = resolve_seed(o.seed, seed_in_file, cfg.seed);
    if (o.out_dir) cfg.output_dir = *o.out_dir;
    if (o.methods) {
        cfg.methods = parse_method_list(*o.methods);
        cfg.sweep_methods = cfg.methods;
    }
    if (o.trials) cfg.trials = *o.trials;
    if (o.threads) cfg.threads = *o.threads;
    if (o.snapshots) {
        if (subcommand == "sweep") cfg.sweep = parse_sweep(*o.snapshots);
        else if (subcommand == "loss-curve") cfg.curve_snapshots = single_snapshot_count(*o.snapshots);
        else cfg.spectrum_snapshots = single_snapshot_count(*o.snapshots);
    }
    cfg.validate();
    return cfg;
}

inline void print_files(std::ostream& out, const ExperimentResult& r) {
    for (const auto& f : r.files) out << "wrote " << f.string() << "\n";
}

inline int run_validate(const ExperimentConfig& cfg, std::ostream& out) {
    const CMatrix r = clairvoyant_ccm(cfg.radar);
    const StructureReport rep = check_structure(r, cfg.radar);
    bool ok = true;
    auto line = [&](bool pass, const std::string& name, const std::string& detail) {
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    };
    line(rep.hermitian_dev < 1e-12, "hermitian", "max|R - R^H| = " + full_precision(rep.hermitian_dev));
    line(rep.min_eigenvalue >= cfg.radar.noise_power - 1e-9, "positive-definite",
         "min eigenvalue = " + full_precision(rep.min_eigenvalue));
    line(rep.persymmetry_dev < 1e-10, "persymmetric", "||R - J R^T J||_F / ||R||_F = " + full_precision(rep.persymmetry_dev));
    line(rep.tbt_dev < 1e-10, "toeplitz-block-toeplitz", "max equal-lag deviation / max|R| = " + full_precision(rep.tbt_dev));
    out << "INFO rank  eigenvalues above 3*noise_power = " << rep.eigen_count_above_3_noise
        << ", brennan_rank = " << brennan_rank(cfg.radar) << "\n";
    return ok ? 0 : 1;
}

inline int run_estimate(const ExperimentConfig& cfg, const CliOptions& o, std::ostream& out) {
    const SnapshotSet data = read_snapshots_csv(o.input_path, cfg.radar.dimension());
    PriorParams prior;
    if (cfg.prior.kind == PriorKind::auxiliary_scm) {
        const SnapshotSet aux = SnapshotGenerator(cfg.radar, cfg.mode).draw(cfg.prior.aux_snapshots, derive_seed(cfg.seed, 1));
        prior = build_prior(cfg.radar, cfg.prior, &aux);
    } else {
        prior = build_prior(cfg.radar, cfg.prior);
    }
    const auto dir = detail::prepare_output_dir(cfg);
    for (Method m : cfg.methods) {
        const CovEstimate est = m == Method::CLAIRVOYANT ? clairvoyant_estimate(cfg.radar) : estimate(data, prior, m);
        const auto path = dir / ("estimate_" + std::string(file_stem(m)) + ".csv");
        write_text_file(path, matrix_to_csv(est.R, detail::header_for(cfg, "estimate, method=" + std::string(to_string(m)) +
                                                                              " snapshots=" + std::to_string(data.count()) +
                                                                              " input=" + o.input_path)));
        out << to_string(m) << ": snapshots=" << data.count();
        if (est.alpha) out << " alpha=" << full_precision(*est.alpha);
        if (est.sigma2) out << " sigma2=" << full_precision(*est.sigma2);
        if (est.rank_used) out << " rank_used=" << *est.rank_used;
        out << " -> " << path.string() << "\n";
    }
    return 0;
}

inline int run_simulate(const ExperimentConfig& cfg, std::ostream& out) {
    const auto dir = detail::prepare_output_dir(cfg);
    const SnapshotSet data = SnapshotGenerator(cfg.radar, cfg.mode).draw(cfg.spectrum_snapshots, derive_seed(cfg.seed, 0));
    const auto path = dir / "snapshots.csv";
    write_text_file(path, snapshots_to_csv(data, detail::header_for(cfg, "training snapshots")));
    out << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace detail

/// Entry point of the `stapcov` tool. Exit codes: 0 success, 1 runtime/config error
/// or failed validation, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Clutter covariance estimation for airborne STAP radar", "stapcov"};
    app.require_subcommand(1);
    CliOptions opts;

    auto* spectrum = app.add_subcommand("spectrum", "Capon angle-Doppler spectra of each estimator");
    auto* curve = app.add_subcommand("loss-curve", "Monte Carlo SINR loss versus Doppler");
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo mean SINR loss versus snapshot count");
    auto* est = app.add_subcommand("estimate", "Run estimators on a snapshot CSV and write the matrices");
    auto* validate = app.add_subcommand("validate", "Check structural properties of the clairvoyant covariance");
    auto* simulate = app.add_subcommand("simulate", "Write simulated training snapshots as CSV");
    detail::add_common(spectrum, opts, false);
    detail::add_common(curve, opts, true);
    detail::add_common(sweep, opts, true);
    detail::add_common(est, opts, false);
    est->add_option("--input", opts.input_path, "snapshot CSV (one row per snapshot, interleaved re,im)")->required();
    validate->add_option("--config", opts.config_path, "experiment config file (INI)");
    detail::add_common(simulate, opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        const ExperimentConfig cfg = detail::resolve(opts, name);
        if (name == "validate") return detail::run_validate(cfg, out);
        if (name == "estimate") return detail::run_estimate(cfg, opts, out);
        if (name == "simulate") return detail::run_simulate(cfg, out);
        ExperimentResult result;
        if (name == "spectrum") result = run_spectrum_experiment(cfg);
        else if (name == "loss-curve") result = run_loss_curve_experiment(cfg);
        else result = run_sweep_experiment(cfg);
        detail::print_files(out, result);
        for (const auto& [tag, value] : result.summary) out << "mean_loss_db " << tag << " = " << fixed(value, 4) << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace stapcov::harness
