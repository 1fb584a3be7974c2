#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stapcov/harness/config.hpp"
#include "stapcov/harness/csv.hpp"

namespace stapcov::harness {

struct ExperimentResult {
    std::vector<std::filesystem::path> files;
    /// Headline numbers per method tag (mean loss in dB for the Monte Carlo experiments).
    std::map<std::string, double> summary;
};

namespace detail {

inline std::filesystem::path prepare_output_dir(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw Error("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : std::string{}));
    return dir;
}

inline FileHeader header_for(const ExperimentConfig& cfg, std::string description) {
    return {config_hash(cfg), cfg.seed, std::move(description)};
}

inline std::filesystem::path write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                            const std::string& experiment) {
    const auto path = dir / "manifest.cfg";
    std::ostringstream o;
    // INI comments use ';' so the manifest can be fed back through --config.
    o << "; stapcov " << kVersion << "\n; experiment=" << experiment << " config_hash=" << config_hash(cfg)
      << " seed=" << cfg.seed << "\n"
      << to_ini(cfg);
    write_text_file(path, o.str());
    return path;
}

inline std::string gnuplot_header(const std::string& title) {
    return "# gnuplot script generated by stapcov " + std::string(kVersion) + "\nset datafile separator ','\nset title '" +
           title + "'\n";
}

inline std::vector<Method> with_clairvoyant(std::vector<Method> methods) {
    if (std::find(methods.begin(), methods.end(), Method::CLAIRVOYANT) == methods.end())
        methods.insert(methods.begin(), Method::CLAIRVOYANT);
    return methods;
}

}  // namespace detail

/// Capon angle-Doppler spectra of every configured method plus the clairvoyant model,
/// from one training set of `spectrum_snapshots` snapshots.
inline ExperimentResult run_spectrum_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = detail::prepare_output_dir(cfg);
    const SnapshotGenerator generator(cfg.radar, cfg.mode);
    const SnapshotSet data = generator.draw(cfg.spectrum_snapshots, derive_seed(cfg.seed, 0));
    PriorParams prior;
    if (cfg.prior.kind == PriorKind::auxiliary_scm) {
        const SnapshotSet aux = generator.draw(cfg.prior.aux_snapshots, derive_seed(cfg.seed, 1));
        prior = build_prior(cfg.radar, cfg.prior, &aux);
    } else {
        prior = build_prior(cfg.radar, cfg.prior);
    }
    const auto spatial = linspace(-0.5, 0.5, cfg.spectrum_spatial_bins);
    const auto doppler = linspace(-0.5, 0.5, cfg.spectrum_doppler_bins);

    ExperimentResult result;
    for (Method m : detail::with_clairvoyant(cfg.methods)) {
        const CovEstimate est = m == Method::CLAIRVOYANT ? clairvoyant_estimate(cfg.radar) : estimate(data, prior, m);
        const AngleDopplerSpectrum spec = capon_spectrum(est, spatial, doppler, cfg.radar);
        std::ostringstream o;
        o << header_text(detail::header_for(cfg, "capon spectrum, method=" + std::string(to_string(m)) +
                                                     " snapshots=" + std::to_string(cfg.spectrum_snapshots)))
          << "f_s,f_d,power_db\n";
        for (std::size_t i = 0; i < doppler.size(); ++i)
            for (std::size_t j = 0; j < spatial.size(); ++j)
                o << fixed(spatial[j], 6) << ',' << fixed(doppler[i], 6) << ','
                  << fixed(spec.power_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 6) << '\n';
        const std::string stem = "spectrum_" + std::string(file_stem(m));
        write_text_file(dir / (stem + ".csv"), o.str());
        write_text_file(dir / (stem + ".gp"),
                        detail::gnuplot_header(std::string(to_string(m)) + " Capon spectrum") +
                            "set xlabel 'normalized spatial frequency'\nset ylabel 'normalized Doppler'\n"
                            "set view map\nset cbrange [-60:0]\nsplot '" + stem + ".csv' using 1:2:3 with image notitle\n");
        result.files.push_back(dir / (stem + ".csv"));
        result.files.push_back(dir / (stem + ".gp"));
    }
    result.files.push_back(detail::write_manifest(cfg, dir, "spectrum"));
    return result;
}

/// Trial-averaged SINR loss versus Doppler at `curve_snapshots` snapshots.
inline ExperimentResult run_loss_curve_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = detail::prepare_output_dir(cfg);
    const MonteCarloSetup setup = cfg.monte_carlo();
    const auto methods = detail::with_clairvoyant(cfg.methods);
    const TrialLosses losses = run_loss_trials(setup, methods, cfg.curve_snapshots, cfg.trials, cfg.seed, cfg.threads);

    ExperimentResult result;
    std::string plot = detail::gnuplot_header("SINR loss, K=" + std::to_string(cfg.curve_snapshots)) +
                       "set xlabel 'normalized Doppler'\nset ylabel 'SINR loss (dB)'\nplot ";
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const auto curve = losses.curve_db(m, cfg.averaging);
        std::ostringstream o;
        o << header_text(detail::header_for(cfg, "sinr loss curve, method=" + std::string(to_string(methods[m])) +
                                                     " snapshots=" + std::to_string(cfg.curve_snapshots) +
                                                     " trials=" + std::to_string(cfg.trials) +
                                                     " target_spatial=" + full_precision(setup.target())))
          << "f_d,mean_loss_db\n";
        for (std::size_t b = 0; b < curve.size(); ++b) o << fixed(setup.doppler[b], 6) << ',' << fixed(curve[b], 6) << '\n';
        const std::string stem = "loss_" + std::string(file_stem(methods[m]));
        write_text_file(dir / (stem + ".csv"), o.str());
        result.files.push_back(dir / (stem + ".csv"));
        result.summary[std::string(to_string(methods[m]))] = losses.mean_db(m, cfg.averaging);
        plot += std::string(m ? ", " : "") + "'" + stem + ".csv' using 1:2 with lines title '" +
                std::string(to_string(methods[m])) + "'";
    }
    write_text_file(dir / "loss_curves.gp", plot + "\n");
    result.files.push_back(dir / "loss_curves.gp");
    result.files.push_back(detail::write_manifest(cfg, dir, "loss-curve"));
    return result;
}

/// Mean SINR loss for every K of the sweep and every sweep method (plus the clairvoyant reference).
/// All K values share the master seed, so smaller training sets are prefixes of larger ones.
inline ExperimentResult run_sweep_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = detail::prepare_output_dir(cfg);
    const MonteCarloSetup setup = cfg.monte_carlo();
    const auto methods = detail::with_clairvoyant(cfg.sweep_methods);

    std::ostringstream o;
    o << header_text(detail::header_for(cfg, "mean sinr loss vs snapshots, sweep=" + format_sweep(cfg.sweep) +
                                                 " trials=" + std::to_string(cfg.trials)))
      << "K,method,mean_loss_db\n";
    ExperimentResult result;
    for (int k : cfg.sweep.values()) {
        const TrialLosses losses = run_loss_trials(setup, methods, k, cfg.trials, cfg.seed, cfg.threads);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const double mean = losses.mean_db(m, cfg.averaging);
            o << k << ',' << to_string(methods[m]) << ',' << fixed(mean, 6) << '\n';
            result.summary[std::string(to_string(methods[m])) + "@" + std::to_string(k)] = mean;
        }
    }
    write_text_file(dir / "sweep.csv", o.str());
    std::string plot = detail::gnuplot_header("mean SINR loss vs snapshots") +
                       "set xlabel 'snapshots K'\nset ylabel 'mean SINR loss (dB)'\nplot ";
    for (std::size_t m = 0; m < methods.size(); ++m)
        plot += std::string(m ? ", " : "") + "'sweep.csv' using 1:(stringcolumn(2) eq '" + std::string(to_string(methods[m])) +
                "' ? $3 : NaN) with linespoints title '" + std::string(to_string(methods[m])) + "'";
    write_text_file(dir / "sweep.gp", plot + "\n");
    result.files.push_back(dir / "sweep.csv");
    result.files.push_back(dir / "sweep.gp");
    result.files.push_back(detail::write_manifest(cfg, dir, "sweep"));
    return result;
}

}  // namespace stapcov::harness
