#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stapcov/evaluation.hpp"

namespace stapcov::harness {

/// Inclusive snapshot sweep start:step:stop, or a single value.
struct SnapshotSweep {
    int start = 8;
    int step = 8;
    int stop = 96;

    std::vector<int> values() const {
        std::vector<int> out;
        for (int k = start; k <= stop; k += step) out.push_back(k);
        return out;
    }

    static SnapshotSweep single(int k) { return {k, 1, k}; }
};

inline SnapshotSweep parse_sweep(const std::string& text) {
    auto parse_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw Error("snapshot spec '" + text + "': '" + s + "' is not an integer");
        return v;
    };
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    SnapshotSweep out;
    if (parts.size() == 1) {
        out = SnapshotSweep::single(parse_int(parts[0]));
    } else if (parts.size() == 3) {
        out = {parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2])};
    } else {
        throw Error("snapshot spec '" + text + "' must be K or start:step:stop");
    }
    if (out.start < 0) throw Error("snapshot spec '" + text + "': counts must be >= 0");
    if (out.step < 1 || out.stop < out.start) throw Error("snapshot spec '" + text + "' must be non-empty and increasing");
    return out;
}

inline std::string format_sweep(const SnapshotSweep& s) {
    if (s.start == s.stop) return std::to_string(s.start);
    return std::to_string(s.start) + ":" + std::to_string(s.step) + ":" + std::to_string(s.stop);
}

inline std::vector<Method> parse_method_list(const std::string& text) {
    std::vector<Method> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_method(item.substr(b, e - b + 1)));
    }
    if (out.empty()) throw Error("method list is empty");
    return out;
}

inline std::string format_method_list(const std::vector<Method>& methods) {
    std::string out;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (i) out += ",";
        out += to_string(methods[i]);
    }
    return out;
}

/// Everything an experiment run depends on. `threads` is deliberately not part of
/// the serialized form: results never depend on it.
struct ExperimentConfig {
    RadarConfig radar;
    PriorSpec prior;
    GenerationMode mode = GenerationMode::coloring;
    std::vector<Method> methods{Method::SMI, Method::MAP, Method::R_MAP, Method::S_MAP, Method::RS_MAP};
    std::vector<Method> sweep_methods{Method::MAP, Method::R_MAP, Method::S_MAP, Method::RS_MAP};
    int spectrum_snapshots = 8;
    int curve_snapshots = 16;
    SnapshotSweep sweep;
    int trials = 200;
    std::uint64_t seed = 1;
    std::optional<double> target_spatial;
    LossAveraging averaging = LossAveraging::linear;
    int spectrum_spatial_bins = 101;
    int spectrum_doppler_bins = 101;
    int curve_doppler_bins = 201;
    std::string output_dir = "out";
    int threads = 1;

    void validate() const {
        radar.validate();
        if (trials < 1) throw Error("config: [experiment] trials must be >= 1");
        if (spectrum_snapshots < 0 || curve_snapshots < 0) throw Error("config: snapshot counts must be >= 0");
        if (sweep.values().empty()) throw Error("config: [experiment] sweep is empty");
        if (spectrum_spatial_bins < 2 || spectrum_doppler_bins < 2 || curve_doppler_bins < 2)
            throw Error("config: grid sizes must be >= 2");
        if (threads < 1) throw Error("config: threads must be >= 1");
        if (prior.aux_snapshots < 1) throw Error("config: [prior] aux_snapshots must be >= 1");
    }

    MonteCarloSetup monte_carlo() const {
        MonteCarloSetup s;
        s.radar = radar;
        s.prior = prior;
        s.mode = mode;
        s.doppler = linspace(-0.5, 0.5, curve_doppler_bins);
        s.target_spatial = target_spatial;
        return s;
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    if (v == -std::numeric_limits<double>::infinity()) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T parse_value(const std::string& field, const std::string& raw);

template <>
inline double parse_value<double>(const std::string& field, const std::string& raw) {
    if (raw == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != raw.size()) throw Error("config error: " + field + ": expected a number, got '" + raw + "'");
    return v;
}

template <>
inline int parse_value<int>(const std::string& field, const std::string& raw) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != raw.size() || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw Error("config error: " + field + ": expected an integer, got '" + raw + "'");
    return static_cast<int>(v);
}

template <>
inline std::uint64_t parse_value<std::uint64_t>(const std::string& field, const std::string& raw) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!raw.empty() && raw[0] != '-') v = std::stoull(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != raw.size()) throw Error("config error: " + field + ": expected an unsigned 64-bit integer, got '" + raw + "'");
    return v;
}

/// Reads [section] key entries, rejecting keys that are not part of the schema.
class SectionReader {
public:
    SectionReader(const boost::property_tree::ptree& root, std::string section, std::set<std::string> known)
        : section_(std::move(section)) {
        if (auto child = root.get_child_optional(section_)) {
            node_ = &*child;
            for (const auto& [key, value] : *child)
                if (!known.count(key)) throw Error("config error: [" + section_ + "] " + key + ": unknown key");
        }
    }

    template <class T>
    void read(const std::string& key, T& target) const {
        if (auto raw = raw_value(key)) target = parse_value<T>(field(key), *raw);
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& target) const {
        if (auto raw = raw_value(key)) target = parse_value<T>(field(key), *raw);
    }

    template <class F>
    void read_with(const std::string& key, F&& convert) const {
        if (auto raw = raw_value(key)) {
            try {
                convert(*raw);
            } catch (const Error& e) {
                throw Error("config error: " + field(key) + ": " + e.what());
            }
        }
    }

    std::optional<std::string> raw_value(const std::string& key) const {
        if (node_ == nullptr) return std::nullopt;
        auto v = node_->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        const auto b = v->find_first_not_of(" \t");
        const auto e = v->find_last_not_of(" \t");
        return b == std::string::npos ? std::string{} : v->substr(b, e - b + 1);
    }

private:
    std::string field(const std::string& key) const { return "[" + section_ + "] " + key; }

    std::string section_;
    const boost::property_tree::ptree* node_ = nullptr;
};

}  // namespace detail

/// Parses the INI text of an experiment configuration. Missing keys keep defaults.
/// `seed_found` reports whether the text set [experiment] seed.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source_name, bool* seed_found = nullptr) {
    boost::property_tree::ptree root;
    try {
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error("config parse error: " + source_name + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    const std::set<std::string> sections{"radar", "prior", "experiment", "grids", "output"};
    for (const auto& [name, child] : root)
        if (!sections.count(name)) throw Error("config error: unknown section or top-level key '" + name + "'");

    ExperimentConfig cfg;
    using detail::SectionReader;

    const SectionReader radar(root, "radar",
                              {"elements", "pulses", "spacing", "wavelength", "prf", "velocity", "altitude", "crab_deg",
                               "slant_range", "patches", "cnr_db", "noise_power", "patch_gain"});
    radar.read("elements", cfg.radar.elements);
    radar.read("pulses", cfg.radar.pulses);
    radar.read("spacing", cfg.radar.spacing);
    radar.read("wavelength", cfg.radar.wavelength);
    radar.read("prf", cfg.radar.prf);
    radar.read("velocity", cfg.radar.velocity);
    radar.read("altitude", cfg.radar.altitude);
    radar.read("crab_deg", cfg.radar.crab_deg);
    radar.read("slant_range", cfg.radar.slant_range);
    radar.read("patches", cfg.radar.patches);
    radar.read("cnr_db", cfg.radar.cnr_db);
    radar.read("noise_power", cfg.radar.noise_power);
    radar.read_with("patch_gain", [&](const std::string& raw) {
        cfg.radar.patch_gain.clear();
        std::stringstream ss(raw);
        for (std::string item; std::getline(ss, item, ',');)
            cfg.radar.patch_gain.push_back(detail::parse_value<double>("[radar] patch_gain", item));
    });

    const SectionReader prior(root, "prior",
                              {"kind", "strength", "rank", "lower", "upper", "velocity_factor", "crab_offset_deg",
                               "aux_snapshots", "aux_load"});
    prior.read_with("kind", [&](const std::string& raw) { cfg.prior.kind = parse_prior_kind(raw); });
    prior.read("strength", cfg.prior.strength);
    prior.read("rank", cfg.prior.rank);
    prior.read("lower", cfg.prior.lower);
    prior.read("upper", cfg.prior.upper);
    prior.read("velocity_factor", cfg.prior.velocity_factor);
    prior.read("crab_offset_deg", cfg.prior.crab_offset_deg);
    prior.read("aux_snapshots", cfg.prior.aux_snapshots);
    prior.read("aux_load", cfg.prior.aux_load);

    const SectionReader exp(root, "experiment",
                            {"methods", "sweep_methods", "spectrum_snapshots", "curve_snapshots", "sweep", "trials",
                             "seed", "mode", "target_spatial", "averaging"});
    exp.read_with("methods", [&](const std::string& raw) { cfg.methods = parse_method_list(raw); });
    exp.read_with("sweep_methods", [&](const std::string& raw) { cfg.sweep_methods = parse_method_list(raw); });
    exp.read("spectrum_snapshots", cfg.spectrum_snapshots);
    exp.read("curve_snapshots", cfg.curve_snapshots);
    exp.read_with("sweep", [&](const std::string& raw) { cfg.sweep = parse_sweep(raw); });
    exp.read("trials", cfg.trials);
    if (seed_found) *seed_found = exp.raw_value("seed").has_value();
    exp.read("seed", cfg.seed);
    exp.read_with("mode", [&](const std::string& raw) { cfg.mode = parse_generation_mode(raw); });
    exp.read("target_spatial", cfg.target_spatial);
    exp.read_with("averaging", [&](const std::string& raw) {
        if (raw == "linear") cfg.averaging = LossAveraging::linear;
        else if (raw == "decibel") cfg.averaging = LossAveraging::decibel;
        else throw Error("expected 'linear' or 'decibel'");
    });

    const SectionReader grids(root, "grids", {"spectrum_spatial", "spectrum_doppler", "curve_doppler"});
    grids.read("spectrum_spatial", cfg.spectrum_spatial_bins);
    grids.read("spectrum_doppler", cfg.spectrum_doppler_bins);
    grids.read("curve_doppler", cfg.curve_doppler_bins);

    const SectionReader output(root, "output", {"dir"});
    output.read_with("dir", [&](const std::string& raw) { cfg.output_dir = raw; });

    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(std::string(e.what()).rfind("config", 0) == 0 ? e.what() : std::string("config error: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, bool* seed_found = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.string(), seed_found);
}

/// Canonical INI form of the resolved configuration (threads excluded).
inline std::string to_ini(const ExperimentConfig& cfg) {
    using detail::fmt_double;
    const RadarConfig& r = cfg.radar;
    const PriorSpec& p = cfg.prior;
    std::ostringstream o;
    o << "[radar]\n"
      << "elements = " << r.elements << "\n"
      << "pulses = " << r.pulses << "\n"
      << "spacing = " << fmt_double(r.spacing) << "\n"
      << "wavelength = " << fmt_double(r.wavelength) << "\n"
      << "prf = " << fmt_double(r.prf) << "\n"
      << "velocity = " << fmt_double(r.velocity) << "\n"
      << "altitude = " << fmt_double(r.altitude) << "\n"
      << "crab_deg = " << fmt_double(r.crab_deg) << "\n"
      << "slant_range = " << fmt_double(r.slant_range) << "\n"
      << "patches = " << r.patches << "\n"
      << "cnr_db = " << fmt_double(r.cnr_db) << "\n"
      << "noise_power = " << fmt_double(r.noise_power) << "\n";
    if (!r.patch_gain.empty()) {
        o << "patch_gain = ";
        for (std::size_t i = 0; i < r.patch_gain.size(); ++i) o << (i ? "," : "") << fmt_double(r.patch_gain[i]);
        o << "\n";
    }
    o << "\n[prior]\n"
      << "kind = " << to_string(p.kind) << "\n";
    if (p.strength) o << "strength = " << fmt_double(*p.strength) << "\n";
    if (p.rank) o << "rank = " << *p.rank << "\n";
    if (p.lower) o << "lower = " << fmt_double(*p.lower) << "\n";
    if (p.upper) o << "upper = " << fmt_double(*p.upper) << "\n";
    o << "velocity_factor = " << fmt_double(p.velocity_factor) << "\n"
      << "crab_offset_deg = " << fmt_double(p.crab_offset_deg) << "\n"
      << "aux_snapshots = " << p.aux_snapshots << "\n"
      << "aux_load = " << fmt_double(p.aux_load) << "\n"
      << "\n[experiment]\n"
      << "methods = " << format_method_list(cfg.methods) << "\n"
      << "sweep_methods = " << format_method_list(cfg.sweep_methods) << "\n"
      << "spectrum_snapshots = " << cfg.spectrum_snapshots << "\n"
      << "curve_snapshots = " << cfg.curve_snapshots << "\n"
      << "sweep = " << format_sweep(cfg.sweep) << "\n"
      << "trials = " << cfg.trials << "\n"
      << "seed = " << cfg.seed << "\n"
      << "mode = " << to_string(cfg.mode) << "\n";
    if (cfg.target_spatial) o << "target_spatial = " << fmt_double(*cfg.target_spatial) << "\n";
    o << "averaging = " << (cfg.averaging == LossAveraging::linear ? "linear" : "decibel") << "\n"
      << "\n[grids]\n"
      << "spectrum_spatial = " << cfg.spectrum_spatial_bins << "\n"
      << "spectrum_doppler = " << cfg.spectrum_doppler_bins << "\n"
      << "curve_doppler = " << cfg.curve_doppler_bins << "\n"
      << "\n[output]\n"
      << "dir = " << cfg.output_dir << "\n";
    return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hash of the resolved configuration; the output directory does not contribute.
inline std::string config_hash(const ExperimentConfig& cfg) {
    ExperimentConfig copy = cfg;
    copy.output_dir.clear();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_ini(copy))));
    return buf;
}

/// Seed precedence: explicit flag, then the config file, then STAP_CCM_SEED, then the default.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, bool config_has_seed, std::uint64_t config_seed) {
    if (flag) return *flag;
    if (config_has_seed) return config_seed;
    if (const char* env = std::getenv("STAP_CCM_SEED"); env != nullptr && *env != '\0')
        return detail::parse_value<std::uint64_t>("STAP_CCM_SEED", env);
    return config_seed;
}

}  // namespace stapcov::harness
