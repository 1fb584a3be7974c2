#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "stapcov/linalg.hpp"
#include "stapcov/types.hpp"

namespace stapcov {

/// Platform, array and waveform parameters of a side- or forward-looking ULA radar.
///
/// Defaults reproduce the simulation set-up used throughout this project: an 8-element,
/// half-wavelength array, 8 pulses, forward-looking (crab angle 90 deg), 9 km altitude
/// and a 90 km clutter ring split into 360 patches. Angles are in degrees.
struct RadarConfig {
    int elements = 8;                ///< M
    int pulses = 8;                  ///< N
    double spacing = 0.33;           ///< d [m]
    double wavelength = 0.66;        ///< lambda [m]
    double prf = 300.0;              ///< f_r [Hz]
    double velocity = 50.0;          ///< v_p [m/s]
    double altitude = 9000.0;        ///< H [m]
    double crab_deg = 90.0;          ///< phi; 0 = side-looking, 90 = forward-looking
    double slant_range = 90000.0;    ///< [m]
    int patches = 360;               ///< N_c
    double cnr_db = 30.0;            ///< total clutter power over noise power
    double noise_power = 1.0;        ///< sigma_n^2 (linear)
    /// Relative per-patch gains (length N_c); empty means uniform terrain.
    /// The profile is rescaled so the total clutter power still matches cnr_db.
    std::vector<double> patch_gain;

    int dimension() const { return elements * pulses; }

    void validate() const {
        auto fail = [](const std::string& what) { throw Error("invalid radar config: " + what); };
        if (elements < 1) fail("elements must be >= 1");
        if (pulses < 1) fail("pulses must be >= 1");
        if (patches < 1) fail("patches must be >= 1");
        if (!(spacing > 0.0)) fail("spacing must be > 0");
        if (!(wavelength > 0.0)) fail("wavelength must be > 0");
        if (!(prf > 0.0)) fail("prf must be > 0");
        if (!(noise_power > 0.0)) fail("noise_power must be > 0");
        if (!(altitude > 0.0)) fail("altitude must be > 0");
        if (!(altitude < slant_range)) fail("altitude must be below slant_range (elevation undefined)");
        if (std::isnan(cnr_db) || cnr_db == std::numeric_limits<double>::infinity()) fail("cnr_db must be finite or -inf");
        if (!patch_gain.empty()) {
            if (patch_gain.size() != static_cast<std::size_t>(patches)) fail("patch_gain length must equal patches");
            double total = 0.0;
            for (double g : patch_gain) {
                if (!(g >= 0.0)) fail("patch_gain entries must be >= 0");
                total += g;
            }
            if (!(total > 0.0)) fail("patch_gain must have a positive sum");
        }
    }
};

struct ClutterPatch {
    double azimuth_deg;    ///< gamma
    double elevation_deg;  ///< theta
    double doppler;        ///< normalized Doppler f_d [cycles/pulse]
    double spatial;        ///< normalized spatial frequency f_s [cycles/element]
    double power;          ///< sigma_i^2
};

struct FrequencyPair {
    double doppler;
    double spatial;
};

struct SpaceTimeSteering {
    CVector v;
    double doppler;
    double spatial;
};

/// [1, e^{j2pi f}, ..., e^{j2pi (n-1) f}]^T
inline CVector phase_ramp(double frequency, int length) {
    CVector out(length);
    for (int k = 0; k < length; ++k) out(k) = std::polar(1.0, 2.0 * kPi * frequency * k);
    return out;
}

inline CVector temporal_steering(double doppler, int pulses) { return phase_ramp(doppler, pulses); }

inline CVector spatial_steering(double spatial, int elements) { return phase_ramp(spatial, elements); }

/// Temporal (outer) Kronecker spatial (inner): entry n*M + m = e^{j2pi (n f_d + m f_s)}.
inline SpaceTimeSteering space_time_steering(double doppler, double spatial, int pulses, int elements) {
    const CVector t = temporal_steering(doppler, pulses);
    const CVector s = spatial_steering(spatial, elements);
    CVector v(pulses * elements);
    for (int n = 0; n < pulses; ++n) v.segment(n * elements, elements) = t(n) * s;
    return {std::move(v), doppler, spatial};
}

inline SpaceTimeSteering space_time_steering(double doppler, double spatial, const RadarConfig& cfg) {
    return space_time_steering(doppler, spatial, cfg.pulses, cfg.elements);
}

/// Elevation of the clutter ring, arcsin(H / slant range), in degrees.
inline double ring_elevation_deg(const RadarConfig& cfg) {
    if (!(cfg.altitude < cfg.slant_range) || !(cfg.altitude > 0.0))
        throw Error("ring elevation undefined: altitude must lie in (0, slant_range)");
    return rad2deg(std::asin(cfg.altitude / cfg.slant_range));
}

/// f_d = 2 v_p / (lambda f_r) cos(gamma) cos(theta);  f_s = d / lambda cos(theta) cos(gamma - phi).
inline FrequencyPair patch_frequencies(double azimuth_deg, double elevation_deg, const RadarConfig& cfg) {
    const double gamma = deg2rad(azimuth_deg);
    const double theta = deg2rad(elevation_deg);
    const double phi = deg2rad(cfg.crab_deg);
    return {2.0 * cfg.velocity / (cfg.wavelength * cfg.prf) * std::cos(gamma) * std::cos(theta),
            cfg.spacing / cfg.wavelength * std::cos(theta) * std::cos(gamma - phi)};
}

/// Spatial frequency of the look direction (azimuth equal to the crab angle).
inline double look_direction_spatial(const RadarConfig& cfg) {
    return cfg.spacing / cfg.wavelength * std::cos(deg2rad(ring_elevation_deg(cfg)));
}

inline double clutter_to_noise_linear(const RadarConfig& cfg) { return std::pow(10.0, cfg.cnr_db / 10.0); }

/// N_c patches on a uniform azimuth grid over [-180, 180) deg at the common ring elevation.
inline std::vector<ClutterPatch> clutter_ring(const RadarConfig& cfg) {
    cfg.validate();
    const double elevation = ring_elevation_deg(cfg);
    const double total = clutter_to_noise_linear(cfg) * cfg.noise_power;
    double gain_sum = static_cast<double>(cfg.patches);
    if (!cfg.patch_gain.empty()) {
        gain_sum = 0.0;
        for (double g : cfg.patch_gain) gain_sum += g;
    }
    std::vector<ClutterPatch> ring;
    ring.reserve(static_cast<std::size_t>(cfg.patches));
    const double step = 360.0 / cfg.patches;
    for (int i = 0; i < cfg.patches; ++i) {
        const double azimuth = -180.0 + step * i;
        const FrequencyPair f = patch_frequencies(azimuth, elevation, cfg);
        const double gain = cfg.patch_gain.empty() ? 1.0 : cfg.patch_gain[static_cast<std::size_t>(i)];
        ring.push_back({azimuth, elevation, f.doppler, f.spatial, total * gain / gain_sum});
    }
    return ring;
}

/// p x N_c matrix whose columns are the patch steering vectors.
inline CMatrix patch_steering_matrix(const RadarConfig& cfg, const std::vector<ClutterPatch>& ring) {
    CMatrix v(cfg.dimension(), static_cast<Eigen::Index>(ring.size()));
    for (std::size_t i = 0; i < ring.size(); ++i)
        v.col(static_cast<Eigen::Index>(i)) = space_time_steering(ring[i].doppler, ring[i].spatial, cfg).v;
    return v;
}

/// R = sum_i power_i v_i v_i^H + sigma_n^2 I.
inline CMatrix clairvoyant_ccm(const RadarConfig& cfg) {
    const auto ring = clutter_ring(cfg);
    const CMatrix v = patch_steering_matrix(cfg, ring);
    Eigen::VectorXd power(static_cast<Eigen::Index>(ring.size()));
    for (std::size_t i = 0; i < ring.size(); ++i) power(static_cast<Eigen::Index>(i)) = ring[i].power;
    CMatrix r = v * power.cast<cdouble>().asDiagonal() * v.adjoint();
    r.diagonal().array() += cfg.noise_power;
    return hermitian_part(r);
}

/// Result of the structural checks run by `validate` and the acceptance suite.
struct StructureReport {
    double hermitian_dev = 0.0;       ///< max |R - R^H|
    double min_eigenvalue = 0.0;
    double persymmetry_dev = 0.0;     ///< relative Frobenius
    double tbt_dev = 0.0;             ///< relative to max |R|
    int eigen_count_above_3_noise = 0;
};

inline StructureReport check_structure(const CMatrix& r, const RadarConfig& cfg) {
    StructureReport rep;
    rep.hermitian_dev = hermitian_deviation(r);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(r, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = solver.eigenvalues().minCoeff();
    rep.persymmetry_dev = persymmetry_deviation(r);
    rep.tbt_dev = tbt_deviation(r, cfg.pulses, cfg.elements);
    rep.eigen_count_above_3_noise =
        static_cast<int>((solver.eigenvalues().array() > 3.0 * cfg.noise_power).count());
    return rep;
}

}  // namespace stapcov
