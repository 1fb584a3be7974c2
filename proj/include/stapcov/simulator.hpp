#pragma once

#include <cstdint>
#include <string_view>

#include "stapcov/geometry.hpp"
#include "stapcov/rng.hpp"

namespace stapcov {

enum class GenerationMode {
    coloring,   ///< x = R^{1/2} z with R the clairvoyant CCM
    patch_sum,  ///< x = sum_i a_i v_i + n with fresh patch amplitudes per snapshot
};

inline std::string_view to_string(GenerationMode m) { return m == GenerationMode::coloring ? "coloring" : "patch_sum"; }

inline GenerationMode parse_generation_mode(std::string_view s) {
    if (s == "coloring") return GenerationMode::coloring;
    if (s == "patch_sum" || s == "patch-sum") return GenerationMode::patch_sum;
    throw Error("unknown generation mode '" + std::string(s) + "'");
}

/// p x K training data; column k is snapshot x_k.
struct SnapshotSet {
    CMatrix X;
    std::uint64_t seed = 0;
    GenerationMode mode = GenerationMode::coloring;

    Eigen::Index count() const { return X.cols(); }
    Eigen::Index dimension() const { return X.rows(); }
};

inline CVector complex_gaussian_vector(Eigen::Index p, Xoshiro256& rng) {
    if (p < 1) throw Error("complex_gaussian_vector: dimension must be >= 1");
    CVector z(p);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.complex_normal();
    return z;
}

/// Draws snapshots for one radar configuration.
///
/// The per-configuration work (square root of R, or the patch steering matrix) is
/// done once, so Monte Carlo loops should hold one generator and call `draw` per trial.
/// Draw order is snapshot-major: all variates of snapshot k before any of k + 1;
/// within a snapshot, coloring draws p components and patch_sum draws N_c patch
/// amplitudes followed by p noise components.
class SnapshotGenerator {
public:
    SnapshotGenerator(const RadarConfig& cfg, GenerationMode mode) : cfg_(cfg), mode_(mode) {
        cfg_.validate();
        if (mode_ == GenerationMode::coloring) {
            coloring_ = hermitian_sqrt(clairvoyant_ccm(cfg_));
        } else {
            const auto ring = clutter_ring(cfg_);
            steering_ = patch_steering_matrix(cfg_, ring);
            amplitude_scale_.resize(static_cast<Eigen::Index>(ring.size()));
            for (std::size_t i = 0; i < ring.size(); ++i)
                amplitude_scale_(static_cast<Eigen::Index>(i)) = std::sqrt(ring[i].power);
        }
    }

    const RadarConfig& config() const { return cfg_; }
    GenerationMode mode() const { return mode_; }

    SnapshotSet draw(Eigen::Index count, std::uint64_t seed) const {
        if (count < 0) throw Error("generate_snapshots: snapshot count must be >= 0");
        const Eigen::Index p = cfg_.dimension();
        SnapshotSet out{CMatrix(p, count), seed, mode_};
        if (count == 0) return out;
        Xoshiro256 rng(seed);
        if (mode_ == GenerationMode::coloring) {
            CMatrix z(p, count);
            for (Eigen::Index k = 0; k < count; ++k)
                for (Eigen::Index i = 0; i < p; ++i) z(i, k) = rng.complex_normal();
            out.X.noalias() = coloring_ * z;
            return out;
        }
        // Chunked so the N_c x K amplitude block stays small for large K.
        constexpr Eigen::Index kChunk = 1024;
        const Eigen::Index nc = steering_.cols();
        const double noise_sd = std::sqrt(cfg_.noise_power);
        for (Eigen::Index start = 0; start < count; start += kChunk) {
            const Eigen::Index width = std::min(kChunk, count - start);
            CMatrix amp(nc, width);
            CMatrix noise(p, width);
            for (Eigen::Index k = 0; k < width; ++k) {
                for (Eigen::Index i = 0; i < nc; ++i) amp(i, k) = amplitude_scale_(i) * rng.complex_normal();
                for (Eigen::Index i = 0; i < p; ++i) noise(i, k) = noise_sd * rng.complex_normal();
            }
            out.X.middleCols(start, width).noalias() = steering_ * amp;
            out.X.middleCols(start, width) += noise;
        }
        return out;
    }

private:
    RadarConfig cfg_;
    GenerationMode mode_;
    CMatrix coloring_;
    CMatrix steering_;
    Eigen::VectorXd amplitude_scale_;
};

inline SnapshotSet generate_snapshots(const RadarConfig& cfg, Eigen::Index count, std::uint64_t seed,
                                      GenerationMode mode = GenerationMode::coloring) {
    if (count < 0) throw Error("generate_snapshots: snapshot count must be >= 0");
    return SnapshotGenerator(cfg, mode).draw(count, seed);
}

}  // namespace stapcov
