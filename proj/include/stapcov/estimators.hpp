#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "stapcov/geometry.hpp"
#include "stapcov/linalg.hpp"
#include "stapcov/simulator.hpp"

namespace stapcov {

/// Hyperparameters of the MAP-family estimators.
struct PriorParams {
    CMatrix R0;             ///< prior matrix, already scaled by the strength
    double strength = 0.0;  ///< l, inverse-Wishart degrees of freedom surrogate
    int rank = 1;           ///< r
    double lower = 0.0;     ///< LB on the noise level
    double upper = 0.0;     ///< UB on the noise level

    void validate(Eigen::Index p) const {
        if (R0.rows() != p || R0.cols() != p) throw Error("prior: R0 must be " + std::to_string(p) + "x" + std::to_string(p));
        if (!(strength >= 0.0)) throw Error("prior: strength l must be >= 0");
        if (rank < 1 || rank > p) throw Error("prior: rank r must lie in [1, p]");
        if (!(lower > 0.0) || !(upper >= lower)) throw Error("prior: bounds must satisfy 0 < LB <= UB");
    }
};

struct CovEstimate {
    CMatrix R;
    Method method = Method::SMI;
    std::optional<double> sigma2;  ///< fitted noise level (rank-constrained methods)
    std::optional<int> rank_used;  ///< (rank-constrained methods)
    std::optional<double> alpha;   ///< n + l + p (MAP family)

    /// R - sigma2 I, the low-rank clutter part of a rank-constrained estimate.
    CMatrix low_rank_part() const {
        CMatrix out = R;
        if (sigma2) out.diagonal().array() -= *sigma2;
        return out;
    }
};

/// (1/K) X X^H.
inline CovEstimate scm(const SnapshotSet& data) {
    if (data.count() == 0) throw Error("scm: at least one snapshot is required");
    CMatrix r = data.X * data.X.adjoint();
    r /= static_cast<double>(data.count());
    return {hermitian_part(r), Method::SMI, std::nullopt, std::nullopt, std::nullopt};
}

/// X X^H + R0, the sufficient statistic shared by the MAP family.
inline CMatrix posterior_scatter(const SnapshotSet& data, const PriorParams& prior) {
    prior.validate(data.dimension());
    CMatrix a = data.X * data.X.adjoint();
    a += prior.R0;
    return hermitian_part(a);
}

inline double map_alpha(const SnapshotSet& data, const PriorParams& prior) {
    return static_cast<double>(data.count()) + prior.strength + static_cast<double>(data.dimension());
}

namespace detail {
inline void require_positive_definite(const CMatrix& a, std::string_view who) {
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error(std::string(who) + ": X X^H + R0 is not positive definite; the estimator is undefined");
}
}  // namespace detail

/// Unconstrained MAP: (X X^H + R0) / (n + l + p).
inline CovEstimate map_unstructured(const SnapshotSet& data, const PriorParams& prior) {
    const CMatrix a = posterior_scatter(data, prior);
    detail::require_positive_definite(a, "map_unstructured");
    const double alpha = map_alpha(data, prior);
    return {a / alpha, Method::MAP, std::nullopt, std::nullopt, alpha};
}

/// Projection onto persymmetric matrices: (C + J C^T J) / 2.
inline CMatrix persym_project(const CMatrix& c) {
    if (c.rows() != c.cols() || c.rows() < 1) throw Error("persym_project: expected a non-empty square matrix");
    return 0.5 * (c + exchange_transpose(c));
}

/// Closed-form minimizer of tr{(M + s I)^{-1} A} - alpha log|(M + s I)^{-1}|
/// subject to rank(M) <= r, M PSD and LB <= s <= UB.
///
/// The minimizer shares A's eigenvectors. The noise level is the mean of the p - r
/// trailing eigenvalues over alpha, clamped to [LB, UB]; leading eigenvalues become
/// max(d_k / alpha, s) so that M stays PSD.
inline CovEstimate rank_constrained_map(const CMatrix& a, double alpha, const PriorParams& prior) {
    const Eigen::Index p = a.rows();
    if (a.cols() != p) throw Error("rank_constrained_map: matrix is not square");
    if (!(alpha > 0.0)) throw Error("rank_constrained_map: alpha must be > 0");
    if (prior.rank < 1) throw Error("rank_constrained_map: rank must be >= 1");
    if (prior.rank >= p) throw Error("rank_constrained_map: rank must be < p (noise subspace is empty)");
    if (!(prior.lower > 0.0) || !(prior.upper >= prior.lower))
        throw Error("rank_constrained_map: bounds must satisfy 0 < LB <= UB");

    const EigenPair eig = hermitian_eigen(a);
    const Eigen::Index r = prior.rank;
    const double noise_mean = eig.d.tail(p - r).mean();
    const double sigma2 = std::clamp(noise_mean / alpha, prior.lower, prior.upper);

    RVector lambda = RVector::Constant(p, sigma2);
    int used = 0;
    for (Eigen::Index k = 0; k < r; ++k) {
        const double scaled = eig.d(k) / alpha;
        if (scaled > sigma2) {
            lambda(k) = scaled;
            ++used;
        }
    }
    CMatrix out = eig.U * lambda.cast<cdouble>().asDiagonal() * eig.U.adjoint();
    return {hermitian_part(out), Method::R_MAP, sigma2, used, alpha};
}

/// Single entry point for all five estimators. CLAIRVOYANT needs the model and is
/// handled by `clairvoyant_estimate`.
inline CovEstimate estimate(const SnapshotSet& data, const PriorParams& prior, Method method) {
    switch (method) {
        case Method::SMI: return scm(data);
        case Method::MAP: return map_unstructured(data, prior);
        case Method::R_MAP: {
            auto out = rank_constrained_map(posterior_scatter(data, prior), map_alpha(data, prior), prior);
            out.method = Method::R_MAP;
            return out;
        }
        case Method::S_MAP: {
            const CMatrix s = persym_project(posterior_scatter(data, prior));
            detail::require_positive_definite(s, "S-MAP");
            const double alpha = map_alpha(data, prior);
            return {s / alpha, Method::S_MAP, std::nullopt, std::nullopt, alpha};
        }
        case Method::RS_MAP: {
            auto out = rank_constrained_map(persym_project(posterior_scatter(data, prior)), map_alpha(data, prior), prior);
            out.method = Method::RS_MAP;
            return out;
        }
        case Method::CLAIRVOYANT: break;
    }
    throw Error("estimate: the clairvoyant estimate needs the radar model; use clairvoyant_estimate()");
}

inline CovEstimate clairvoyant_estimate(const RadarConfig& cfg) {
    return {clairvoyant_ccm(cfg), Method::CLAIRVOYANT, cfg.noise_power, std::nullopt, std::nullopt};
}

/// Brennan's rule, round(M + (N - 1) beta) with beta = 2 v_p / (d f_r), clamped to [1, NM].
inline int brennan_rank(const RadarConfig& cfg) {
    if (!(cfg.prf > 0.0) || !(cfg.spacing > 0.0)) throw Error("brennan_rank: prf and spacing must be > 0");
    const double beta = 2.0 * cfg.velocity / (cfg.spacing * cfg.prf);
    const long rank = std::lround(cfg.elements + (cfg.pulses - 1) * beta);
    return static_cast<int>(std::clamp<long>(rank, 1, cfg.dimension()));
}

enum class PriorKind { identity, perturbed_model, auxiliary_scm };

inline std::string_view to_string(PriorKind k) {
    switch (k) {
        case PriorKind::identity: return "identity";
        case PriorKind::perturbed_model: return "perturbed_model";
        case PriorKind::auxiliary_scm: return "auxiliary_scm";
    }
    return "?";
}

inline PriorKind parse_prior_kind(std::string_view s) {
    if (s == "identity") return PriorKind::identity;
    if (s == "perturbed_model") return PriorKind::perturbed_model;
    if (s == "auxiliary_scm") return PriorKind::auxiliary_scm;
    throw Error("unknown prior kind '" + std::string(s) + "'");
}

/// How to construct PriorParams. Unset optionals take the documented defaults:
/// l = p, r = brennan_rank, LB = 0.8 sigma_n^2, UB = 1.25 sigma_n^2.
struct PriorSpec {
    PriorKind kind = PriorKind::auxiliary_scm;
    std::optional<double> strength;
    std::optional<int> rank;
    std::optional<double> lower;
    std::optional<double> upper;
    double velocity_factor = 1.05;  ///< perturbed_model: v_p scale
    double crab_offset_deg = 2.0;   ///< perturbed_model: phi offset
    int aux_snapshots = 8;          ///< auxiliary_scm: training size of the auxiliary SCM
    double aux_load = 1e-3;         ///< auxiliary_scm: diagonal load relative to tr/p
};

/// Builds R0 = l * R_prior plus rank and noise bounds. `aux` is required for auxiliary_scm.
inline PriorParams build_prior(const RadarConfig& cfg, const PriorSpec& spec, const SnapshotSet* aux = nullptr) {
    cfg.validate();
    const Eigen::Index p = cfg.dimension();
    const double l = spec.strength.value_or(static_cast<double>(p));
    if (!(l >= 0.0)) throw Error("build_prior: strength l must be >= 0");

    CMatrix base;
    switch (spec.kind) {
        case PriorKind::identity:
            base = CMatrix::Identity(p, p) * cfg.noise_power;
            break;
        case PriorKind::perturbed_model: {
            RadarConfig model = cfg;
            model.velocity *= spec.velocity_factor;
            model.crab_deg += spec.crab_offset_deg;
            base = clairvoyant_ccm(model);
            break;
        }
        case PriorKind::auxiliary_scm: {
            if (aux == nullptr || aux->count() < 1)
                throw Error("build_prior: auxiliary_scm needs auxiliary snapshots (K >= 1)");
            if (aux->dimension() != p) throw Error("build_prior: auxiliary snapshot dimension mismatch");
            base = scm(*aux).R;
            const double load = spec.aux_load * base.trace().real() / static_cast<double>(p);
            base.diagonal().array() += load;
            break;
        }
    }

    PriorParams out;
    out.R0 = l * base;
    out.strength = l;
    out.rank = spec.rank.value_or(brennan_rank(cfg));
    out.lower = spec.lower.value_or(0.8 * cfg.noise_power);
    out.upper = spec.upper.value_or(1.25 * cfg.noise_power);
    out.validate(p);
    return out;
}

}  // namespace stapcov
