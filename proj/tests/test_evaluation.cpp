#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stapcov/evaluation.hpp"

using namespace stapcov;

namespace {

CovEstimate plain(const CMatrix& r, Method m = Method::MAP) { return {r, m, std::nullopt, std::nullopt, std::nullopt}; }

double median(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

/// Every grid cell within one step of a ridge cell, in either direction.
CellSet dilate(const CellSet& cells, std::size_t nd, std::size_t ns) {
    CellSet out;
    for (std::size_t c : cells) {
        const long di = static_cast<long>(c / ns), si = static_cast<long>(c % ns);
        for (long a = -1; a <= 1; ++a)
            for (long b = -1; b <= 1; ++b) {
                const long i = di + a, j = si + b;
                if (i >= 0 && j >= 0 && i < static_cast<long>(nd) && j < static_cast<long>(ns))
                    out.push_back(static_cast<std::size_t>(i) * ns + static_cast<std::size_t>(j));
            }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

TEST(Linspace, Endpoints) {
    const auto g = linspace(-0.5, 0.5, 201);
    EXPECT_EQ(g.size(), 201u);
    EXPECT_EQ(g.front(), -0.5);
    EXPECT_EQ(g.back(), 0.5);
    EXPECT_NEAR(g[100], 0.0, 1e-15);
    EXPECT_THROW(linspace(0, 1, 0), Error);
}

TEST(Weights, IdentityAndScaled) {
    const RadarConfig cfg;
    const auto s = space_time_steering(0.1, -0.2, cfg);
    const CMatrix eye = CMatrix::Identity(64, 64);
    EXPECT_LT((stap_weights(plain(eye), s) - s.v).norm(), 1e-12);
    EXPECT_LT((stap_weights(plain(2.0 * eye), s) - s.v / 2.0).norm(), 1e-12);
    EXPECT_NEAR(sinr_loss(plain(2.0 * eye), eye, s, 1.0), sinr_loss(plain(eye), eye, s, 1.0), 1e-12);
}

TEST(Weights, SingularEstimateNamesMethod) {
    const RadarConfig cfg;
    const auto s = space_time_steering(0.0, 0.0, cfg);
    try {
        stap_weights(plain(CMatrix::Zero(64, 64), Method::SMI), s);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("SMI"), std::string::npos) << what;
        EXPECT_NE(what.find("condition"), std::string::npos) << what;
    }
    CMatrix rank_one = s.v * s.v.adjoint();
    EXPECT_THROW(stap_weights(plain(rank_one, Method::S_MAP), s), Error);
    EXPECT_THROW(stap_weights(plain(CMatrix::Identity(4, 4)), s), Error);
}

TEST(Weights, SmiLoadRescuesRankDeficientScm) {
    const RadarConfig cfg;
    const auto data = generate_snapshots(cfg, 8, 3);
    const auto est = scm(data);
    const auto s = space_time_steering(0.1, 0.3, cfg);
    const CVector w = stap_weights(est, s);
    EXPECT_TRUE(w.allFinite());
}

TEST(SinrLoss, NoClutterMatchedFilterIsZeroDb) {
    RadarConfig cfg;
    cfg.cnr_db = -std::numeric_limits<double>::infinity();
    cfg.velocity = 0.0;
    cfg.noise_power = 3.0;
    const CMatrix r = clairvoyant_ccm(cfg);
    const auto curve = sinr_loss_curve(plain(r), r, 0.1, default_doppler_grid(), cfg);
    ASSERT_EQ(curve.loss_db.size(), 201u);
    for (double v : curve.loss_db) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(SinrLoss, BoundedByZeroAndByClairvoyant) {
    const RadarConfig cfg;
    const CMatrix truth = clairvoyant_ccm(cfg);
    const auto grid = default_doppler_grid();
    const double target = look_direction_spatial(cfg);
    const auto best = sinr_loss_curve(clairvoyant_estimate(cfg), truth, target, grid, cfg).loss_db;
    std::mt19937_64 gen(71);
    const auto data = generate_snapshots(cfg, 16, 5);
    PriorSpec spec;
    spec.kind = PriorKind::perturbed_model;
    const auto prior = build_prior(cfg, spec);
    std::vector<CovEstimate> candidates;
    for (Method m : kAllEstimators) candidates.push_back(estimate(data, prior, m));
    candidates.push_back(plain(oracle::random_psd(64, 80, gen) + CMatrix::Identity(64, 64)));
    for (const auto& est : candidates) {
        const auto loss = sinr_loss_curve(est, truth, target, grid, cfg).loss_db;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_LE(loss[i], 1e-6);
            EXPECT_LE(loss[i], best[i] + 1e-9) << to_string(est.method) << " bin " << i;
        }
    }
}

TEST(SinrLoss, ScaleInvariance) {
    const RadarConfig cfg;
    const CMatrix truth = clairvoyant_ccm(cfg);
    PriorSpec spec;
    spec.kind = PriorKind::identity;
    const auto est = estimate(generate_snapshots(cfg, 16, 9), build_prior(cfg, spec), Method::MAP);
    const auto grid = linspace(-0.5, 0.5, 41);
    const auto base = sinr_loss_curve(est, truth, 0.3, grid, cfg).loss_db;
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        CovEstimate scaled = est;
        scaled.R *= c;
        const auto other = sinr_loss_curve(scaled, truth, 0.3, grid, cfg).loss_db;
        for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(other[i], base[i], 1e-9);
    }
}

TEST(SinrLoss, CeilingViolationIsReported) {
    RadarConfig cfg;
    cfg.noise_power = 1.0;
    const CMatrix too_small = 0.5 * CMatrix::Identity(64, 64);
    EXPECT_THROW(sinr_loss_grid(plain(too_small), too_small, 0.0, {0.0}, cfg), InvariantError);
}

TEST(SinrLoss, ClairvoyantNullAtMainlobeClutter) {
    // Forward-looking: the patch at the look direction (gamma = phi = 90 deg) has zero Doppler.
    // The ridge is tangent to the look direction there, so the notch is wide.
    const RadarConfig cfg;
    const CMatrix truth = clairvoyant_ccm(cfg);
    const auto grid = default_doppler_grid();
    const auto curve = sinr_loss_curve(clairvoyant_estimate(cfg), truth, look_direction_spatial(cfg), grid, cfg);
    const auto it = std::min_element(curve.loss_db.begin(), curve.loss_db.end());
    EXPECT_LE(std::abs(grid[static_cast<std::size_t>(it - curve.loss_db.begin())]), 0.1);
    EXPECT_LT(curve.loss_db[100], -20.0);
}

TEST(SinrLoss, ClairvoyantNullsFollowRidgeForwardLooking) {
    const RadarConfig cfg;
    const CMatrix truth = clairvoyant_ccm(cfg);
    const auto grid = default_doppler_grid();
    const double target = 0.3;
    // Patches with f_s = target sit at sin(gamma) = target / f_s,max and f_d = +-f_d,max cos(gamma).
    const double fs_max = look_direction_spatial(cfg);
    const double fd_max = patch_frequencies(0.0, ring_elevation_deg(cfg), cfg).doppler;
    const double expected = fd_max * std::sqrt(1.0 - (target / fs_max) * (target / fs_max));
    const auto curve = sinr_loss_curve(clairvoyant_estimate(cfg), truth, target, grid, cfg).loss_db;
    const auto lo = std::min_element(curve.begin(), curve.begin() + 100);
    const auto hi = std::min_element(curve.begin() + 101, curve.end());
    EXPECT_LE(std::abs(grid[static_cast<std::size_t>(lo - curve.begin())] + expected), 0.0051);
    EXPECT_LE(std::abs(grid[static_cast<std::size_t>(hi - curve.begin())] - expected), 0.0051);
    EXPECT_LT(*lo, -20.0);
    EXPECT_LT(*hi, -20.0);
}

TEST(SinrLoss, ClairvoyantNullFollowsRidgeSideLooking) {
    RadarConfig cfg;
    cfg.crab_deg = 0.0;
    const CMatrix truth = clairvoyant_ccm(cfg);
    const auto grid = default_doppler_grid();
    const double target = 0.2;
    // Geometry oracle: f_d / f_s = (2 v / (lambda f_r)) / (d / lambda) on a side-looking ring.
    const double expected = target * (2.0 * cfg.velocity / (cfg.wavelength * cfg.prf)) / (cfg.spacing / cfg.wavelength);
    const auto curve = sinr_loss_curve(clairvoyant_estimate(cfg), truth, target, grid, cfg);
    const auto it = std::min_element(curve.loss_db.begin(), curve.loss_db.end());
    EXPECT_LE(std::abs(grid[static_cast<std::size_t>(it - curve.loss_db.begin())] - expected), 0.0051);
    EXPECT_LT(*it, -20.0);
}

TEST(MonteCarlo, ClairvoyantIsTrialIndependent) {
    MonteCarloSetup setup;
    setup.doppler = linspace(-0.5, 0.5, 21);
    const auto losses = run_loss_trials(setup, {Method::CLAIRVOYANT, Method::MAP}, 8, 4, 11);
    for (int t = 1; t < 4; ++t) EXPECT_EQ(losses.trial_mean(t, 0), losses.trial_mean(0, 0));
    EXPECT_NE(losses.trial_mean(1, 1), losses.trial_mean(0, 1));
    EXPECT_EQ(losses.index_of(Method::MAP), 1u);
    EXPECT_THROW(losses.index_of(Method::SMI), Error);
}

TEST(MonteCarlo, DeterministicAndThreadIndependent) {
    MonteCarloSetup setup;
    setup.doppler = linspace(-0.5, 0.5, 11);
    const std::vector<Method> methods{Method::SMI, Method::RS_MAP};
    const auto a = run_loss_trials(setup, methods, 8, 6, 5, 1);
    const auto b = run_loss_trials(setup, methods, 8, 6, 5, 3);
    const auto c = run_loss_trials(setup, methods, 8, 6, 6, 1);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    EXPECT_EQ(average_sinr_loss(Method::RS_MAP, setup, 8, 6, 5), a.mean_db(1));
}

TEST(MonteCarlo, AveragingModes) {
    TrialLosses l;
    l.methods = {Method::SMI};
    l.trials = 2;
    l.bins = 2;
    l.values = {1.0, 0.1, 0.01, 0.1};
    EXPECT_NEAR(l.mean_db(0, LossAveraging::linear), to_db(0.3025), 1e-12);
    EXPECT_NEAR(l.mean_db(0, LossAveraging::decibel), -10.0, 1e-12);
    const auto curve = l.curve_db(0);
    EXPECT_NEAR(curve[0], to_db(0.505), 1e-12);
    EXPECT_NEAR(curve[1], -10.0, 1e-12);
}

TEST(MonteCarlo, RejectsBadArguments) {
    MonteCarloSetup setup;
    EXPECT_THROW(run_loss_trials(setup, {Method::MAP}, 8, 0, 1), Error);
}

TEST(ParallelFor, PropagatesExceptions) {
    std::vector<int> hits(50, 0);
    parallel_for(50, 4, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(20, 3, [](int i) { if (i == 7) throw Error("boom"); }), Error);
}

TEST(Capon, IdentityIsFlat) {
    const RadarConfig cfg;
    const auto grid = linspace(-0.5, 0.5, 11);
    const auto spec = capon_spectrum(plain(CMatrix::Identity(64, 64)), grid, grid, cfg);
    EXPECT_LT(spec.power_db.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(spec.power_db.rows(), 11);
}

TEST(Capon, ClairvoyantRidgeFollowsGeometry) {
    for (double crab : {90.0, 0.0}) {
        RadarConfig cfg;
        cfg.crab_deg = crab;
        const auto grid = default_spectrum_grid();
        const auto spec = capon_spectrum(clairvoyant_estimate(cfg), grid, grid, cfg);
        EXPECT_NEAR(spec.power_db.maxCoeff(), 0.0, 1e-12);
        const CellSet ridge = clutter_ridge_cells(cfg, grid, grid);
        const CellSet near = dilate(ridge, grid.size(), grid.size());
        std::vector<double> on, off;
        for (std::size_t c = 0; c < grid.size() * grid.size(); ++c) {
            const double v = spec.power_db(static_cast<Eigen::Index>(c / grid.size()), static_cast<Eigen::Index>(c % grid.size()));
            if (std::binary_search(ridge.begin(), ridge.end(), c)) on.push_back(v);
            else if (!std::binary_search(near.begin(), near.end(), c)) off.push_back(v);
        }
        EXPECT_GT(median(on) - median(off), 20.0) << "crab " << crab;
        // The strongest cells sit on or next to the ridge.
        for (std::size_t c : top_fraction_cells(spec, 0.01))
            EXPECT_TRUE(std::binary_search(near.begin(), near.end(), c)) << "crab " << crab << " cell " << c;
    }
}

TEST(Capon, SideLookingRidgeIsALine) {
    RadarConfig cfg;
    cfg.crab_deg = 0.0;
    const auto grid = default_spectrum_grid();
    const double slope = (2.0 * cfg.velocity / (cfg.wavelength * cfg.prf)) / (cfg.spacing / cfg.wavelength);
    for (std::size_t c : clutter_ridge_cells(cfg, grid, grid)) {
        const double fd = grid[c / grid.size()], fs = grid[c % grid.size()];
        EXPECT_LE(std::abs(detail::wrap_frequency(fd - slope * fs)), 0.011) << fd << " " << fs;
    }
}

TEST(CellSets, TopFractionAndJaccard) {
    AngleDopplerSpectrum spec{linspace(0, 1, 10), linspace(0, 1, 10), Eigen::MatrixXd::Zero(10, 10)};
    spec.power_db(3, 4) = 5.0;
    spec.power_db(0, 0) = 4.0;
    const CellSet top = top_fraction_cells(spec, 0.015);
    ASSERT_EQ(top.size(), 2u);
    EXPECT_EQ(top[0], 0u);
    EXPECT_EQ(top[1], 34u);
    EXPECT_DOUBLE_EQ(jaccard_index({1, 2, 3}, {2, 3, 4, 5}), 0.4);
    EXPECT_DOUBLE_EQ(jaccard_index({}, {}), 0.0);
    EXPECT_NEAR(detail::wrap_frequency(0.7), -0.3, 1e-15);
    EXPECT_NEAR(detail::wrap_frequency(-0.6), 0.4, 1e-15);
}
