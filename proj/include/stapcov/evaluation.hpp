#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>

#include "stapcov/estimators.hpp"

namespace stapcov {

/// Relative diagonal load applied to SMI estimates before inversion (times tr(R)/p).
inline constexpr double kSmiDiagonalLoad = 1e-6;

inline std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw Error("linspace: count must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
    out.back() = hi;
    return out;
}

/// Cholesky factor of an estimate, reused for many steering vectors.
/// SMI estimates receive the relative diagonal load first; K < p leaves them singular.
class WeightSolver {
public:
    explicit WeightSolver(const CovEstimate& est) : method_(est.method) {
        CMatrix r = est.R;
        const Eigen::Index p = r.rows();
        if (p == 0 || r.cols() != p) throw Error("stap_weights: estimate must be a non-empty square matrix");
        if (method_ == Method::SMI) r.diagonal().array() += kSmiDiagonalLoad * r.trace().real() / static_cast<double>(p);
        llt_.compute(r);
        const double rcond = llt_.info() == Eigen::Success ? llt_.rcond() : 0.0;
        if (!(rcond > 1e-14)) {
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(r, Eigen::EigenvaluesOnly);
            const double lo = eig.eigenvalues().minCoeff();
            const double hi = eig.eigenvalues().maxCoeff();
            std::ostringstream msg;
            msg << "stap_weights: " << to_string(method_) << " estimate is numerically singular (condition estimate "
                << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) << ")";
            throw Error(msg.str());
        }
    }

    CVector solve(const CVector& s) const { return llt_.solve(s); }
    CMatrix solve(const CMatrix& s) const { return llt_.solve(s); }
    Method method() const { return method_; }

private:
    Method method_;
    Eigen::LLT<CMatrix> llt_;
};

/// w = R^{-1} s (unit scaling), via a Cholesky solve.
inline CVector stap_weights(const CovEstimate& est, const SpaceTimeSteering& s) {
    if (s.v.size() != est.R.rows()) throw Error("stap_weights: steering dimension mismatch");
    return WeightSolver(est).solve(s.v);
}

/// sigma^2 |w^H s|^2 / ((w^H R w) NM), linear.
inline double sinr_loss_linear(const CVector& w, const CMatrix& r_true, const CVector& s, double noise_power) {
    const double gain = std::norm(w.dot(s));
    const double output = (w.adjoint() * r_true * w).value().real();
    return noise_power * gain / (output * static_cast<double>(s.size()));
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

inline double sinr_loss(const CovEstimate& est, const CMatrix& r_true, const SpaceTimeSteering& s, double noise_power) {
    if (r_true.rows() != est.R.rows()) throw Error("sinr_loss: dimension mismatch");
    return to_db(sinr_loss_linear(stap_weights(est, s), r_true, s.v, noise_power));
}

struct SinrLossCurve {
    std::vector<double> doppler;
    std::vector<double> loss_db;
    double target_spatial = 0.0;
    Method method = Method::SMI;
};

/// Tolerance on the "loss never exceeds 0 dB" invariant.
inline constexpr double kLossCeilingDb = 1e-6;

/// Linear SINR loss at each Doppler bin for a target at `target_spatial`.
inline std::vector<double> sinr_loss_grid(const CovEstimate& est, const CMatrix& r_true, double target_spatial,
                                          const std::vector<double>& doppler, const RadarConfig& cfg) {
    const Eigen::Index p = cfg.dimension();
    CMatrix steer(p, static_cast<Eigen::Index>(doppler.size()));
    for (std::size_t i = 0; i < doppler.size(); ++i)
        steer.col(static_cast<Eigen::Index>(i)) = space_time_steering(doppler[i], target_spatial, cfg).v;
    const CMatrix w = WeightSolver(est).solve(steer);
    const CMatrix rw = r_true * w;
    std::vector<double> out(doppler.size());
    for (std::size_t i = 0; i < doppler.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const double gain = std::norm(w.col(c).dot(steer.col(c)));
        const double output = w.col(c).dot(rw.col(c)).real();
        out[i] = cfg.noise_power * gain / (output * static_cast<double>(p));
        if (to_db(out[i]) > kLossCeilingDb)
            throw InvariantError("SINR loss above 0 dB for " + std::string(to_string(est.method)));
    }
    return out;
}

/// SINR loss across a Doppler grid; R_true is expected to dominate sigma_n^2 I.
inline SinrLossCurve sinr_loss_curve(const CovEstimate& est, const CMatrix& r_true, double target_spatial,
                                     const std::vector<double>& doppler, const RadarConfig& cfg) {
    SinrLossCurve curve{doppler, {}, target_spatial, est.method};
    const auto linear = sinr_loss_grid(est, r_true, target_spatial, doppler, cfg);
    curve.loss_db.reserve(linear.size());
    for (double v : linear) curve.loss_db.push_back(to_db(v));
    return curve;
}

inline std::vector<double> default_doppler_grid() { return linspace(-0.5, 0.5, 201); }

enum class LossAveraging { linear, decibel };

/// Fixed inputs of a Monte Carlo SINR-loss study.
struct MonteCarloSetup {
    RadarConfig radar;
    PriorSpec prior;
    GenerationMode mode = GenerationMode::coloring;
    std::vector<double> doppler = default_doppler_grid();
    std::optional<double> target_spatial;  ///< defaults to the look direction

    double target() const { return target_spatial.value_or(look_direction_spatial(radar)); }
};

/// Per-trial SINR losses of several methods evaluated on shared training data.
struct TrialLosses {
    std::vector<Method> methods;
    int trials = 0;
    int bins = 0;
    /// Linear loss, index [(trial * methods + method) * bins + bin].
    std::vector<double> values;

    double at(int trial, std::size_t method, int bin) const {
        return values[(static_cast<std::size_t>(trial) * methods.size() + method) * static_cast<std::size_t>(bins) +
                      static_cast<std::size_t>(bin)];
    }

    /// Grid average of one trial, linear or dB domain (the dB variant averages dB values).
    double trial_mean(int trial, std::size_t method, LossAveraging avg = LossAveraging::linear) const {
        double acc = 0.0;
        for (int b = 0; b < bins; ++b) acc += avg == LossAveraging::linear ? at(trial, method, b) : to_db(at(trial, method, b));
        return acc / bins;
    }

    /// Mean over trials and grid, in dB.
    double mean_db(std::size_t method, LossAveraging avg = LossAveraging::linear) const {
        double acc = 0.0;
        for (int t = 0; t < trials; ++t) acc += trial_mean(t, method, avg);
        acc /= trials;
        return avg == LossAveraging::linear ? to_db(acc) : acc;
    }

    /// Per-bin mean over trials, in dB.
    std::vector<double> curve_db(std::size_t method, LossAveraging avg = LossAveraging::linear) const {
        std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
        for (int t = 0; t < trials; ++t)
            for (int b = 0; b < bins; ++b)
                out[static_cast<std::size_t>(b)] += avg == LossAveraging::linear ? at(t, method, b) : to_db(at(t, method, b));
        for (double& v : out) {
            v /= trials;
            if (avg == LossAveraging::linear) v = to_db(v);
        }
        return out;
    }

    std::size_t index_of(Method m) const {
        const auto it = std::find(methods.begin(), methods.end(), m);
        if (it == methods.end()) throw Error("method " + std::string(to_string(m)) + " was not evaluated");
        return static_cast<std::size_t>(it - methods.begin());
    }
};

/// Runs `body(i)` for i in [0, count) on up to `threads` workers. The first exception is rethrown.
template <class Body>
void parallel_for(int count, int threads, Body&& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Seed of Monte Carlo trial `trial`; stream 0 is training data, stream 1 auxiliary data.
inline std::uint64_t trial_seed(std::uint64_t master, int trial) { return derive_seed(master, static_cast<std::uint64_t>(trial)); }

/// Draws `trials` independent training sets of size K and evaluates every method on each.
/// Results depend only on (setup, methods, K, trials, seed), never on `threads`.
inline TrialLosses run_loss_trials(const MonteCarloSetup& setup, const std::vector<Method>& methods, int snapshots,
                                   int trials, std::uint64_t seed, int threads = 1) {
    if (trials < 1) throw Error("Monte Carlo: trials must be >= 1");
    if (snapshots < 0) throw Error("Monte Carlo: snapshot count must be >= 0");
    const RadarConfig& cfg = setup.radar;
    const CMatrix r_true = clairvoyant_ccm(cfg);
    const SnapshotGenerator generator(cfg, setup.mode);
    const double target = setup.target();

    std::optional<PriorParams> fixed_prior;
    if (setup.prior.kind != PriorKind::auxiliary_scm) fixed_prior = build_prior(cfg, setup.prior);

    TrialLosses out;
    out.methods = methods;
    out.trials = trials;
    out.bins = static_cast<int>(setup.doppler.size());
    const std::size_t stride = methods.size() * setup.doppler.size();
    out.values.assign(static_cast<std::size_t>(trials) * stride, 0.0);

    const bool has_clairvoyant = std::find(methods.begin(), methods.end(), Method::CLAIRVOYANT) != methods.end();
    std::vector<double> clairvoyant_grid;
    if (has_clairvoyant) clairvoyant_grid = sinr_loss_grid(clairvoyant_estimate(cfg), r_true, target, setup.doppler, cfg);

    parallel_for(trials, threads, [&](int t) {
        const std::uint64_t ts = trial_seed(seed, t);
        const SnapshotSet data = generator.draw(snapshots, derive_seed(ts, 0));
        PriorParams prior;
        if (fixed_prior) {
            prior = *fixed_prior;
        } else {
            const SnapshotSet aux = generator.draw(setup.prior.aux_snapshots, derive_seed(ts, 1));
            prior = build_prior(cfg, setup.prior, &aux);
        }
        double* row = out.values.data() + static_cast<std::size_t>(t) * stride;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const std::vector<double> grid =
                methods[m] == Method::CLAIRVOYANT ? clairvoyant_grid
                                                  : sinr_loss_grid(estimate(data, prior, methods[m]), r_true, target, setup.doppler, cfg);
            std::copy(grid.begin(), grid.end(), row + m * setup.doppler.size());
        }
    });
    return out;
}

/// Mean SINR loss (dB) of one method over Doppler grid and trials.
inline double average_sinr_loss(Method method, const MonteCarloSetup& setup, int snapshots, int trials, std::uint64_t seed,
                                LossAveraging avg = LossAveraging::linear, int threads = 1) {
    return run_loss_trials(setup, {method}, snapshots, trials, seed, threads).mean_db(0, avg);
}

/// Capon power in dB on an (f_d rows) x (f_s cols) grid, normalized to a 0 dB peak.
struct AngleDopplerSpectrum {
    std::vector<double> spatial;
    std::vector<double> doppler;
    Eigen::MatrixXd power_db;  ///< power_db(i_doppler, i_spatial)
};

inline AngleDopplerSpectrum capon_spectrum(const CovEstimate& est, const std::vector<double>& spatial,
                                           const std::vector<double>& doppler, const RadarConfig& cfg) {
    if (spatial.empty() || doppler.empty()) throw Error("capon_spectrum: grids must be non-empty");
    const WeightSolver solver(est);
    const auto nd = static_cast<Eigen::Index>(doppler.size());
    const auto ns = static_cast<Eigen::Index>(spatial.size());
    AngleDopplerSpectrum out{spatial, doppler, Eigen::MatrixXd(nd, ns)};
    CMatrix steer(cfg.dimension(), ns);
    for (Eigen::Index i = 0; i < nd; ++i) {
        for (Eigen::Index j = 0; j < ns; ++j)
            steer.col(j) = space_time_steering(doppler[static_cast<std::size_t>(i)], spatial[static_cast<std::size_t>(j)], cfg).v;
        const CMatrix w = solver.solve(steer);
        for (Eigen::Index j = 0; j < ns; ++j) out.power_db(i, j) = 1.0 / steer.col(j).dot(w.col(j)).real();
    }
    const double peak = out.power_db.maxCoeff();
    out.power_db = (out.power_db.array() / peak).log10() * 10.0;
    return out;
}

inline std::vector<double> default_spectrum_grid() { return linspace(-0.5, 0.5, 101); }

/// Flattened cell index (i_doppler * n_spatial + i_spatial) of a spectrum grid.
using CellSet = std::vector<std::size_t>;

namespace detail {
inline double wrap_frequency(double f) {
    double w = std::fmod(f + 0.5, 1.0);
    if (w < 0.0) w += 1.0;
    return w - 0.5;
}

/// Indices of grid points nearest to frequency f, including the alias at the other
/// end when the grid spans a full period.
inline std::vector<std::size_t> nearest_cells(const std::vector<double>& grid, double f) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - f) < std::abs(grid[best] - f)) best = i;
    std::vector<std::size_t> out{best};
    const bool full_period = grid.size() > 1 && std::abs(grid.back() - grid.front() - 1.0) < 1e-12;
    if (full_period && best == 0) out.push_back(grid.size() - 1);
    if (full_period && best == grid.size() - 1) out.push_back(0);
    return out;
}
}  // namespace detail

/// Grid cells crossed by the clutter ridge, traced by patch_frequencies over azimuth
/// [-180, 180) deg at the ring elevation (frequencies wrapped to one period).
inline CellSet clutter_ridge_cells(const RadarConfig& cfg, const std::vector<double>& spatial,
                                   const std::vector<double>& doppler, int samples = 3600) {
    const double elevation = ring_elevation_deg(cfg);
    CellSet cells;
    for (int i = 0; i < samples; ++i) {
        const FrequencyPair f = patch_frequencies(-180.0 + 360.0 * i / samples, elevation, cfg);
        for (std::size_t di : detail::nearest_cells(doppler, detail::wrap_frequency(f.doppler)))
            for (std::size_t si : detail::nearest_cells(spatial, detail::wrap_frequency(f.spatial)))
                cells.push_back(di * spatial.size() + si);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

/// The ceil(fraction * cells) strongest cells (ties broken by lower index).
inline CellSet top_fraction_cells(const AngleDopplerSpectrum& spec, double fraction) {
    const auto total = static_cast<std::size_t>(spec.power_db.size());
    const auto keep = std::min(total, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total))));
    const auto ns = spec.spatial.size();
    auto value = [&](std::size_t c) {
        return spec.power_db(static_cast<Eigen::Index>(c / ns), static_cast<Eigen::Index>(c % ns));
    };
    CellSet order(total);
    for (std::size_t c = 0; c < total; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) > value(b); });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

/// |A n B| / |A u B| of two sorted cell sets.
inline double jaccard_index(const CellSet& a, const CellSet& b) {
    CellSet inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

}  // namespace stapcov
