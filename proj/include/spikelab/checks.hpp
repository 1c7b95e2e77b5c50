/*
   Copyright 2026 the spikelab authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Monte Carlo verification suites, one per spectral statement: each suite
// turns a probabilistic claim into a normalized empirical statistic with a
// configured tolerance. Asymptotic high-probability bounds are
// operationalized as high-quantile ratio tests with configurable
// (epsilon, C, quantile) slack.

#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spikelab/ensemble.hpp"
#include "spikelab/mp_law.hpp"
#include "spikelab/spectral.hpp"

namespace spikelab {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Reporting.
// ---------------------------------------------------------------------------

struct TrialRow {
    int trial = 0;
    std::string index;
    std::string statistic;
    double value = 0.0;
};

struct CheckReport {
    std::string name;
    double statistic = 0.0;
    double bound = 0.0;
    bool pass = false;
    int trials = 0;
    std::vector<std::uint64_t> seeds;
    std::map<std::string, double> details;
    std::vector<TrialRow> table;

    void finalize() { pass = statistic <= bound; }
};

// Quantile-vs-N^epsilon operationalization of a high-probability bound.
struct DominationProbe {
    double epsilon = 0.0;
    double quantileLevel = 0.99;
    int trials = 0;

    void validate() const {
        if (epsilon < 0.0) throw ConfigError("DominationProbe: epsilon must be >= 0");
        if (quantileLevel <= 0.5 || quantileLevel >= 1.0)
            throw ConfigError("DominationProbe: quantile level in (0.5, 1)");
    }
};

inline std::pair<double, double> dominationQuantile(
    const std::vector<double>& samples, const DominationProbe& probe,
    int K, double C) {
    probe.validate();
    if (samples.empty()) throw ConfigError("dominationQuantile: empty samples");
    const double statistic = sampleQuantile(samples, probe.quantileLevel);
    const double bound = C * std::pow(static_cast<double>(K), probe.epsilon);
    return {statistic, bound};
}

// ---------------------------------------------------------------------------
// Execution policy: per-trial streams; worker pool over trial indices.
// ---------------------------------------------------------------------------

struct ExecPolicy {
    int threads = 0;  // 0 = hardware concurrency

    int effectiveThreads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
};

template <class T, class F>
std::vector<T> mapTrials(int trials, const ExecPolicy& exec, F&& fn) {
    std::vector<T> out(static_cast<std::size_t>(trials));
    const int workers = std::min(exec.effectiveThreads(), trials);
    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) out[t] = fn(t);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr firstError;
    std::mutex errMutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= trials) return;
                try {
                    out[t] = fn(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(errMutex);
                    if (!firstError) firstError = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (firstError) std::rethrow_exception(firstError);
    return out;
}

// ---------------------------------------------------------------------------
// Ensemble + direction configuration shared by the checks.
// ---------------------------------------------------------------------------

// Which sample covariance variant a check decomposes.
enum class MatrixKind { Q, Qdot };

struct EnsembleConfig {
    int M = 0;
    int N = 0;
    int r = 0;
    EntryLaw law = EntryLaw::Gaussian;
    std::vector<double> spikeStrengths;  // coordinate directions e_1, e_2, ...
    int maxSpikes = 8;

    Aspect aspect() const { return Aspect(M, N); }

    SpikeSpec spec() const {
        SpikeSpec s = SpikeSpec::coordinate(spikeStrengths, M, r);
        s.maxSpikes = maxSpikes;
        return s;
    }
};

// Deterministic direction descriptors: spike axes, coordinate vectors, and
// seeded-but-fixed random unit vectors.
struct Direction {
    enum class Kind { Spike, Coordinate, RandomUnit } kind = Kind::Spike;
    int index = 0;
    std::string label;

    static Direction spike(int i) {
        return {Kind::Spike, i, "v" + std::to_string(i + 1)};
    }
    static Direction coordinate(int k) {
        return {Kind::Coordinate, k, "e" + std::to_string(k + 1)};
    }
    static Direction randomUnit(int tag) {
        return {Kind::RandomUnit, tag, "rand" + std::to_string(tag)};
    }

    Vector resolve(const Population& pop) const {
        const int M = pop.aspect.M;
        switch (kind) {
            case Kind::Spike:
                if (index < 0 || index >= pop.V.cols())
                    throw ConfigError("direction: spike index out of range");
                return pop.V.col(index);
            case Kind::Coordinate: {
                if (index < 0 || index >= M)
                    throw ConfigError("direction: coordinate out of range");
                Vector v = Vector::Zero(M);
                v(index) = 1.0;
                return v;
            }
            case Kind::RandomUnit: {
                PhiloxStream rng(0xD1CEBA5Eull,
                                 static_cast<std::uint64_t>(index));
                Vector v(M);
                for (int i = 0; i < M; ++i) v(i) = rng.gaussian();
                v.normalize();
                return v;
            }
        }
        throw ConfigError("direction: bad kind");
    }
};

namespace detail {

// Distance of d_i to the spike set on the other side of A (all M population
// directions count; unspiked ones carry d = 0).
inline double nuDistance(const Vector& d, const std::vector<int>& A, int i,
                         bool iInA) {
    double best = std::numeric_limits<double>::infinity();
    auto inA = [&](int j) {
        for (int a : A)
            if (a == j) return true;
        return false;
    };
    const double di = i < d.size() ? d(i) : 0.0;
    if (iInA) {
        for (int j = 0; j < d.size(); ++j)
            if (!inA(j)) best = std::min(best, std::abs(di - d(j)));
        best = std::min(best, std::abs(di));  // the d = 0 background
    } else {
        for (int a : A) best = std::min(best, std::abs(di - d(a)));
    }
    return best;
}

struct DirectionProfile {
    Vector w;             // resolved direction
    Vector spikeCoords;   // w_i = <v_i, w> for i in R
    double norm2 = 1.0;
    double backgroundMass = 0.0;  // |w|^2 - sum_i w_i^2
    std::string label;
};

inline DirectionProfile profileDirection(const Population& pop,
                                         const Direction& dir) {
    DirectionProfile p;
    p.w = dir.resolve(pop);
    p.label = dir.label;
    p.norm2 = p.w.squaredNorm();
    p.spikeCoords = pop.V.transpose() * p.w;
    p.backgroundMass = std::max(0.0, p.norm2 - p.spikeCoords.squaredNorm());
    return p;
}

inline double sigmaOf(double d, double phi) {
    return 1.0 + std::sqrt(phi) * d;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Outlier locations.
// ---------------------------------------------------------------------------

struct OutlierLocationParams {
    DominationProbe probe{0.0, 0.99, 400};
    double C = 5.0;
    // The extremal non-outlier rides the full Tracy-Widom spread; its
    // normalized 99% quantile sits near 10.5 empirically, so it carries its
    // own constant.
    double edgeC = 15.0;
    double tau = 0.1;
};

inline CheckReport checkOutlierLocations(const EnsembleConfig& ens,
                                         const OutlierLocationParams& params,
                                         std::uint64_t seed,
                                         const ExecPolicy& exec = {},
                                         MatrixKind kind = MatrixKind::Q) {
    const Aspect aspect = ens.aspect();
    const SpikeSpec spec = ens.spec();
    const OutlierIndexSet outliers = outlierIndexSet(spec, aspect.K);
    const double tau = params.tau;
    for (int idx : outliers.indices) {
        const double d = spec.spikes[idx].d;
        if (d < 0.0 && std::abs(aspect.phi - 1.0) < tau)
            throw ConfigError(
                "checkOutlierLocations: left-side spikes need |phi - 1| >= tau");
    }
    const Population pop = buildPopulation(spec, aspect);
    const int K = aspect.K;
    const double kHalf = std::pow(static_cast<double>(K), -0.5);
    const double kTwoThirds = std::pow(static_cast<double>(K), -2.0 / 3.0);

    struct Trial {
        std::vector<double> outlierRatios;
        double edgeRatio = 0.0;
        double leftEdgeRatio = -1.0;
    };
    AssembleNeeds needs;
    needs.Q = kind == MatrixKind::Q;
    needs.Qdot = kind == MatrixKind::Qdot;
    const bool doLeftEdge = std::abs(aspect.phi - 1.0) >= tau;

    auto trialFn = [&](int t) {
        const SampleDraw draw = drawSample(pop, ens.law, seed, t, needs);
        const Matrix& mat = kind == MatrixKind::Q ? draw.Q : draw.Qdot;
        const Vector mu = decompose(mat, false).values;
        Trial out;
        int rightRank = 0;
        int leftRank = 0;
        for (int idx : outliers.indices) {
            const double d = spec.spikes[idx].d;
            const double scale = fluctuationScale(d, aspect.phi) * kHalf;
            double muVal;
            if (d > 0) {
                muVal = mu(rightRank);
                ++rightRank;
            } else {
                ++leftRank;
                muVal = mu(K - leftRank);
            }
            out.outlierRatios.push_back(
                std::abs(muVal - classicalLocation(d, aspect.phi)) / scale);
        }
        out.edgeRatio =
            std::abs(mu(outliers.sPlus) - aspect.gammaPlus) / kTwoThirds;
        if (doLeftEdge)
            out.leftEdgeRatio =
                std::abs(mu(K - 1 - outliers.sMinus) - aspect.gammaMinus) /
                kTwoThirds;
        return out;
    };
    const auto results = mapTrials<Trial>(params.probe.trials, exec, trialFn);

    CheckReport report;
    report.name = kind == MatrixKind::Q ? "outlier-locations"
                                        : "outlier-locations-qdot";
    report.trials = params.probe.trials;
    for (int t = 0; t < params.probe.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));

    // Outlier and edge families carry different constants; the report
    // statistic is the worst quantile-to-bound ratio.
    double worst = 0.0;
    for (std::size_t j = 0; j < outliers.indices.size(); ++j) {
        std::vector<double> samples;
        samples.reserve(results.size());
        for (int t = 0; t < static_cast<int>(results.size()); ++t) {
            samples.push_back(results[t].outlierRatios[j]);
            report.table.push_back({t, "outlier" + std::to_string(j + 1),
                                    "location_ratio", samples.back()});
        }
        const auto [q, bound] =
            dominationQuantile(samples, params.probe, K, params.C);
        report.details["q_outlier" + std::to_string(j + 1)] = q;
        worst = std::max(worst, q / bound);
    }
    {
        std::vector<double> samples;
        for (int t = 0; t < static_cast<int>(results.size()); ++t) {
            samples.push_back(results[t].edgeRatio);
            report.table.push_back({t, "edge+", "edge_ratio", samples.back()});
        }
        const auto [q, bound] =
            dominationQuantile(samples, params.probe, K, params.edgeC);
        report.details["q_edge_plus"] = q;
        worst = std::max(worst, q / bound);
    }
    if (doLeftEdge) {
        std::vector<double> samples;
        for (int t = 0; t < static_cast<int>(results.size()); ++t)
            samples.push_back(results[t].leftEdgeRatio);
        const auto [q, bound] =
            dominationQuantile(samples, params.probe, K, params.edgeC);
        report.details["q_edge_minus"] = q;
        worst = std::max(worst, q / bound);
    }
    report.bound = 1.0;
    // Median absolute location errors, for scale comparisons across N.
    for (std::size_t j = 0; j < outliers.indices.size(); ++j) {
        std::vector<double> absErr;
        const double d = spec.spikes[outliers.indices[j]].d;
        const double scale = fluctuationScale(d, aspect.phi) * kHalf;
        for (const auto& tr : results)
            absErr.push_back(tr.outlierRatios[j] * scale);
        report.details["median_abs_error_outlier" + std::to_string(j + 1)] =
            sampleMedian(absErr);
    }
    report.statistic = worst;
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Eigenvalue sticking.
// ---------------------------------------------------------------------------

struct StickingParams {
    DominationProbe probe{0.0, 0.99, 200};
    double C = 10.0;
    double tau = 0.1;
    std::vector<int> indices = {1};  // 1-based non-outlier ranks of H
    bool nearCritical = false;       // bound quantile by K^eps only
};

inline CheckReport checkSticking(const EnsembleConfig& ens,
                                 const StickingParams& params,
                                 std::uint64_t seed,
                                 const ExecPolicy& exec = {},
                                 MatrixKind kind = MatrixKind::Q) {
    const Aspect aspect = ens.aspect();
    const SpikeSpec spec = ens.spec();
    const OutlierIndexSet outliers = outlierIndexSet(spec, aspect.K);
    const int K = aspect.K;
    for (int i : params.indices)
        if (i < 1 || static_cast<double>(i) > (1.0 - params.tau) * K)
            throw ConfigError("checkSticking: index outside [1, (1-tau)K]");
    const Population pop = buildPopulation(spec, aspect);
    const double alphaPlus = outliers.alphaPlus;
    const int sPlus = outliers.sPlus;

    AssembleNeeds needs;
    needs.Q = kind == MatrixKind::Q;
    needs.Qdot = kind == MatrixKind::Qdot;
    needs.H = kind == MatrixKind::Q;
    needs.Hdot = kind == MatrixKind::Qdot;

    auto trialFn = [&](int t) {
        const SampleDraw draw = drawSample(pop, ens.law, seed, t, needs);
        const Vector mu =
            decompose(kind == MatrixKind::Q ? draw.Q : draw.Qdot, false).values;
        const Vector lambda =
            decompose(kind == MatrixKind::Q ? draw.H : draw.Hdot, false).values;
        std::vector<double> stats;
        stats.reserve(params.indices.size());
        for (int i : params.indices)
            stats.push_back(std::abs(mu(i - 1 + sPlus) - lambda(i - 1)) * K *
                            alphaPlus);
        return stats;
    };
    const auto results =
        mapTrials<std::vector<double>>(params.probe.trials, exec, trialFn);

    CheckReport report;
    report.name = kind == MatrixKind::Q ? "sticking" : "sticking-qdot";
    report.trials = params.probe.trials;
    for (int t = 0; t < params.probe.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));
    std::vector<double> pooled;
    for (int t = 0; t < static_cast<int>(results.size()); ++t)
        for (std::size_t j = 0; j < params.indices.size(); ++j) {
            pooled.push_back(results[t][j]);
            report.table.push_back(
                {t, "i=" + std::to_string(params.indices[j]),
                 "sticking_ratio", results[t][j]});
        }
    const double effC = params.nearCritical ? 1.0 : params.C;
    const auto [q, bound] = dominationQuantile(pooled, params.probe, K, effC);
    report.statistic = q;
    report.bound = bound;
    report.details["alpha_plus"] = alphaPlus;
    report.details["s_plus"] = sPlus;
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Outlier eigenvector cone concentration.
// ---------------------------------------------------------------------------

struct ConeParams {
    DominationProbe probe{0.0, 0.99, 200};
    double C = 10.0;
    double tau = 0.1;
    std::vector<int> A = {0};  // spike-list positions forming the projection
    std::vector<Direction> directions = {Direction::spike(0)};
    std::vector<std::pair<int, int>> offDiagonalPairs;  // spike index pairs
    bool farFromBulk = false;
    double dA = 0.0;  // comparability scale for the far regime (0: max over A)
};

namespace detail {

struct ConeGeometry {
    double leading = 0.0;  // <w, Z_A w>
    double errorScale = 0.0;
};

inline ConeGeometry coneGeometry(const Population& pop,
                                 const std::vector<int>& A,
                                 const DirectionProfile& prof, bool far,
                                 double dA) {
    const double phi = pop.aspect.phi;
    const int M = pop.aspect.M;
    const Vector& d = pop.d;
    auto inA = [&](int j) {
        for (int a : A)
            if (a == j) return true;
        return false;
    };
    ConeGeometry g;
    for (int a : A)
        g.leading += coneMass(d(a), phi) * prof.spikeCoords(a) *
                     prof.spikeCoords(a);

    // sum_i sigma_i w_i^2 / (M nu_i(A)^2), split into spiked part and the
    // d = 0 background carrying the remaining mass of w.
    double nuSumAll = 0.0;
    double nuSumOutside = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        const double wi2 = prof.spikeCoords(i) * prof.spikeCoords(i);
        const double nu = nuDistance(d, A, i, inA(i));
        const double term = sigmaOf(d(i), phi) * wi2 / (M * nu * nu);
        nuSumAll += term;
        if (!inA(i)) nuSumOutside += term;
    }
    {
        double nuBackground = std::numeric_limits<double>::infinity();
        for (int a : A) nuBackground = std::min(nuBackground, std::abs(d(a)));
        const double term =
            prof.backgroundMass / (M * nuBackground * nuBackground);
        nuSumAll += term;
        nuSumOutside += term;
    }

    if (!far) {
        double first = 0.0;
        for (int a : A)
            first += prof.spikeCoords(a) * prof.spikeCoords(a) /
                     (std::sqrt(static_cast<double>(M)) *
                      std::sqrt(d(a) - 1.0));
        g.errorScale = first + nuSumAll +
                       std::sqrt(std::max(0.0, g.leading)) *
                           std::sqrt(std::max(0.0, nuSumOutside));
    } else {
        double inMass = 0.0;
        for (int a : A)
            inMass += sigmaOf(d(a), phi) * prof.spikeCoords(a) *
                      prof.spikeCoords(a);
        const double sp = std::sqrt(phi);
        const double denom = sp + dA;
        g.errorScale =
            inMass / (std::sqrt(static_cast<double>(M)) * denom) +
            (1.0 + sp * dA * dA / denom) * nuSumAll +
            dA / denom * std::sqrt(inMass) *
                std::sqrt(std::max(0.0, nuSumOutside));
    }
    return g;
}

}  // namespace detail

inline CheckReport checkCone(const EnsembleConfig& ens,
                             const ConeParams& params, std::uint64_t seed,
                             const ExecPolicy& exec = {},
                             MatrixKind kind = MatrixKind::Q) {
    const Aspect aspect = ens.aspect();
    const SpikeSpec spec = ens.spec();
    const OutlierIndexSet outliers = outlierIndexSet(spec, aspect.K);
    const Population pop = buildPopulation(spec, aspect);
    const double tau = params.tau;

    int maxEigIndex = 0;
    for (int a : params.A) {
        bool isOutlier = false;
        for (int idx : outliers.indices)
            if (idx == a) isOutlier = true;
        if (!isOutlier)
            throw ConfigError("checkCone: A contains a non-outlier spike");
        const double d = pop.d(a);
        if (d <= 0) throw ConfigError("checkCone: right-side outliers only");
        if (!params.farFromBulk && d > 1.0 / tau)
            throw ConfigError("checkCone: near-bulk regime needs d <= 1/tau");
        if (params.farFromBulk && d < 1.0 + tau)
            throw ConfigError("checkCone: far regime needs d >= 1 + tau");
        maxEigIndex = std::max(maxEigIndex, a);
    }
    double dA = params.dA;
    if (params.farFromBulk && dA <= 0.0)
        for (int a : params.A) dA = std::max(dA, pop.d(a));

    std::vector<detail::DirectionProfile> profiles;
    for (const auto& dir : params.directions)
        profiles.push_back(detail::profileDirection(pop, dir));
    std::vector<detail::ConeGeometry> geometry;
    for (const auto& prof : profiles)
        geometry.push_back(detail::coneGeometry(pop, params.A, prof,
                                                params.farFromBulk, dA));

    AssembleNeeds needs;
    needs.Q = kind == MatrixKind::Q;
    needs.Qdot = kind == MatrixKind::Qdot;
    const int topK = maxEigIndex + 1;

    struct Trial {
        std::vector<double> overlap;     // <w, P_A w> per direction
        std::vector<double> offDiag;     // <v_i, P_A v_j> per pair
    };
    auto trialFn = [&](int t) {
        const SampleDraw draw = drawSample(pop, ens.law, seed, t, needs);
        const Eigensystem top =
            decomposeTop(kind == MatrixKind::Q ? draw.Q : draw.Qdot, topK);
        std::vector<int> eigA;
        for (int a : params.A) eigA.push_back(a);
        Trial out;
        for (const auto& prof : profiles)
            out.overlap.push_back(
                spectralProjectionForm(top, eigA, prof.w, prof.w));
        for (const auto& [i, j] : params.offDiagonalPairs)
            out.offDiag.push_back(spectralProjectionForm(
                top, eigA, pop.V.col(i), pop.V.col(j)));
        return out;
    };
    const auto results = mapTrials<Trial>(params.probe.trials, exec, trialFn);

    CheckReport report;
    report.name = params.farFromBulk ? "cone-far-from-bulk" : "cone-near-bulk";
    if (kind == MatrixKind::Qdot) report.name += "-qdot";
    report.trials = params.probe.trials;
    for (int t = 0; t < params.probe.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));

    double worst = 0.0;
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        std::vector<double> normalized;
        std::vector<double> rawDev;
        for (int t = 0; t < static_cast<int>(results.size()); ++t) {
            const double dev =
                std::abs(results[t].overlap[p] - geometry[p].leading);
            normalized.push_back(dev / geometry[p].errorScale);
            rawDev.push_back(dev);
            report.table.push_back({t, profiles[p].label, "overlap",
                                    results[t].overlap[p]});
        }
        const auto [q, bound] =
            dominationQuantile(normalized, params.probe, aspect.K, params.C);
        report.details["q_" + profiles[p].label] = q;
        report.details["median_absdev_" + profiles[p].label] =
            sampleMedian(rawDev);
        report.details["leading_" + profiles[p].label] = geometry[p].leading;
        report.bound = bound;
        worst = std::max(worst, q);
    }
    for (std::size_t p = 0; p < params.offDiagonalPairs.size(); ++p) {
        const auto [i, j] = params.offDiagonalPairs[p];
        // Dominant cross-term error scale for i, j in A.
        const double scale =
            1.0 / (std::pow(pop.d(i) - 1.0, 0.25) *
                   std::pow(pop.d(j) - 1.0, 0.25) *
                   std::sqrt(static_cast<double>(aspect.M)));
        std::vector<double> normalized;
        for (int t = 0; t < static_cast<int>(results.size()); ++t)
            normalized.push_back(std::abs(results[t].offDiag[p]) / scale);
        const auto [q, bound] =
            dominationQuantile(normalized, params.probe, aspect.K, params.C);
        const std::string label =
            "offdiag_v" + std::to_string(i + 1) + "v" + std::to_string(j + 1);
        report.details["q_" + label] = q;
        worst = std::max(worst, q);
    }
    report.statistic = worst;
    report.finalize();
    return report;
}

inline CheckReport checkConeNearBulk(const EnsembleConfig& ens,
                                     ConeParams params, std::uint64_t seed,
                                     const ExecPolicy& exec = {},
                                     MatrixKind kind = MatrixKind::Q) {
    params.farFromBulk = false;
    return checkCone(ens, params, seed, exec, kind);
}

inline CheckReport checkConeFarFromBulk(const EnsembleConfig& ens,
                                        ConeParams params, std::uint64_t seed,
                                        const ExecPolicy& exec = {}) {
    params.farFromBulk = true;
    return checkCone(ens, params, seed, exec, MatrixKind::Q);
}

// ---------------------------------------------------------------------------
// Degenerate outlier pair: overlap matrix close to u * I on both sides.
// ---------------------------------------------------------------------------

struct DegenerateConeParams {
    DominationProbe probe{0.0, 0.99, 200};
    double C = 10.0;
    double tau = 0.1;
    std::vector<Direction> nullDirections;  // orthogonal to both spikes
};

inline CheckReport checkDegenerateCone(const EnsembleConfig& ens,
                                       const DegenerateConeParams& params,
                                       std::uint64_t seed,
                                       const ExecPolicy& exec = {}) {
    const Aspect aspect = ens.aspect();
    const SpikeSpec spec = ens.spec();
    if (spec.spikes.size() != 2 ||
        std::abs(spec.spikes[0].d - spec.spikes[1].d) > 1e-12)
        throw ConfigError("checkDegenerateCone: needs exactly two equal spikes");
    const double d = spec.spikes[0].d;
    if (d <= 1.0 + params.tau)
        throw ConfigError("checkDegenerateCone: needs d > 1 + tau");
    const Population pop = buildPopulation(spec, aspect);
    const double u = coneMass(d, aspect.phi);
    const double nu = d;  // distance to the d = 0 background
    const double errScale =
        1.0 / (std::sqrt(static_cast<double>(aspect.M)) * std::sqrt(d - 1.0)) +
        detail::sigmaOf(d, aspect.phi) / (aspect.M * nu * nu);

    struct Trial {
        Eigen::Matrix2d mmt;
        Eigen::Matrix2d mtm;
        std::vector<double> nullOverlaps;
    };
    std::vector<Vector> nullDirs;
    for (const auto& dir : params.nullDirections) {
        Vector w = dir.resolve(pop);
        if (std::abs(w.dot(pop.V.col(0))) > 1e-8 ||
            std::abs(w.dot(pop.V.col(1))) > 1e-8)
            throw ConfigError(
                "checkDegenerateCone: null direction not orthogonal to spikes");
        nullDirs.push_back(std::move(w));
    }

    auto trialFn = [&](int t) {
        const SampleDraw draw = drawSample(pop, ens.law, seed, t, {});
        const Eigensystem top = decomposeTop(draw.Q, 2);
        Eigen::Matrix2d overlap;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                overlap(i, j) = pop.V.col(i).dot(top.vectors.col(j));
        Trial out;
        out.mmt = overlap * overlap.transpose();
        out.mtm = overlap.transpose() * overlap;
        for (const auto& w : nullDirs) {
            const double proj = spectralProjectionForm(top, {0, 1}, w, w);
            out.nullOverlaps.push_back(aspect.M * proj);
        }
        return out;
    };
    const auto results = mapTrials<Trial>(params.probe.trials, exec, trialFn);

    CheckReport report;
    report.name = "degenerate-cone";
    report.trials = params.probe.trials;
    for (int t = 0; t < params.probe.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));

    std::vector<double> normalized;
    std::vector<double> diagDev, offDiagAbs;
    for (int t = 0; t < static_cast<int>(results.size()); ++t) {
        const auto& tr = results[t];
        double worstEntry = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double target = i == j ? u : 0.0;
                worstEntry = std::max(
                    {worstEntry, std::abs(tr.mmt(i, j) - target),
                     std::abs(tr.mtm(i, j) - target)});
            }
        normalized.push_back(worstEntry / errScale);
        diagDev.push_back(0.5 * (std::abs(tr.mmt(0, 0) - u) +
                                 std::abs(tr.mmt(1, 1) - u)));
        offDiagAbs.push_back(std::abs(tr.mmt(0, 1)));
        report.table.push_back({t, "MMt00", "overlap", tr.mmt(0, 0)});
        report.table.push_back({t, "MMt01", "overlap", tr.mmt(0, 1)});
        report.table.push_back({t, "MtM00", "overlap", tr.mtm(0, 0)});
    }
    const auto [q, bound] =
        dominationQuantile(normalized, params.probe, aspect.K, params.C);
    report.statistic = q;
    report.bound = bound;
    report.details["u"] = u;
    report.details["median_diag_absdev"] = sampleMedian(diagDev);
    report.details["median_offdiag_abs"] = sampleMedian(offDiagAbs);
    for (std::size_t k = 0; k < nullDirs.size(); ++k) {
        std::vector<double> s;
        for (const auto& tr : results) s.push_back(tr.nullOverlaps[k]);
        report.details["q_null_" + params.nullDirections[k].label] =
            sampleQuantile(s, params.probe.quantileLevel);
    }
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Non-outlier delocalization.
// ---------------------------------------------------------------------------

struct DelocalizationParams {
    DominationProbe probe{0.0, 0.99, 200};
    double C = 10.0;
    double tau = 0.1;
    std::vector<int> indices = {1};  // 1-based eigenvalue indices a
    std::vector<Direction> directions = {Direction::randomUnit(1)};
    bool leftEdge = false;
};

inline CheckReport checkNonOutlierDelocalization(
    const EnsembleConfig& ens, const DelocalizationParams& params,
    std::uint64_t seed, const ExecPolicy& exec = {}) {
    const Aspect aspect = ens.aspect();
    const SpikeSpec spec = ens.spec();
    const OutlierIndexSet outliers = outlierIndexSet(spec, aspect.K);
    const int K = aspect.K;
    if (params.leftEdge && std::abs(aspect.phi - 1.0) < params.tau)
        throw ConfigError(
            "checkNonOutlierDelocalization: left edge needs |phi - 1| >= tau");
    for (int a : params.indices) {
        if (params.leftEdge) {
            if (a < static_cast<int>(params.tau * K) || a > K)
                throw ConfigError(
                    "checkNonOutlierDelocalization: left-edge index outside [tau K, K]");
        } else if (a < 1 || static_cast<double>(a) > (1.0 - params.tau) * K) {
            throw ConfigError(
                "checkNonOutlierDelocalization: index outside [1, (1-tau)K]");
        }
        if (!params.leftEdge && a <= outliers.sPlus)
            throw ConfigError("checkNonOutlierDelocalization: index is an outlier");
        if (params.leftEdge && a > K - outliers.sMinus)
            throw ConfigError("checkNonOutlierDelocalization: index is an outlier");
    }
    const Population pop = buildPopulation(spec, aspect);
    std::vector<detail::DirectionProfile> profiles;
    for (const auto& dir : params.directions)
        profiles.push_back(detail::profileDirection(pop, dir));

    // Deterministic delocalization envelope per (a, w).
    auto envelope = [&](int a, const detail::DirectionProfile& prof) {
        const double kap = edgeDistance(a, K);
        double sum = prof.norm2 / aspect.M;
        for (int i = 0; i < pop.d.size(); ++i) {
            const double shift = params.leftEdge ? pop.d(i) + 1.0
                                                 : pop.d(i) - 1.0;
            sum += detail::sigmaOf(pop.d(i), aspect.phi) *
                   prof.spikeCoords(i) * prof.spikeCoords(i) /
                   (aspect.M * (shift * shift + kap));
        }
        sum += prof.backgroundMass / (aspect.M * (1.0 + kap));
        return sum;
    };

    int maxIndex = 0;
    for (int a : params.indices) maxIndex = std::max(maxIndex, a);

    auto trialFn = [&](int t) {
        const SampleDraw draw = drawSample(pop, ens.law, seed, t, {});
        const Eigensystem top = decomposeTop(draw.Q, maxIndex);
        std::vector<double> out;
        for (int a : params.indices)
            for (const auto& prof : profiles) {
                const double comp = prof.w.dot(top.vectors.col(a - 1));
                out.push_back(comp * comp);
            }
        return out;
    };
    const auto results =
        mapTrials<std::vector<double>>(params.probe.trials, exec, trialFn);

    CheckReport report;
    report.name = "non-outlier-delocalization";
    report.trials = params.probe.trials;
    for (int t = 0; t < params.probe.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));
    double worst = 0.0;
    std::size_t col = 0;
    for (int a : params.indices)
        for (std::size_t p = 0; p < profiles.size(); ++p, ++col) {
            std::vector<double> ratios;
            const double env = envelope(a, profiles[p]);
            for (int t = 0; t < static_cast<int>(results.size()); ++t) {
                ratios.push_back(results[t][col] / env);
                report.table.push_back(
                    {t, "a=" + std::to_string(a) + "," + profiles[p].label,
                     "component_sq", results[t][col]});
            }
            const auto [q, bound] =
                dominationQuantile(ratios, params.probe, K, params.C);
            report.details["q_a" + std::to_string(a) + "_" +
                           profiles[p].label] = q;
            report.bound = bound;
            worst = std::max(worst, q);
        }
    report.statistic = worst;
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Law of non-outlier components: Theta-hat against chi^2_1.
// ---------------------------------------------------------------------------

struct NonOutlierLawParams {
    int trials = 2000;
    double tau = 0.1;
    int a = 3;  // 1-based eigenvalue index
    Direction direction = Direction::spike(0);
    double ksBound = 0.05;
};

inline CheckReport checkNonOutlierLaw(const EnsembleConfig& ens,
                                      const NonOutlierLawParams& params,
                                      std::uint64_t seed,
                                      const ExecPolicy& exec = {}) {
    const Aspect aspect = ens.aspect();
    const SpikeSpec spec = ens.spec();
    const OutlierIndexSet outliers = outlierIndexSet(spec, aspect.K);
    const int K = aspect.K;
    if (params.a < 1 || params.a > K)
        throw ConfigError("checkNonOutlierLaw: index out of range");
    if (params.a <= outliers.sPlus)
        throw ConfigError("checkNonOutlierLaw: index is an outlier");
    const Population pop = buildPopulation(spec, aspect);
    const auto prof = detail::profileDirection(pop, params.direction);

    double denom = prof.backgroundMass / aspect.M;
    for (int i = 0; i < pop.d.size(); ++i) {
        const double shift = pop.d(i) - 1.0;
        if (std::abs(shift) < 1e-12)
            throw ConfigError("checkNonOutlierLaw: a spike sits exactly at d = 1");
        denom += detail::sigmaOf(pop.d(i), aspect.phi) * prof.spikeCoords(i) *
                 prof.spikeCoords(i) / (aspect.M * shift * shift);
    }

    auto trialFn = [&](int t) {
        const SampleDraw draw = drawSample(pop, ens.law, seed, t, {});
        const Eigensystem top = decomposeTop(draw.Q, params.a);
        const double comp = prof.w.dot(top.vectors.col(params.a - 1));
        return comp * comp / denom;
    };
    const auto samples = mapTrials<double>(params.trials, exec, trialFn);

    CheckReport report;
    report.name = "non-outlier-law";
    report.trials = params.trials;
    for (int t = 0; t < params.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));
    for (int t = 0; t < static_cast<int>(samples.size()); ++t)
        report.table.push_back({t, "a=" + std::to_string(params.a),
                                "theta_hat", samples[t]});

    report.statistic = ksDistance(samples, chiSquared1Cdf);
    report.bound = params.ksBound;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (double x : samples) {
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
    }
    const double n = static_cast<double>(samples.size());
    report.details["moment1"] = m1 / n;
    report.details["moment2"] = m2 / n;
    report.details["moment3"] = m3 / n;
    report.details["median_theta_hat"] = sampleMedian(samples);
    // Admissible index range K^{1-tau} alpha_+^3 surfaced, not enforced: at
    // desk scale it is routinely empty while the statistic itself is sound.
    const double admissible = std::pow(static_cast<double>(K), 1.0 - params.tau) *
                              std::pow(outliers.alphaPlus, 3.0);
    report.details["admissible_a_max"] = admissible;
    report.details["hypothesis_strained"] =
        params.a > admissible ? 1.0 : 0.0;
    report.finalize();
    return report;
}

}  // namespace spikelab
