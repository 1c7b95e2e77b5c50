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

// Verification suites for the uncorrelated (Sigma = I) reference ensemble:
// isotropic resolvent law, eigenvalue rigidity, quantum unique ergodicity,
// level repulsion, and the two-ensemble fixed-index universality comparison.

#pragma once

#include "spikelab/checks.hpp"

namespace spikelab {

namespace detail {

inline void requireNullEnsemble(const EnsembleConfig& ens, const char* who) {
    if (!ens.spikeStrengths.empty())
        throw ConfigError(std::string(who) + ": requires Sigma = I (no spikes)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Isotropic local law: |<v, G(z) w> - m_{1/phi}(z) <v,w>| against the
// fundamental error parameter, over a spectral-domain grid.
// ---------------------------------------------------------------------------

struct IsotropicLawParams {
    int trials = 100;
    double epsilon = 0.0;
    double C = 10.0;
    int gridPoints = 50;      // per regime
    int vectorPairs = 2;      // seeded random unit pairs
    double omega = 0.1;
    bool includeSTilde = true;
};

inline CheckReport checkIsotropicLaw(const EnsembleConfig& ens,
                                     const IsotropicLawParams& params,
                                     std::uint64_t seed,
                                     const ExecPolicy& exec = {}) {
    detail::requireNullEnsemble(ens, "checkIsotropicLaw");
    const Aspect aspect = ens.aspect();
    const Population pop = buildPopulation(ens.spec(), aspect);
    const double phi = aspect.phi;
    const int M = aspect.M;

    struct GridPoint {
        SpectralPoint z;
        Complex m;      // m_{1/phi}(z)
        double psi;     // admissible error scale
        bool inS;
    };
    auto buildGrid = [&](DomainRegime regime, int count) {
        // Oversample the rectangle, keep an even subsample of admissible
        // points.
        DomainGrid g = DomainGrid::make(aspect, regime, 40, 24, params.omega);
        std::vector<GridPoint> pts;
        if (g.points.empty()) return pts;
        const std::size_t stride =
            std::max<std::size_t>(1, g.points.size() / count);
        for (std::size_t i = 0; i < g.points.size() && pts.size() <
                 static_cast<std::size_t>(count); i += stride) {
            const SpectralPoint& z = g.points[i];
            GridPoint p;
            p.z = z;
            p.m = stieltjesM(z, 1.0 / phi);
            const double imTerm =
                std::sqrt(std::max(0.0, p.m.imag()) / (M * z.eta));
            p.inS = regime == DomainRegime::S;
            p.psi = p.inS ? imTerm + 1.0 / (M * z.eta) : imTerm;
            if (p.psi > 0.0) pts.push_back(p);
        }
        return pts;
    };
    std::vector<GridPoint> grid = buildGrid(DomainRegime::S, params.gridPoints);
    if (params.includeSTilde) {
        const auto tilde = buildGrid(DomainRegime::STilde, params.gridPoints);
        grid.insert(grid.end(), tilde.begin(), tilde.end());
    }
    if (grid.empty()) throw ConfigError("checkIsotropicLaw: empty grid");

    // Fixed deterministic direction pairs: coordinates, equal pair, and
    // seeded random unit pairs.
    std::vector<std::pair<Vector, Vector>> pairs;
    {
        Vector e1 = Direction::coordinate(0).resolve(pop);
        Vector e2 = Direction::coordinate(1).resolve(pop);
        pairs.emplace_back(e1, e2);
        Vector u = Direction::randomUnit(1).resolve(pop);
        pairs.emplace_back(u, u);
        for (int k = 0; k < params.vectorPairs; ++k)
            pairs.emplace_back(Direction::randomUnit(2 * k + 2).resolve(pop),
                               Direction::randomUnit(2 * k + 3).resolve(pop));
    }

    auto trialFn = [&](int t) {
        const SampleDraw draw =
            drawSample(pop, ens.law, seed, t, {false, false, true, false});
        const Eigensystem h = decompose(draw.H, true);
        double worst = 0.0;
        for (const auto& [v, w] : pairs) {
            const Vector pv = h.vectors.transpose() * v;
            const Vector pw = h.vectors.transpose() * w;
            const double vw = v.dot(w);
            for (const auto& gp : grid) {
                Complex form = 0.0;
                const Complex z = gp.z.z();
                for (int i = 0; i < M; ++i)
                    form += pv(i) * pw(i) / (h.values(i) - z);
                const double obs = std::abs(form - gp.m * vw);
                worst = std::max(worst, obs / gp.psi);
            }
        }
        return worst;
    };
    const auto samples = mapTrials<double>(params.trials, exec, trialFn);

    CheckReport report;
    report.name = "isotropic-law";
    report.trials = params.trials;
    for (int t = 0; t < params.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));
    double worst = 0.0;
    for (int t = 0; t < static_cast<int>(samples.size()); ++t) {
        worst = std::max(worst, samples[t]);
        report.table.push_back({t, "grid-max", "residual_over_psi", samples[t]});
    }
    report.statistic = worst;
    report.bound = params.C * std::pow(static_cast<double>(aspect.K),
                                       params.epsilon);
    report.details["grid_size"] = static_cast<double>(grid.size());
    report.details["pairs"] = static_cast<double>(pairs.size());
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Rigidity and quantum unique ergodicity.
// ---------------------------------------------------------------------------

struct RigidityQueParams {
    int trials = 2000;
    double tau = 0.1;
    std::vector<int> rigidityIndices = {1, 2, 3, 5, 10, 20};
    double rigidityQuantile = 0.99;
    // Pooled top-index rigidity ratios empirically reach ~11.5 at the 99%
    // level for K in the desk range.
    double rigidityC = 15.0;
    int queIndex = 5;  // eigenvector index a
    Direction queDirection = Direction::randomUnit(7);
    double ksBound = 0.05;
};

inline CheckReport checkRigidityAndQue(const EnsembleConfig& ens,
                                       const RigidityQueParams& params,
                                       std::uint64_t seed,
                                       const ExecPolicy& exec = {}) {
    detail::requireNullEnsemble(ens, "checkRigidityAndQue");
    const Aspect aspect = ens.aspect();
    const int K = aspect.K;
    for (int i : params.rigidityIndices)
        if (i < 1 || i > K) throw ConfigError("checkRigidityAndQue: bad index");
    if (params.queIndex < 1 ||
        static_cast<double>(params.queIndex) >
            std::pow(static_cast<double>(K), 1.0 - params.tau))
        throw ConfigError("checkRigidityAndQue: queIndex beyond K^{1-tau}");
    const Population pop = buildPopulation(ens.spec(), aspect);
    const Vector w = params.queDirection.resolve(pop);

    std::vector<double> gamma;
    for (int i : params.rigidityIndices)
        gamma.push_back(classicalEigenvalueLocation(i, aspect));

    struct Trial {
        std::vector<double> rigidity;
        double queComponent = 0.0;
    };
    auto trialFn = [&](int t) {
        const SampleDraw draw =
            drawSample(pop, ens.law, seed, t, {false, false, true, false});
        const Eigensystem h = decomposeTop(draw.H, params.queIndex);
        Trial out;
        for (std::size_t j = 0; j < params.rigidityIndices.size(); ++j) {
            const int i = params.rigidityIndices[j];
            const double weight =
                std::pow(static_cast<double>(std::min(i, K + 1 - i)),
                         1.0 / 3.0) *
                std::pow(static_cast<double>(K), 2.0 / 3.0);
            out.rigidity.push_back(std::abs(h.values(i - 1) - gamma[j]) *
                                   weight);
        }
        const double comp = w.dot(h.vectors.col(params.queIndex - 1));
        out.queComponent = aspect.M * comp * comp;
        return out;
    };
    const auto results = mapTrials<Trial>(params.trials, exec, trialFn);

    CheckReport report;
    report.name = "rigidity-que";
    report.trials = params.trials;
    for (int t = 0; t < params.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));

    std::vector<double> rigidityPool;
    std::vector<double> queSamples;
    for (int t = 0; t < static_cast<int>(results.size()); ++t) {
        for (std::size_t j = 0; j < params.rigidityIndices.size(); ++j)
            rigidityPool.push_back(results[t].rigidity[j]);
        queSamples.push_back(results[t].queComponent);
        report.table.push_back({t, "a=" + std::to_string(params.queIndex),
                                "M_component_sq", results[t].queComponent});
    }
    const double rigidityQ =
        sampleQuantile(rigidityPool, params.rigidityQuantile);
    const double ks = ksDistance(queSamples, chiSquared1Cdf);
    report.details["rigidity_quantile"] = rigidityQ;
    report.details["rigidity_bound"] = params.rigidityC;
    report.details["que_ks"] = ks;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (double x : queSamples) {
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
    }
    const double n = static_cast<double>(queSamples.size());
    report.details["que_moment1"] = m1 / n;
    report.details["que_moment2"] = m2 / n;
    report.details["que_moment3"] = m3 / n;
    // Exact finite-M reference: for a uniformly distributed unit vector the
    // squared component is Beta(1/2, (M-1)/2), so M times it has CDF
    // I_{t/M}(1/2, (M-1)/2). Its distance to chi^2_1 bounds what any
    // finite-M sample can achieve.
    {
        double exact = 0.0;
        const double a = 0.5, b = 0.5 * (aspect.M - 1);
        for (int g = 1; g <= 400; ++g) {
            const double x = 12.0 * g / 400.0;
            const double fBeta = regularizedBeta(
                std::min(1.0, x / aspect.M), a, b);
            exact = std::max(exact, std::abs(fBeta - chiSquared1Cdf(x)));
        }
        report.details["beta_exact_ks_gap"] = exact;
    }
    report.statistic =
        std::max(rigidityQ / params.rigidityC, ks / params.ksBound);
    report.bound = 1.0;
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Level repulsion: P(lambda_a - lambda_{a+1} <= Delta_a K^{-eps}).
// ---------------------------------------------------------------------------

struct LevelRepulsionParams {
    int trials = 2000;
    int a = 1;
    double epsilon = 0.5;
    double delta = 0.5;
    double C = 2.2360679774997896;  // bound C K^{-delta} = 0.1 at K = 500
    std::vector<double> extraEpsilons = {0.25, 1.0};
};

inline CheckReport checkLevelRepulsion(const EnsembleConfig& ens,
                                       const LevelRepulsionParams& params,
                                       std::uint64_t seed,
                                       const ExecPolicy& exec = {}) {
    detail::requireNullEnsemble(ens, "checkLevelRepulsion");
    const Aspect aspect = ens.aspect();
    const int K = aspect.K;
    if (params.a < 1 || 2 * params.a > K)
        throw ConfigError("checkLevelRepulsion: a outside [1, K/2]");
    const Population pop = buildPopulation(ens.spec(), aspect);
    const double spacing = edgeSpacing(params.a, K);

    auto trialFn = [&](int t) {
        const SampleDraw draw =
            drawSample(pop, ens.law, seed, t, {false, false, true, false});
        const Vector lambda = decompose(draw.H, false).values;
        return lambda(params.a - 1) - lambda(params.a);
    };
    const auto gaps = mapTrials<double>(params.trials, exec, trialFn);

    CheckReport report;
    report.name = "level-repulsion";
    report.trials = params.trials;
    for (int t = 0; t < params.trials; ++t)
        report.seeds.push_back(derivedSeed(seed, t));
    auto fractionBelow = [&](double eps) {
        const double threshold =
            spacing * std::pow(static_cast<double>(K), -eps);
        int count = 0;
        for (double g : gaps)
            if (g <= threshold) ++count;
        return static_cast<double>(count) / gaps.size();
    };
    for (int t = 0; t < static_cast<int>(gaps.size()); ++t)
        report.table.push_back(
            {t, "a=" + std::to_string(params.a), "gap", gaps[t]});
    report.statistic = fractionBelow(params.epsilon);
    report.bound =
        params.C * std::pow(static_cast<double>(K), -params.delta);
    report.details["typical_spacing"] = spacing;
    report.details["min_gap"] =
        *std::min_element(gaps.begin(), gaps.end());
    for (double eps : params.extraEpsilons)
        report.details["fraction_eps_" + std::to_string(eps)] =
            fractionBelow(eps);
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Two-ensemble fixed-index universality comparison.
// ---------------------------------------------------------------------------

struct UniversalityParams {
    int trials = 1000;
    std::vector<int> eigenvalueIndices = {1};
    int eigenvectorIndex = 3;
    Direction direction = Direction::randomUnit(9);
    double ksBound = 0.1;
};

inline CheckReport checkUniversalityPair(const EnsembleConfig& ensA,
                                         const EnsembleConfig& ensB,
                                         const UniversalityParams& params,
                                         std::uint64_t seedA,
                                         std::uint64_t seedB,
                                         const ExecPolicy& exec = {}) {
    if (ensA.M != ensB.M || ensA.N != ensB.N || ensA.r != ensB.r)
        throw ConfigError("checkUniversalityPair: mismatched dimensions");
    detail::requireNullEnsemble(ensA, "checkUniversalityPair");
    detail::requireNullEnsemble(ensB, "checkUniversalityPair");
    const Aspect aspect = ensA.aspect();
    const int K = aspect.K;
    const Population pop = buildPopulation(ensA.spec(), aspect);
    const Vector w = params.direction.resolve(pop);

    std::vector<double> gamma, spacing;
    for (int a : params.eigenvalueIndices) {
        if (a < 1 || 2 * a > K)
            throw ConfigError("checkUniversalityPair: bad eigenvalue index");
        gamma.push_back(classicalEigenvalueLocation(a, aspect));
        spacing.push_back(edgeSpacing(a, K));
    }
    const int topK =
        std::max(params.eigenvectorIndex,
                 *std::max_element(params.eigenvalueIndices.begin(),
                                   params.eigenvalueIndices.end()));

    struct Trial {
        std::vector<double> normalizedEigenvalues;
        double component = 0.0;
    };
    auto runEnsemble = [&](const EnsembleConfig& ens, std::uint64_t seed) {
        return mapTrials<Trial>(params.trials, exec, [&](int t) {
            const SampleDraw draw =
                drawSample(pop, ens.law, seed, t, {false, false, true, false});
            const Eigensystem h = decomposeTop(draw.H, topK);
            Trial out;
            for (std::size_t j = 0; j < gamma.size(); ++j) {
                const int a = params.eigenvalueIndices[j];
                out.normalizedEigenvalues.push_back(
                    (h.values(a - 1) - gamma[j]) / spacing[j]);
            }
            const double comp =
                w.dot(h.vectors.col(params.eigenvectorIndex - 1));
            out.component = aspect.M * comp * comp;
            return out;
        });
    };
    const auto resA = runEnsemble(ensA, seedA);
    const auto resB = runEnsemble(ensB, seedB);

    CheckReport report;
    report.name = "universality-pair";
    report.trials = 2 * params.trials;
    report.seeds = {seedA, seedB};
    double worst = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
        std::vector<double> a, b;
        for (const auto& tr : resA) a.push_back(tr.normalizedEigenvalues[j]);
        for (const auto& tr : resB) b.push_back(tr.normalizedEigenvalues[j]);
        const double ks = ksTwoSample(a, b);
        report.details["ks_eigenvalue_a" +
                       std::to_string(params.eigenvalueIndices[j])] = ks;
        worst = std::max(worst, ks);
    }
    {
        std::vector<double> a, b;
        for (const auto& tr : resA) a.push_back(tr.component);
        for (const auto& tr : resB) b.push_back(tr.component);
        const double ks = ksTwoSample(a, b);
        report.details["ks_eigenvector"] = ks;
        worst = std::max(worst, ks);
        for (int t = 0; t < static_cast<int>(a.size()); ++t) {
            report.table.push_back({t, "ensembleA", "M_component_sq", a[t]});
            report.table.push_back({t, "ensembleB", "M_component_sq", b[t]});
        }
    }
    report.statistic = worst;
    report.bound = params.ksBound;
    report.finalize();
    return report;
}

// ---------------------------------------------------------------------------
// Qdot equivalence: rerun the outlier, sticking, and cone suites on the
// mean-subtracted matrix, plus the deterministic shift-invariance identity.
// ---------------------------------------------------------------------------

struct QdotEquivalenceParams {
    OutlierLocationParams outlier;
    StickingParams sticking;
    ConeParams cone;
    double shiftTolerance = 1e-10;
};

inline CheckReport checkQdotEquivalence(const EnsembleConfig& ens,
                                        const QdotEquivalenceParams& params,
                                        std::uint64_t seed,
                                        const ExecPolicy& exec = {}) {
    const Aspect aspect = ens.aspect();
    const Population pop = buildPopulation(ens.spec(), aspect);

    // Deterministic shift invariance: Qdot is unchanged under a row-wise
    // shift X -> X + m 1^T.
    double shiftError = 0.0;
    {
        Matrix X = sampleNoise(ens.law, aspect.M + ens.r, aspect.N, aspect,
                               seed, 0xFEED);
        AssembleNeeds needs;
        needs.Q = false;
        needs.Qdot = true;
        const SampleDraw base = assembleMatrices(pop, X, needs);
        PhiloxStream rng(seed, 0xFEED + 1);
        Matrix shifted = X;
        for (int i = 0; i < shifted.rows(); ++i) {
            const double m = rng.gaussian();
            shifted.row(i).array() += m;
        }
        const SampleDraw moved = assembleMatrices(pop, shifted, needs);
        shiftError = (base.Qdot - moved.Qdot).cwiseAbs().maxCoeff() /
                     std::max(1.0, base.Qdot.cwiseAbs().maxCoeff());
    }

    const CheckReport outlier = checkOutlierLocations(
        ens, params.outlier, seed, exec, MatrixKind::Qdot);
    const CheckReport sticking =
        checkSticking(ens, params.sticking, seed, exec, MatrixKind::Qdot);
    const CheckReport cone =
        checkConeNearBulk(ens, params.cone, seed, exec, MatrixKind::Qdot);

    CheckReport report;
    report.name = "qdot-equivalence";
    report.trials = outlier.trials + sticking.trials + cone.trials;
    report.seeds = {seed};
    report.details["shift_invariance_error"] = shiftError;
    report.details["outlier_statistic"] = outlier.statistic;
    report.details["outlier_bound"] = outlier.bound;
    report.details["sticking_statistic"] = sticking.statistic;
    report.details["sticking_bound"] = sticking.bound;
    report.details["cone_statistic"] = cone.statistic;
    report.details["cone_bound"] = cone.bound;
    for (const auto& sub : {outlier, sticking, cone})
        for (const auto& row : sub.table)
            report.table.push_back(
                {row.trial, sub.name + ":" + row.index, row.statistic,
                 row.value});
    report.statistic = std::max(
        {shiftError / params.shiftTolerance, outlier.statistic / outlier.bound,
         sticking.statistic / sticking.bound, cone.statistic / cone.bound});
    report.bound = 1.0;
    report.finalize();
    return report;
}

}  // namespace spikelab
