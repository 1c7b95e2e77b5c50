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

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "spikelab/harness.hpp"

namespace fs = std::filesystem;
using namespace spikelab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct CommonOptions {
    std::string configPath;
    std::string outDir;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int trials = 0;
    int threads = -1;
};

ExperimentConfig loadConfig(const CommonOptions& opts) {
    if (opts.configPath.empty())
        throw ConfigError("missing --config <path>");
    ExperimentConfig config = ExperimentConfig::fromFile(opts.configPath);
    if (opts.seedSet) config.seed = opts.seed;
    if (opts.threads >= 0) config.threads = opts.threads;
    if (!opts.outDir.empty()) config.outDir = opts.outDir;
    if (opts.trials > 0) {
        for (auto& block : config.checks) block["trials"] = opts.trials;
        if (config.sweep) config.sweep->trials = opts.trials;
    }
    return config;
}

void printReportLine(const CheckReport& r) {
    std::printf("%-28s statistic=%-12.6g bound=%-12.6g trials=%-6d %s\n",
                r.name.c_str(), r.statistic, r.bound, r.trials,
                r.pass ? "PASS" : "FAIL");
}

int cmdLaws(const CommonOptions& opts, double phi, int K, int gridPoints) {
    const std::string dir = opts.outDir.empty() ? "." : opts.outDir;
    fs::create_directories(dir);
    const auto [gm, gp] = edges(phi);

    {
        std::ofstream out(dir + "/laws_density.csv");
        out << "x,density,companion_density,atom,companion_atom\n";
        for (int i = 0; i <= gridPoints; ++i) {
            const double x = gm + (gp - gm) * i / static_cast<double>(gridPoints);
            out << formatDouble(x) << ',' << formatDouble(mpDensity(x, phi))
                << ',' << formatDouble(mpDensityCompanion(x, phi)) << ','
                << formatDouble(mpAtom(phi)) << ','
                << formatDouble(mpAtomCompanion(phi)) << '\n';
        }
    }
    {
        std::ofstream out(dir + "/laws_stieltjes.csv");
        out << "E,eta,re_m,im_m,re_w,im_w\n";
        for (int i = 0; i <= gridPoints; ++i) {
            const double E = gm - 1.0 + (gp - gm + 2.0) * i /
                                            static_cast<double>(gridPoints);
            for (double eta : {1e-3, 1e-2, 1e-1, 1.0}) {
                const SpectralPoint z(E, eta, phi);
                const Complex m = stieltjesM(z, phi);
                const Complex w = stieltjesW(z, phi);
                out << formatDouble(E) << ',' << formatDouble(eta) << ','
                    << formatDouble(m.real()) << ',' << formatDouble(m.imag())
                    << ',' << formatDouble(w.real()) << ','
                    << formatDouble(w.imag()) << '\n';
            }
        }
    }
    {
        std::ofstream out(dir + "/laws_spikes.csv");
        out << "d,theta,u,delta,kappa1,spacing1\n";
        for (int i = 0; i <= gridPoints; ++i) {
            const double d = 1.01 + 4.0 * i / static_cast<double>(gridPoints);
            out << formatDouble(d) << ','
                << formatDouble(classicalLocation(d, phi)) << ','
                << formatDouble(coneMass(d, phi)) << ','
                << formatDouble(fluctuationScale(d, phi)) << ','
                << formatDouble(edgeDistance(1, K)) << ','
                << formatDouble(edgeSpacing(1, K)) << '\n';
        }
    }
    {
        Aspect aspect(K, K);
        std::ofstream out(dir + "/laws_classical_locations.csv");
        out << "i,gamma_i\n";
        for (int i = 1; i <= std::min(K, 50); ++i)
            out << i << ','
                << formatDouble(classicalEigenvalueLocation(i, aspect)) << '\n';
    }
    std::printf("laws tables written to %s\n", dir.c_str());
    return kExitPass;
}

int cmdSimulate(const CommonOptions& opts, bool dump) {
    ExperimentConfig config = loadConfig(opts);
    initHarness();
    const int trials = opts.trials > 0 ? opts.trials : 10;
    const Aspect aspect = config.ensemble.aspect();
    const Population pop = buildPopulation(config.ensemble.spec(), aspect);
    const std::string dir = config.outDir.empty() ? "." : config.outDir;
    fs::create_directories(dir);
    std::ofstream out(dir + "/simulate.csv");
    out << "trial,index,mu,overlap_v1\n";
    const int top = std::min(10, aspect.M);
    const ExecPolicy exec{config.threads};
    struct Row {
        Vector mu;
        Vector overlap;
    };
    const auto rows = mapTrials<Row>(trials, exec, [&](int t) {
        const SampleDraw draw =
            drawSample(pop, config.ensemble.law, config.seed, t, {});
        const Eigensystem es = decomposeTop(draw.Q, top);
        Row row;
        row.mu = es.values.head(top);
        row.overlap = Vector::Zero(top);
        if (pop.V.cols() > 0)
            for (int i = 0; i < top; ++i) {
                const double c = pop.V.col(0).dot(es.vectors.col(i));
                row.overlap(i) = c * c;
            }
        return row;
    });
    for (int t = 0; t < trials; ++t)
        for (int i = 0; i < top; ++i)
            out << t << ',' << (i + 1) << ',' << formatDouble(rows[t].mu(i))
                << ',' << formatDouble(rows[t].overlap(i)) << '\n';
    if (dump) {
        const SampleDraw draw = drawSample(pop, config.ensemble.law,
                                           config.seed, 0, AssembleNeeds::all());
        dumpSampleDraw(dir + "/draw0.spklab", draw);
    }
    std::printf("simulation tables written to %s\n", dir.c_str());
    return kExitPass;
}

int cmdCheck(const CommonOptions& opts, const std::string& which) {
    ExperimentConfig config = loadConfig(opts);
    if (which != "all") {
        bool known = false;
        for (const auto& name : knownCheckNames())
            if (name == which) known = true;
        if (!known) throw ConfigError("unknown check: " + which);
        std::vector<Json> filtered;
        for (const auto& block : config.checks)
            if (block.at("name").get<std::string>() == which)
                filtered.push_back(block);
        if (filtered.empty()) {
            Json block;
            block["name"] = which;
            if (opts.trials > 0) block["trials"] = opts.trials;
            filtered.push_back(block);
        }
        config.checks = filtered;
    }
    if (config.checks.empty())
        throw ConfigError("config has no checks; pass a check name");
    const ExperimentResult result = runExperiment(config);
    for (const auto& r : result.reports) printReportLine(r);
    return result.allPass ? kExitPass : kExitFail;
}

int cmdSweep(const CommonOptions& opts) {
    ExperimentConfig config = loadConfig(opts);
    const auto rows = runSweep(config);
    std::printf("%-10s %-16s %-14s %-16s %-14s\n", "value", "detach_fraction",
                "median_top", "median_overlap", "theory_u");
    for (const auto& r : rows)
        std::printf("%-10.4g %-16.4g %-14.6g %-16.6g %-14.6g\n", r.axisValue,
                    r.detachFraction, r.medianTop, r.medianOverlap,
                    r.theoryOverlap);
    return kExitPass;
}

int cmdInfer(const CommonOptions& opts, const std::string& spectrumPath,
             const std::string& dataPath, int M, int N, double gapFactor,
             double supportThreshold) {
    initHarness();
    Vector spectrum;
    std::optional<Eigensystem> eigendata;
    Aspect aspect(1, 1);
    if (!dataPath.empty()) {
        // Raw data matrix (M rows x N columns): convert through the
        // mean-subtracted, rescaled sample covariance.
        const Matrix data = readNumericCsv(dataPath);
        const int m = static_cast<int>(data.rows());
        const int n = static_cast<int>(data.cols());
        aspect = Aspect(m, n);
        Vector rowMean = data.rowwise().mean();
        Matrix centered = data.colwise() - rowMean;
        Matrix qdot = centered * centered.transpose() /
                      (static_cast<double>(n - 1) * std::sqrt(aspect.phi));
        eigendata = decompose(qdot, true);
        spectrum = eigendata->values;
    } else if (!spectrumPath.empty()) {
        if (M <= 0 || N <= 0)
            throw ConfigError("infer: spectrum input needs --M and --N");
        aspect = Aspect(M, N);
        const Matrix raw = readNumericCsv(spectrumPath);
        spectrum = Eigen::Map<const Vector>(raw.data(), raw.size());
        std::sort(spectrum.data(), spectrum.data() + spectrum.size(),
                  std::greater<double>());
    } else {
        throw ConfigError("infer: pass --spectrum or --data");
    }

    const auto estimates =
        estimateSupercriticalSpikes(spectrum, aspect, gapFactor);
    Json out;
    out["M"] = aspect.M;
    out["N"] = aspect.N;
    out["phi"] = aspect.phi;
    out["gamma_plus"] = aspect.gammaPlus;
    out["gap_factor"] = gapFactor;
    Json list = Json::array();
    for (const auto& est : estimates) {
        Json e;
        e["eigenvalue_index"] = est.eigenvalueIndex;
        e["mu"] = est.mu;
        e["d_hat"] = est.dHat;
        e["sigma_hat"] = est.sigmaHat;
        e["stderr"] = est.stderrHat;
        e["cone_overlap"] = est.coneCorrection;
        if (eigendata) {
            const auto rec = recoverSupport(
                eigendata->vectors.col(est.eigenvalueIndex - 1),
                supportThreshold);
            e["support_size"] = rec.indices.size();
            e["support_recovery_heuristic_for_nonconstant_profile"] =
                rec.heuristicForNonconstantProfile;
            const auto detect = detectabilityReport(
                est.sigmaHat, std::max<std::size_t>(1, rec.indices.size()),
                aspect);
            e["detectability"] = {
                {"naive_entrywise", detect.naiveEntrywise},
                {"naive_margin", detect.naiveMargin},
                {"pca_supercritical", detect.pcaSupercritical},
                {"pca_margin", detect.pcaMargin},
                {"size_feasible", detect.sizeFeasible},
                {"size_margin", detect.sizeMargin}};
        }
        list.push_back(e);
    }
    out["estimates"] = list;

    if (eigendata) {
        // Coordinate-direction scan of the edge-eigenvector bias; flags
        // candidate subcritical spikes concentrated on few coordinates.
        const int sPlus = static_cast<int>(estimates.size());
        const int lo = sPlus + 1;
        const int hi = std::min(lo + 9, aspect.K);
        double best = 0.0;
        int bestCoord = -1;
        for (int k = 0; k < aspect.M; ++k) {
            Vector e = Vector::Zero(aspect.M);
            e(k) = 1.0;
            const auto bias = detectSubcriticalBias(*eigendata, e, lo, hi,
                                                    aspect, 10.0, std::nullopt,
                                                    sPlus);
            if (bias.biasScore > best) {
                best = bias.biasScore;
                bestCoord = k;
            }
        }
        out["edge_bias_scan"] = {{"max_bias_score", best},
                                 {"coordinate", bestCoord + 1},
                                 {"unbiased_level", 1.0}};
    }

    const std::string dir = opts.outDir.empty() ? "." : opts.outDir;
    fs::create_directories(dir);
    std::ofstream jsonOut(dir + "/inference.json");
    jsonOut << out.dump(2) << '\n';
    std::cout << out.dump(2) << std::endl;
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikelab: spiked sample covariance laboratory"};
    app.require_subcommand(1);

    CommonOptions opts;
    app.add_option("--config", opts.configPath, "experiment config (JSON)");
    app.add_option("--out", opts.outDir, "output directory");
    auto* seedOpt = app.add_option("--seed", opts.seed, "master seed");
    app.add_option("--trials", opts.trials, "override trial counts");
    app.add_option("--threads", opts.threads, "worker threads (0 = all cores)");

    auto* laws = app.add_subcommand("laws", "tabulate the closed-form laws");
    double phi = 1.0;
    int lawsK = 1000;
    int gridPoints = 200;
    laws->add_option("--phi", phi, "aspect ratio M/N");
    laws->add_option("--K", lawsK, "K for index-dependent scales");
    laws->add_option("--grid", gridPoints, "grid points");

    auto* simulate =
        app.add_subcommand("simulate", "draw spectra for one configuration");
    bool dump = false;
    simulate->add_flag("--dump", dump, "write the first draw's matrices");

    auto* check = app.add_subcommand("check", "run verification suites");
    std::string which = "all";
    check->add_option("name", which, "check name or 'all'");

    auto* sweep = app.add_subcommand("sweep", "run the configured sweep");

    auto* infer = app.add_subcommand("infer", "spike inference from a spectrum");
    std::string spectrumPath, dataPath;
    int inferM = 0, inferN = 0;
    double gapFactor = 10.0;
    double supportThreshold = 3.0;
    infer->add_option("--spectrum", spectrumPath, "CSV of eigenvalues");
    infer->add_option("--data", dataPath, "CSV data matrix, M rows x N cols");
    infer->add_option("--M", inferM, "population dimension for spectrum input");
    infer->add_option("--N", inferN, "sample count for spectrum input");
    infer->add_option("--gap-factor", gapFactor,
                      "outlier threshold in units of K^{-2/3}");
    infer->add_option("--support-threshold", supportThreshold,
                      "support recovery threshold in units of M^{-1/2}");

    auto* universality =
        app.add_subcommand("universality", "two-ensemble comparison");

    CLI11_PARSE(app, argc, argv);
    opts.seedSet = seedOpt->count() > 0;

    try {
        if (laws->parsed()) return cmdLaws(opts, phi, lawsK, gridPoints);
        if (simulate->parsed()) return cmdSimulate(opts, dump);
        if (check->parsed()) return cmdCheck(opts, which);
        if (sweep->parsed()) return cmdSweep(opts);
        if (infer->parsed())
            return cmdInfer(opts, spectrumPath, dataPath, inferM, inferN,
                            gapFactor, supportThreshold);
        if (universality->parsed()) return cmdCheck(opts, "universality-pair");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitError;
    }
    return kExitError;
}
