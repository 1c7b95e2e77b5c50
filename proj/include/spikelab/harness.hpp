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

// Experiment orchestration: versioned JSON configuration, deterministic
// Monte Carlo execution with reproducible parallelism, parameter sweeps,
// and serialization of reports and plot-ready tables.

#pragma once

#include <filesystem>
#include <json.hpp>

#include "spikelab/checks.hpp"
#include "spikelab/checks_null.hpp"
#include "spikelab/inference.hpp"
#include "spikelab/io.hpp"

extern "C" void openblas_set_num_threads(int);

namespace spikelab {

using Json = nlohmann::ordered_json;

// Trial-level parallelism is the only parallelism: with BLAS pinned to one
// thread, the outputs cannot depend on the worker count.
inline void initHarness() { openblas_set_num_threads(1); }

// ---------------------------------------------------------------------------
// Config parsing (version 1; unknown fields are rejected).
// ---------------------------------------------------------------------------

namespace cfg {

inline void rejectUnknown(const Json& obj,
                          std::initializer_list<const char*> allowed,
                          const std::string& where) {
    if (!obj.is_object())
        throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw ConfigError("config: unknown field '" + key + "' in " + where);
    }
}

template <class T>
T get(const Json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

template <class T>
T require(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw ConfigError("config: missing field '" + std::string(key) +
                          "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

inline Direction parseDirection(const std::string& text) {
    auto num = [&](std::size_t offset) {
        const int v = std::stoi(text.substr(offset));
        if (v < 1) throw ConfigError("config: direction index must be >= 1");
        return v;
    };
    try {
        if (text.rfind("rand", 0) == 0)
            return Direction::randomUnit(num(4));
        if (!text.empty() && text[0] == 'v')
            return Direction::spike(num(1) - 1);
        if (!text.empty() && text[0] == 'e')
            return Direction::coordinate(num(1) - 1);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: bad direction '" + text +
                      "' (want v<k>, e<k>, or rand<k>)");
}

inline std::vector<Direction> parseDirections(const Json& arr,
                                              const std::string& where) {
    if (!arr.is_array())
        throw ConfigError("config: " + where + " must be an array");
    std::vector<Direction> out;
    for (const auto& item : arr)
        out.push_back(parseDirection(item.get<std::string>()));
    return out;
}

inline EnsembleConfig parseEnsemble(const Json& obj, const std::string& where) {
    rejectUnknown(obj, {"M", "N", "r", "entry_law", "spikes", "max_spikes"},
                  where);
    EnsembleConfig ens;
    ens.M = require<int>(obj, "M", where);
    ens.N = require<int>(obj, "N", where);
    ens.r = get<int>(obj, "r", 0);
    ens.law = entryLawFromName(get<std::string>(obj, "entry_law", "gaussian"));
    ens.maxSpikes = get<int>(obj, "max_spikes", 8);
    if (obj.contains("spikes"))
        for (const auto& d : obj.at("spikes"))
            ens.spikeStrengths.push_back(d.get<double>());
    return ens;
}

inline DominationProbe parseProbe(const Json& obj, int defaultTrials,
                                  double defaultQuantile = 0.99) {
    DominationProbe probe;
    probe.trials = get<int>(obj, "trials", defaultTrials);
    probe.quantileLevel = get<double>(obj, "quantile", defaultQuantile);
    probe.epsilon = get<double>(obj, "epsilon", 0.0);
    if (probe.trials < 1) throw ConfigError("config: trials must be >= 1");
    probe.validate();
    return probe;
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Experiment configuration.
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::string axis;  // "d" or "phi"
    std::vector<double> values;
    int spikeIndex = 0;
    int trials = 200;
    double gapFactor = 10.0;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int threads = 0;
    std::string outDir;
    EnsembleConfig ensemble;
    std::optional<EnsembleConfig> ensembleB;
    std::vector<Json> checks;  // raw check blocks, dispatched at run time
    std::optional<SweepConfig> sweep;
    Json echo;  // normalized config for the report

    static ExperimentConfig parse(const Json& root) {
        cfg::rejectUnknown(root,
                           {"version", "seed", "threads", "out_dir", "ensemble",
                            "ensemble_b", "checks", "sweep"},
                           "top level");
        const int version = cfg::require<int>(root, "version", "top level");
        if (version != 1)
            throw ConfigError("config: unsupported version " +
                              std::to_string(version));
        ExperimentConfig out;
        out.seed = cfg::get<std::uint64_t>(root, "seed", 1);
        out.threads = cfg::get<int>(root, "threads", 0);
        out.outDir = cfg::get<std::string>(root, "out_dir", "");
        out.ensemble =
            cfg::parseEnsemble(cfg::require<Json>(root, "ensemble", "top level"),
                               "ensemble");
        out.ensemble.aspect();  // validates dimensions
        out.ensemble.spec().validate(out.ensemble.aspect());
        if (root.contains("ensemble_b"))
            out.ensembleB =
                cfg::parseEnsemble(root.at("ensemble_b"), "ensemble_b");
        if (root.contains("checks")) {
            if (!root.at("checks").is_array())
                throw ConfigError("config: checks must be an array");
            for (const auto& c : root.at("checks")) out.checks.push_back(c);
        }
        if (root.contains("sweep")) {
            const Json& s = root.at("sweep");
            cfg::rejectUnknown(
                s, {"axis", "values", "spike_index", "trials", "gap_factor"},
                "sweep");
            SweepConfig sweep;
            sweep.axis = cfg::require<std::string>(s, "axis", "sweep");
            if (sweep.axis != "d" && sweep.axis != "phi")
                throw ConfigError("config: sweep axis must be 'd' or 'phi'");
            for (const auto& v : cfg::require<Json>(s, "values", "sweep"))
                sweep.values.push_back(v.get<double>());
            if (sweep.values.empty())
                throw ConfigError("config: sweep values must be nonempty");
            sweep.spikeIndex = cfg::get<int>(s, "spike_index", 0);
            sweep.trials = cfg::get<int>(s, "trials", 200);
            sweep.gapFactor = cfg::get<double>(s, "gap_factor", 10.0);
            out.sweep = sweep;
        }
        out.echo = root;
        return out;
    }

    static ExperimentConfig fromFile(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open " + path);
        Json root;
        try {
            root = Json::parse(in);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: JSON parse error: ") +
                              e.what());
        }
        return parse(root);
    }
};

// ---------------------------------------------------------------------------
// Check dispatch.
// ---------------------------------------------------------------------------

namespace detail {

// With dryRun set, parses and validates the block without sampling.
inline CheckReport dispatchCheck(const ExperimentConfig& config,
                                 const Json& block, bool dryRun = false) {
    const ExecPolicy exec{config.threads};
    const auto& ens = config.ensemble;
    const std::string name =
        cfg::require<std::string>(block, "name", "check block");
    const std::uint64_t seed = config.seed;

    if (name == "outlier-locations") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "quantile", "epsilon", "C",
                            "edge_C", "tau"},
                           name);
        OutlierLocationParams p;
        p.probe = cfg::parseProbe(block, 400);
        p.C = cfg::get<double>(block, "C", 5.0);
        p.edgeC = cfg::get<double>(block, "edge_C", 15.0);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        if (dryRun) return {};
        return checkOutlierLocations(ens, p, seed, exec);
    }
    if (name == "sticking") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "quantile", "epsilon", "C", "tau",
                            "indices", "near_critical"},
                           name);
        StickingParams p;
        p.probe = cfg::parseProbe(block, 200);
        p.C = cfg::get<double>(block, "C", 10.0);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        p.nearCritical = cfg::get<bool>(block, "near_critical", false);
        if (block.contains("indices")) {
            p.indices.clear();
            for (const auto& i : block.at("indices"))
                p.indices.push_back(i.get<int>());
        }
        if (dryRun) return {};
        return checkSticking(ens, p, seed, exec);
    }
    if (name == "cone-near-bulk" || name == "cone-far-from-bulk") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "quantile", "epsilon", "C", "tau",
                            "A", "directions", "off_diagonal_pairs", "d_A"},
                           name);
        ConeParams p;
        p.probe = cfg::parseProbe(block, 200);
        p.C = cfg::get<double>(block, "C", 10.0);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        p.farFromBulk = name == "cone-far-from-bulk";
        p.dA = cfg::get<double>(block, "d_A", 0.0);
        if (block.contains("A")) {
            p.A.clear();
            for (const auto& a : block.at("A"))
                p.A.push_back(a.get<int>() - 1);
        }
        if (block.contains("directions"))
            p.directions =
                cfg::parseDirections(block.at("directions"), "directions");
        if (block.contains("off_diagonal_pairs"))
            for (const auto& pair : block.at("off_diagonal_pairs"))
                p.offDiagonalPairs.emplace_back(pair.at(0).get<int>() - 1,
                                                pair.at(1).get<int>() - 1);
        if (dryRun) return {};
        return checkCone(ens, p, seed, exec);
    }
    if (name == "degenerate-cone") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "quantile", "epsilon", "C", "tau",
                            "null_directions"},
                           name);
        DegenerateConeParams p;
        p.probe = cfg::parseProbe(block, 200);
        p.C = cfg::get<double>(block, "C", 10.0);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        if (block.contains("null_directions"))
            p.nullDirections = cfg::parseDirections(block.at("null_directions"),
                                                    "null_directions");
        if (dryRun) return {};
        return checkDegenerateCone(ens, p, seed, exec);
    }
    if (name == "non-outlier-delocalization") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "quantile", "epsilon", "C", "tau",
                            "indices", "directions", "side"},
                           name);
        DelocalizationParams p;
        p.probe = cfg::parseProbe(block, 200);
        p.C = cfg::get<double>(block, "C", 10.0);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        p.leftEdge = cfg::get<std::string>(block, "side", "right") == "left";
        if (block.contains("indices")) {
            p.indices.clear();
            for (const auto& i : block.at("indices"))
                p.indices.push_back(i.get<int>());
        }
        if (block.contains("directions"))
            p.directions =
                cfg::parseDirections(block.at("directions"), "directions");
        if (dryRun) return {};
        return checkNonOutlierDelocalization(ens, p, seed, exec);
    }
    if (name == "non-outlier-law") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "tau", "a", "direction",
                            "ks_bound"},
                           name);
        NonOutlierLawParams p;
        p.trials = cfg::get<int>(block, "trials", 2000);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        p.a = cfg::get<int>(block, "a", 3);
        p.ksBound = cfg::get<double>(block, "ks_bound", 0.05);
        if (block.contains("direction"))
            p.direction = cfg::parseDirection(
                block.at("direction").get<std::string>());
        if (dryRun) return {};
        return checkNonOutlierLaw(ens, p, seed, exec);
    }
    if (name == "isotropic-law") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "epsilon", "C", "grid_points",
                            "vector_pairs", "omega", "include_s_tilde"},
                           name);
        IsotropicLawParams p;
        p.trials = cfg::get<int>(block, "trials", 100);
        p.epsilon = cfg::get<double>(block, "epsilon", 0.0);
        p.C = cfg::get<double>(block, "C", 10.0);
        p.gridPoints = cfg::get<int>(block, "grid_points", 50);
        p.vectorPairs = cfg::get<int>(block, "vector_pairs", 2);
        p.omega = cfg::get<double>(block, "omega", 0.1);
        p.includeSTilde = cfg::get<bool>(block, "include_s_tilde", true);
        if (dryRun) return {};
        return checkIsotropicLaw(ens, p, seed, exec);
    }
    if (name == "rigidity-que") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "tau", "rigidity_indices",
                            "rigidity_quantile", "rigidity_C", "que_index",
                            "que_direction", "ks_bound"},
                           name);
        RigidityQueParams p;
        p.trials = cfg::get<int>(block, "trials", 2000);
        p.tau = cfg::get<double>(block, "tau", 0.1);
        p.rigidityQuantile = cfg::get<double>(block, "rigidity_quantile", 0.99);
        p.rigidityC = cfg::get<double>(block, "rigidity_C", 15.0);
        p.queIndex = cfg::get<int>(block, "que_index", 5);
        p.ksBound = cfg::get<double>(block, "ks_bound", 0.05);
        if (block.contains("rigidity_indices")) {
            p.rigidityIndices.clear();
            for (const auto& i : block.at("rigidity_indices"))
                p.rigidityIndices.push_back(i.get<int>());
        }
        if (block.contains("que_direction"))
            p.queDirection = cfg::parseDirection(
                block.at("que_direction").get<std::string>());
        if (dryRun) return {};
        return checkRigidityAndQue(ens, p, seed, exec);
    }
    if (name == "level-repulsion") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "a", "epsilon", "delta", "C"},
                           name);
        LevelRepulsionParams p;
        p.trials = cfg::get<int>(block, "trials", 2000);
        p.a = cfg::get<int>(block, "a", 1);
        p.epsilon = cfg::get<double>(block, "epsilon", 0.5);
        p.delta = cfg::get<double>(block, "delta", 0.5);
        p.C = cfg::get<double>(block, "C", 2.2360679774997896);
        if (dryRun) return {};
        return checkLevelRepulsion(ens, p, seed, exec);
    }
    if (name == "universality-pair") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "eigenvalue_indices",
                            "eigenvector_index", "direction", "ks_bound"},
                           name);
        if (!config.ensembleB)
            throw ConfigError("config: universality-pair needs ensemble_b");
        UniversalityParams p;
        p.trials = cfg::get<int>(block, "trials", 1000);
        p.eigenvectorIndex = cfg::get<int>(block, "eigenvector_index", 3);
        p.ksBound = cfg::get<double>(block, "ks_bound", 0.1);
        if (block.contains("eigenvalue_indices")) {
            p.eigenvalueIndices.clear();
            for (const auto& i : block.at("eigenvalue_indices"))
                p.eigenvalueIndices.push_back(i.get<int>());
        }
        if (block.contains("direction"))
            p.direction = cfg::parseDirection(
                block.at("direction").get<std::string>());
        if (dryRun) return {};
        return checkUniversalityPair(config.ensemble, *config.ensembleB, p,
                                     config.seed, config.seed + 1, exec);
    }
    if (name == "qdot-equivalence") {
        cfg::rejectUnknown(block,
                           {"name", "trials", "outlier", "sticking", "cone",
                            "shift_tolerance"},
                           name);
        QdotEquivalenceParams p;
        // A flat trial count seeds every sub-block; explicit sub-block
        // values take precedence.
        int flatTrials = 0;
        if (block.contains("trials")) {
            flatTrials = cfg::get<int>(block, "trials", 0);
            if (flatTrials < 1) throw ConfigError("config: trials must be >= 1");
            p.outlier.probe.trials = flatTrials;
            p.sticking.probe.trials = flatTrials;
            p.cone.probe.trials = flatTrials;
        }
        if (block.contains("outlier")) {
            const Json& b = block.at("outlier");
            cfg::rejectUnknown(b, {"trials", "quantile", "epsilon", "C", "tau"},
                               "qdot outlier");
            p.outlier.probe =
                cfg::parseProbe(b, flatTrials > 0 ? flatTrials : 400);
            p.outlier.C = cfg::get<double>(b, "C", 5.0);
        }
        if (block.contains("sticking")) {
            const Json& b = block.at("sticking");
            cfg::rejectUnknown(
                b, {"trials", "quantile", "epsilon", "C", "tau", "indices"},
                "qdot sticking");
            p.sticking.probe =
                cfg::parseProbe(b, flatTrials > 0 ? flatTrials : 200);
            p.sticking.C = cfg::get<double>(b, "C", 10.0);
            if (b.contains("indices")) {
                p.sticking.indices.clear();
                for (const auto& i : b.at("indices"))
                    p.sticking.indices.push_back(i.get<int>());
            }
        }
        if (block.contains("cone")) {
            const Json& b = block.at("cone");
            cfg::rejectUnknown(
                b, {"trials", "quantile", "epsilon", "C", "tau", "A",
                    "directions"},
                "qdot cone");
            p.cone.probe =
                cfg::parseProbe(b, flatTrials > 0 ? flatTrials : 200);
            p.cone.C = cfg::get<double>(b, "C", 10.0);
            if (b.contains("A")) {
                p.cone.A.clear();
                for (const auto& a : b.at("A"))
                    p.cone.A.push_back(a.get<int>() - 1);
            }
            if (b.contains("directions"))
                p.cone.directions =
                    cfg::parseDirections(b.at("directions"), "directions");
        }
        p.shiftTolerance = cfg::get<double>(block, "shift_tolerance", 1e-10);
        if (dryRun) return {};
        return checkQdotEquivalence(ens, p, seed, exec);
    }
    throw ConfigError("config: unknown check '" + name + "'");
}

}  // namespace detail

inline const std::vector<std::string>& knownCheckNames() {
    static const std::vector<std::string> names = {
        "outlier-locations",  "sticking",
        "cone-near-bulk",     "cone-far-from-bulk",
        "degenerate-cone",    "non-outlier-delocalization",
        "non-outlier-law",    "isotropic-law",
        "rigidity-que",       "level-repulsion",
        "universality-pair",  "qdot-equivalence"};
    return names;
}

// ---------------------------------------------------------------------------
// Report serialization.
// ---------------------------------------------------------------------------

inline Json reportToJson(const CheckReport& report) {
    Json j;
    j["name"] = report.name;
    j["statistic"] = report.statistic;
    j["bound"] = report.bound;
    j["pass"] = report.pass;
    j["trials"] = report.trials;
    j["seeds"] = report.seeds;
    Json details = Json::object();
    for (const auto& [key, value] : report.details) details[key] = value;
    j["details"] = details;
    j["table"] = "tables/" + report.name + ".csv";
    return j;
}

inline void writeReportTable(const std::string& dir,
                             const CheckReport& report) {
    CsvWriter csv(dir + "/" + report.name + ".csv");
    for (const auto& row : report.table)
        csv.row(report.name, row.trial, row.index, row.statistic, row.value);
}

struct ExperimentResult {
    std::vector<CheckReport> reports;
    bool allPass = true;
    Json reportJson;
};

inline ExperimentResult runExperiment(const ExperimentConfig& config) {
    initHarness();
    // Reject malformed blocks up front so a bad trailing check cannot waste
    // the sampling done for the earlier ones.
    for (const auto& block : config.checks)
        detail::dispatchCheck(config, block, true);
    ExperimentResult result;
    for (const auto& block : config.checks) {
        CheckReport report = detail::dispatchCheck(config, block);
        result.allPass = result.allPass && report.pass;
        result.reports.push_back(std::move(report));
    }
    Json out;
    out["version"] = 1;
    out["seed"] = config.seed;
    out["config"] = config.echo;
    Json reports = Json::array();
    for (const auto& r : result.reports) reports.push_back(reportToJson(r));
    out["reports"] = reports;
    out["all_pass"] = result.allPass;
    result.reportJson = out;

    if (!config.outDir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.outDir);
        fs::create_directories(config.outDir + "/tables");
        std::ofstream jsonOut(config.outDir + "/report.json");
        jsonOut << result.reportJson.dump(2) << '\n';
        for (const auto& r : result.reports)
            writeReportTable(config.outDir + "/tables", r);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sweeps.
// ---------------------------------------------------------------------------

struct SweepRow {
    double axisValue = 0.0;
    double detachFraction = 0.0;
    double medianTop = 0.0;
    double medianOverlap = 0.0;  // <v_1, xi_1>^2, -1 when no spike direction
    double theoryOverlap = 0.0;  // u(d) when supercritical, else 0
};

inline std::vector<SweepRow> runSweep(const ExperimentConfig& config) {
    if (!config.sweep) throw ConfigError("runSweep: no sweep block in config");
    initHarness();
    const SweepConfig& sweep = *config.sweep;
    const ExecPolicy exec{config.threads};
    std::vector<SweepRow> rows;

    for (std::size_t gi = 0; gi < sweep.values.size(); ++gi) {
        const double value = sweep.values[gi];
        EnsembleConfig ens = config.ensemble;
        if (sweep.axis == "d") {
            if (ens.spikeStrengths.empty()) ens.spikeStrengths.push_back(value);
            else ens.spikeStrengths[sweep.spikeIndex] = value;
        } else {
            ens.N = std::max(1, static_cast<int>(std::lround(ens.M / value)));
        }
        const Aspect aspect = ens.aspect();
        const Population pop = buildPopulation(ens.spec(), aspect);
        const double threshold =
            aspect.gammaPlus +
            sweep.gapFactor *
                std::pow(static_cast<double>(aspect.K), -2.0 / 3.0);
        const bool haveSpike = !ens.spikeStrengths.empty();

        struct Trial {
            double mu1 = 0.0;
            double overlap = -1.0;
        };
        auto fn = [&](int t) {
            const SampleDraw draw =
                drawSample(pop, ens.law, config.seed, t, {});
            Trial out;
            if (haveSpike) {
                const Eigensystem top = decomposeTop(draw.Q, 1);
                out.mu1 = top.values(0);
                const double c = pop.V.col(0).dot(top.vectors.col(0));
                out.overlap = c * c;
            } else {
                out.mu1 = decompose(draw.Q, false).values(0);
            }
            return out;
        };
        const auto trials = mapTrials<Trial>(sweep.trials, exec, fn);

        SweepRow row;
        row.axisValue = value;
        std::vector<double> tops, overlaps;
        int detached = 0;
        for (const auto& tr : trials) {
            tops.push_back(tr.mu1);
            if (tr.mu1 > threshold) ++detached;
            if (tr.overlap >= 0.0) overlaps.push_back(tr.overlap);
        }
        row.detachFraction = static_cast<double>(detached) / trials.size();
        row.medianTop = sampleMedian(tops);
        row.medianOverlap = overlaps.empty() ? -1.0 : sampleMedian(overlaps);
        const double d =
            sweep.axis == "d" ? value
                              : (haveSpike ? ens.spikeStrengths[0] : 0.0);
        row.theoryOverlap = d > 1.0 ? coneMass(d, aspect.phi) : 0.0;
        rows.push_back(row);
    }
    if (!config.outDir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.outDir + "/tables");
        CsvWriter csv(config.outDir + "/tables/sweep.csv");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            const int trial = static_cast<int>(i);
            const std::string idx = formatDouble(r.axisValue);
            csv.row("sweep", trial, idx, "detach_fraction", r.detachFraction);
            csv.row("sweep", trial, idx, "median_top", r.medianTop);
            csv.row("sweep", trial, idx, "median_overlap", r.medianOverlap);
            csv.row("sweep", trial, idx, "theory_overlap", r.theoryOverlap);
        }
    }
    return rows;
}

// BBP transition read-out: nondecreasing detachment fractions and the
// interpolated 0.5-crossing location.
struct BbpSweepVerdict {
    bool monotone = true;
    double crossing = std::numeric_limits<double>::quiet_NaN();
    bool crossesInWindow = false;
};

inline BbpSweepVerdict evaluateBbpSweep(const std::vector<SweepRow>& rows,
                                        double windowLo, double windowHi) {
    BbpSweepVerdict verdict;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].detachFraction < rows[i - 1].detachFraction - 1e-12)
            verdict.monotone = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double f0 = rows[i - 1].detachFraction;
        const double f1 = rows[i].detachFraction;
        if (f0 < 0.5 && f1 >= 0.5) {
            const double x0 = rows[i - 1].axisValue;
            const double x1 = rows[i].axisValue;
            verdict.crossing =
                f1 == f0 ? x1 : x0 + (0.5 - f0) * (x1 - x0) / (f1 - f0);
            break;
        }
    }
    verdict.crossesInWindow = verdict.crossing >= windowLo &&
                              verdict.crossing <= windowHi;
    return verdict;
}

// ---------------------------------------------------------------------------
// Summaries.
// ---------------------------------------------------------------------------

struct Summary {
    double mean = 0.0;
    double stderrMean = 0.0;
    std::map<std::string, double> quantiles;
    double ksChiSquared1 = 0.0;
    std::optional<double> ksVsReference;
};

inline Summary summarize(const std::vector<double>& samples,
                         const std::vector<double>* reference = nullptr) {
    if (samples.empty()) throw ConfigError("summarize: empty samples");
    Summary s;
    s.mean = sampleMean(samples);
    double var = 0.0;
    for (double x : samples) var += (x - s.mean) * (x - s.mean);
    var /= std::max<std::size_t>(1, samples.size() - 1);
    s.stderrMean = std::sqrt(var / samples.size());
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95, 0.99})
        s.quantiles[formatDouble(p)] = sampleQuantile(samples, p);
    s.ksChiSquared1 = ksDistance(samples, chiSquared1Cdf);
    if (reference) s.ksVsReference = ksTwoSample(samples, *reference);
    return s;
}

}  // namespace spikelab
