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

#include <catch2/catch.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spikelab/harness.hpp"

using namespace spikelab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Json tinyConfig() {
    Json root;
    root["version"] = 1;
    root["seed"] = 9;
    root["threads"] = 1;
    root["ensemble"] = {{"M", 80}, {"N", 80}, {"entry_law", "gaussian"},
                        {"spikes", Json::array({2.0})}};
    // Small-K sticking ratios need a loose constant; the scale-calibrated
    // bounds live in the acceptance suite.
    root["checks"] = Json::array(
        {Json{{"name", "sticking"}, {"trials", 3}, {"C", 100.0},
              {"indices", Json::array({1, 2})}}});
    return root;
}

}  // namespace

TEST_CASE("config validation rejects unknown and malformed fields",
          "[harness]") {
    Json root = tinyConfig();
    root["bogus"] = 1;
    CHECK_THROWS_WITH(ExperimentConfig::parse(root),
                      Catch::Contains("bogus"));

    Json badVersion = tinyConfig();
    badVersion["version"] = 2;
    CHECK_THROWS_AS(ExperimentConfig::parse(badVersion), ConfigError);

    Json noEnsemble = tinyConfig();
    noEnsemble.erase("ensemble");
    CHECK_THROWS_AS(ExperimentConfig::parse(noEnsemble), ConfigError);

    Json badEnsembleField = tinyConfig();
    badEnsembleField["ensemble"]["what"] = 1;
    CHECK_THROWS_WITH(ExperimentConfig::parse(badEnsembleField),
                      Catch::Contains("what"));

    Json badLaw = tinyConfig();
    badLaw["ensemble"]["entry_law"] = "cauchy";
    CHECK_THROWS_AS(ExperimentConfig::parse(badLaw), DomainError);

    Json badCheck = tinyConfig();
    badCheck["checks"][0]["mystery"] = true;
    const ExperimentConfig parsed = ExperimentConfig::parse(badCheck);
    CHECK_THROWS_WITH(runExperiment(parsed), Catch::Contains("mystery"));
}

TEST_CASE("direction parsing", "[harness]") {
    CHECK(cfg::parseDirection("v2").label == "v2");
    CHECK(cfg::parseDirection("e17").index == 16);
    CHECK(cfg::parseDirection("rand4").kind == Direction::Kind::RandomUnit);
    CHECK_THROWS_AS(cfg::parseDirection("w3"), ConfigError);
    CHECK_THROWS_AS(cfg::parseDirection("v0"), ConfigError);
    CHECK_THROWS_AS(cfg::parseDirection(""), ConfigError);
}

TEST_CASE("experiments write byte-identical reports", "[harness]") {
    const fs::path dir = fs::temp_directory_path() / "spikelab_harness_test";
    fs::remove_all(dir);

    Json root = tinyConfig();
    ExperimentConfig c1 = ExperimentConfig::parse(root);
    c1.outDir = (dir / "run1").string();
    const auto res1 = runExperiment(c1);
    CHECK(res1.allPass);

    ExperimentConfig c2 = ExperimentConfig::parse(root);
    c2.outDir = (dir / "run2").string();
    runExperiment(c2);

    // Parallel degree must not change a byte of the payload.
    root["threads"] = 2;
    ExperimentConfig c3 = ExperimentConfig::parse(root);
    c3.outDir = (dir / "run3").string();
    runExperiment(c3);

    const std::string r1 = slurp((dir / "run1" / "report.json").string());
    const std::string r2 = slurp((dir / "run2" / "report.json").string());
    std::string r3 = slurp((dir / "run3" / "report.json").string());
    CHECK(r1 == r2);
    // The thread count is echoed in the config block; reports must agree
    // after normalizing that single field.
    const std::size_t pos = r3.find("\"threads\": 2");
    REQUIRE(pos != std::string::npos);
    r3.replace(pos, 12, "\"threads\": 1");
    CHECK(r1 == r3);

    const std::string t1 = slurp((dir / "run1" / "tables" / "sticking.csv").string());
    const std::string t3 = slurp((dir / "run3" / "tables" / "sticking.csv").string());
    CHECK(t1 == t3);
    CHECK(t1.rfind("check,trial,index,statistic,value\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("csv fields round-trip at 17 significant digits", "[harness]") {
    const double x = 0.1 + 0.2;  // not representable tidily
    CHECK(std::stod(formatDouble(x)) == x);
    CHECK(std::stod(formatDouble(1e-300)) == 1e-300);
    CHECK(std::stod(formatDouble(-12345.678901234567)) == -12345.678901234567);
}

TEST_CASE("matrix container round trip", "[harness]") {
    const fs::path path =
        fs::temp_directory_path() / "spikelab_container_test.bin";
    PhiloxStream rng(3, 0);
    Matrix A(7, 4);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 7; ++i) A(i, j) = rng.gaussian();
    writeMatrixContainer(path.string(), {{"A", A}, {"B", Matrix::Zero(2, 3)}});
    const auto back = readMatrixContainer(path.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "A");
    CHECK((back[0].value - A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back[1].value.rows() == 2);
    fs::remove(path);
    CHECK_THROWS_AS(readMatrixContainer(path.string()), NumericError);
}

TEST_CASE("numeric csv reader", "[harness]") {
    const fs::path path = fs::temp_directory_path() / "spikelab_csv_test.csv";
    {
        std::ofstream out(path);
        out << "1.5,2.5\n3.5,4.5\n";
    }
    const Matrix m = readNumericCsv(path.string());
    CHECK(m.rows() == 2);
    CHECK(m(1, 1) == 4.5);
    fs::remove(path);
}

TEST_CASE("sweep over spike strengths", "[harness]") {
    Json root = tinyConfig();
    root.erase("checks");
    root["ensemble"]["M"] = 150;
    root["ensemble"]["N"] = 150;
    root["sweep"] = {{"axis", "d"},
                     {"values", Json::array({0.5, 4.0})},
                     {"trials", 4},
                     {"gap_factor", 10.0}};
    const auto rows = runSweep(ExperimentConfig::parse(root));
    REQUIRE(rows.size() == 2);
    // Far-subcritical never detaches, strongly supercritical always does.
    CHECK(rows[0].detachFraction == 0.0);
    CHECK(rows[1].detachFraction == 1.0);
    CHECK(rows[1].theoryOverlap == Approx(coneMass(4.0, 1.0)));
    CHECK(rows[1].medianOverlap > 0.3);
}

TEST_CASE("bbp sweep verdict logic", "[harness]") {
    std::vector<SweepRow> rows(4);
    rows[0] = {0.8, 0.0, 0, 0, 0};
    rows[1] = {1.0, 0.1, 0, 0, 0};
    rows[2] = {1.2, 0.6, 0, 0, 0};
    rows[3] = {1.5, 1.0, 0, 0, 0};
    const auto verdict = evaluateBbpSweep(rows, 0.5, 1.5);
    CHECK(verdict.monotone);
    CHECK(verdict.crossing == Approx(1.16));
    CHECK(verdict.crossesInWindow);
    rows[2].detachFraction = 0.05;  // break monotonicity
    CHECK_FALSE(evaluateBbpSweep(rows, 0.5, 1.5).monotone);
}

TEST_CASE("summaries", "[harness]") {
    const auto constant = summarize({3.0, 3.0, 3.0});
    CHECK(constant.mean == 3.0);
    CHECK(constant.stderrMean == 0.0);
    std::vector<double> same = {1.0, 2.0, 3.0};
    CHECK(summarize(same, &same).ksVsReference.value() == 0.0);
    CHECK_THROWS_AS(summarize({}), ConfigError);

    PhiloxStream rng(8, 0);
    std::vector<double> chi(100000);
    for (auto& x : chi) {
        const double g = rng.gaussian();
        x = g * g;
    }
    CHECK(summarize(chi).ksChiSquared1 <= 0.01);
}

TEST_CASE("check dispatch covers every advertised name", "[harness]") {
    // Each known check must be reachable through a config block; config
    // errors about substance (not about the name) are acceptable here.
    for (const auto& name : knownCheckNames()) {
        Json root = tinyConfig();
        Json block = Json{{"name", name}};
        if (name == "qdot-equivalence") {
            block["outlier"] = Json{{"trials", 2}};
            block["sticking"] = Json{{"trials", 2}};
            block["cone"] = Json{{"trials", 2}};
        } else {
            block["trials"] = 2;
        }
        if (name == "non-outlier-delocalization")
            block["indices"] = Json::array({2, 5});
        root["checks"] = Json::array({block});
        if (name == "degenerate-cone")
            root["ensemble"]["spikes"] = Json::array({2.0, 2.0});
        if (name == "isotropic-law" || name == "rigidity-que" ||
            name == "level-repulsion" || name == "universality-pair")
            root["ensemble"]["spikes"] = Json::array();
        if (name == "universality-pair")
            root["ensemble_b"] = root["ensemble"];
        const ExperimentConfig config = ExperimentConfig::parse(root);
        CHECK_NOTHROW(runExperiment(config));
    }
    Json root = tinyConfig();
    root["checks"] = Json::array({Json{{"name", "no-such-check"}}});
    CHECK_THROWS_AS(runExperiment(ExperimentConfig::parse(root)), ConfigError);
}

TEST_CASE("experiments validate every block before sampling", "[harness]") {
    const fs::path dir =
        fs::temp_directory_path() / "spikelab_prevalidate_test";
    fs::remove_all(dir);
    Json root = tinyConfig();
    root["checks"].push_back(Json{{"name", "sticking"}, {"typo_field", 1}});
    ExperimentConfig config = ExperimentConfig::parse(root);
    config.outDir = dir.string();
    CHECK_THROWS_WITH(runExperiment(config), Catch::Contains("typo_field"));
    // Nothing was run, so nothing was written.
    CHECK_FALSE(fs::exists(dir / "report.json"));
    fs::remove_all(dir);
}

TEST_CASE("qdot-equivalence accepts a flat trials override", "[harness]") {
    Json root = tinyConfig();
    root["checks"] = Json::array({Json{{"name", "qdot-equivalence"},
                                       {"trials", 3},
                                       {"cone", Json{{"A", Json::array({1})}}}}});
    const auto result = runExperiment(ExperimentConfig::parse(root));
    REQUIRE(result.reports.size() == 1);
    CHECK(result.reports[0].trials == 9);  // three sub-checks, three each
}
