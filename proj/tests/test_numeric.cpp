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
#include <cmath>

#include "spikelab/numeric.hpp"
#include "spikelab/rng.hpp"

using namespace spikelab;

TEST_CASE("quadrature integrates smooth functions", "[numeric]") {
    const auto r1 = integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(r1.value == Approx(1.0 / 3.0).epsilon(1e-12));
    const auto r2 = integrate([](double x) { return std::sin(x); }, 0.0, kPi);
    CHECK(r2.value == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("quadrature handles integrable endpoint singularities", "[numeric]") {
    const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); },
                             1e-12, 1.0, 1e-9, 1e-12, 20000);
    CHECK(r.value == Approx(2.0).margin(1e-4));
}

TEST_CASE("solveBracketed finds roots to tolerance", "[numeric]") {
    const double root = solveBracketed(
        [](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-14);
    CHECK(root == Approx(std::cbrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(solveBracketed([](double x) { return x * x + 1.0; }, -1.0,
                                   1.0),
                    NumericError);
}

TEST_CASE("chi-squared(1) CDF matches the error-function form", "[numeric]") {
    // P(1/2, x/2) = erf(sqrt(x/2)) is an independent closed form.
    for (double x : {0.01, 0.1, 0.455, 1.0, 2.0, 3.84, 6.63, 15.0, 40.0}) {
        CHECK(chiSquared1Cdf(x) ==
              Approx(std::erf(std::sqrt(x / 2.0))).epsilon(1e-12));
    }
    CHECK(chiSquared1Cdf(0.0) == 0.0);
    CHECK(chiSquared1Cdf(-1.0) == 0.0);
}

TEST_CASE("chi-squared(1) quantiles invert the CDF", "[numeric]") {
    CHECK(chiSquared1Quantile(0.5) == Approx(0.45493642311957).epsilon(1e-9));
    for (double p : {0.1, 0.25, 0.75, 0.9, 0.99})
        CHECK(chiSquared1Cdf(chiSquared1Quantile(p)) ==
              Approx(p).epsilon(1e-10));
}

TEST_CASE("regularized beta agrees with the arcsine closed form", "[numeric]") {
    // I_x(1/2, 1/2) = (2/pi) asin(sqrt(x)).
    for (double x : {0.05, 0.2, 0.5, 0.8, 0.95})
        CHECK(regularizedBeta(x, 0.5, 0.5) ==
              Approx(2.0 / kPi * std::asin(std::sqrt(x))).epsilon(1e-12));
    for (double x : {0.1, 0.4, 0.9})
        CHECK(regularizedBeta(x, 2.0, 5.0) ==
              Approx(1.0 - regularizedBeta(1.0 - x, 5.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("KS distance on tiny known cases", "[numeric]") {
    // Single point at the uniform median: sup gap is 1/2.
    const double d = ksDistance({0.5}, [](double x) { return x; });
    CHECK(d == Approx(0.5).epsilon(1e-12));
    CHECK(ksTwoSample({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(ksTwoSample({0.0, 0.0}, {1.0, 1.0}) == Approx(1.0));
}

TEST_CASE("squared normals pass the one-sample KS self-check", "[numeric]") {
    PhiloxStream rng(123, 0);
    std::vector<double> samples(100000);
    for (auto& s : samples) {
        const double g = rng.gaussian();
        s = g * g;
    }
    CHECK(ksDistance(samples, chiSquared1Cdf) <= 0.01);
}

TEST_CASE("sample quantiles and medians are order statistics", "[numeric]") {
    std::vector<double> v = {5.0, 1.0, 3.0, 2.0, 4.0};
    CHECK(sampleQuantile(v, 0.99) == 5.0);
    CHECK(sampleQuantile(v, 0.2) == 1.0);
    CHECK(sampleMedian(v) == 3.0);
    CHECK(sampleMedian({1.0, 2.0, 3.0, 4.0}) == Approx(2.5));
    CHECK_THROWS_AS(sampleQuantile({}, 0.5), DomainError);
}
