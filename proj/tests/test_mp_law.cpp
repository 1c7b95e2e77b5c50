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

#include "spikelab/mp_law.hpp"

using namespace spikelab;

namespace {

// Independent oracle for bulk-mass integrals: composite Simpson on the
// substitution x = gm + s^2, which differs from the production
// parametrization and tames the left-edge singularity directly.
double oracleMassAbove(double t, double phi, int panels = 40000) {
    const auto [gm, gp] = edges(phi);
    const double sLo = std::sqrt(std::max(0.0, t - gm));
    const double sHi = std::sqrt(gp - gm);
    auto f = [&](double s) {
        const double x = gm + s * s;
        return 2.0 * s * mpDensity(x, phi);
    };
    double sum = 0.0;
    const double h = (sHi - sLo) / panels;
    for (int i = 0; i < panels; ++i) {
        const double a = sLo + i * h;
        sum += h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h));
    }
    return sum;
}

}  // namespace

TEST_CASE("spectrum edges", "[mp_law]") {
    CHECK(edges(1.0).first == Approx(0.0).margin(1e-15));
    CHECK(edges(1.0).second == Approx(4.0));
    CHECK(edges(4.0).first == Approx(0.5));
    CHECK(edges(4.0).second == Approx(4.5));
    // Invariance under phi <-> 1/phi.
    CHECK(edges(0.25).first == Approx(0.5));
    CHECK(edges(0.25).second == Approx(4.5));
    CHECK_THROWS_AS(edges(0.0), DomainError);
    CHECK_THROWS_AS(edges(-2.0), DomainError);
}

TEST_CASE("aspect invariants", "[mp_law]") {
    Aspect a(2000, 1000);
    CHECK(a.phi == Approx(2.0));
    CHECK(a.K == 1000);
    CHECK(a.gammaPlus - a.gammaMinus == Approx(4.0));
    CHECK_THROWS_AS(Aspect(-1, 10), DomainError);
}

TEST_CASE("Marchenko-Pastur density values", "[mp_law]") {
    CHECK(mpDensity(2.0, 1.0) == Approx(1.0 / (2.0 * kPi)).epsilon(1e-13));
    CHECK(mpDensity(5.0, 1.0) == 0.0);
    CHECK(mpDensity(-1.0, 1.0) == 0.0);
    CHECK(mpAtom(0.5) == Approx(0.5));
    CHECK(mpAtom(2.0) == 0.0);
    // Companion law: coincides at phi = 1, atom 3/4 at phi = 4.
    CHECK(mpDensityCompanion(2.0, 1.0) == Approx(mpDensity(2.0, 1.0)));
    CHECK(mpAtomCompanion(4.0) == Approx(0.75));
    // Support diameter 4 for any phi.
    for (double phi : {0.2, 0.5, 1.0, 3.0, 10.0})
        CHECK(edges(phi).second - edges(phi).first == Approx(4.0));
}

TEST_CASE("density normalization to 1e-8", "[mp_law]") {
    for (double phi : {0.25, 0.5, 1.0, 2.0, 5.0}) {
        const auto [gm, gp] = edges(phi);
        // Smooth parametrization x = centre - 2 cos s for the quadrature.
        const double centre = 0.5 * (gm + gp);
        const auto mass = integrate(
            [&](double s) {
                const double x = centre - 2.0 * std::cos(s);
                return mpDensity(x, phi) * 2.0 * std::sin(s);
            },
            0.0, kPi, 1e-12);
        CHECK(mass.value + mpAtom(phi) == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("Stieltjes transform exterior values", "[mp_law]") {
    const SpectralPoint z(4.5, 0.0, 1.0);
    CHECK(stieltjesM(z, 1.0).real() == Approx(-1.0 / 3.0).epsilon(1e-13));
    CHECK(stieltjesM(z, 1.0).imag() == Approx(0.0).margin(1e-14));
    CHECK(stieltjesW(z, 1.0).real() == Approx(-0.5).epsilon(1e-13));
    // w at the edges.
    for (double phi : {0.5, 1.0, 2.0}) {
        const auto [gm, gp] = edges(phi);
        CHECK(stieltjesW(SpectralPoint(gp, 0.0, phi), phi).real() ==
              Approx(-1.0).epsilon(1e-7));
        CHECK(stieltjesW(SpectralPoint(gm, 0.0, phi), phi).real() ==
              Approx(1.0).epsilon(1e-7));
    }
    CHECK_THROWS_AS(stieltjesM(SpectralPoint(2.0, 0.0, 1.0), 1.0), DomainError);
}

TEST_CASE("defining equations hold to 1e-12 on a grid", "[mp_law]") {
    // Grid restricted to |z| >= 0.1 like the spectral domain; next to the
    // z = 0 atom the equation's absolute residual is ill-conditioned for
    // any evaluation order.
    for (double phi : {0.5, 1.0, 2.0, 4.0}) {
        for (double E = -2.0; E <= 8.0; E += 0.5) {
            for (double eta : {1e-4, 1e-2, 0.5, 2.0}) {
                if (E * E + eta * eta < 0.01) continue;
                const SpectralPoint z(E, eta, phi);
                const Complex m = stieltjesM(z, phi);
                const Complex w = stieltjesW(z, phi);
                const double sp = std::sqrt(phi);
                // m + 1 / (z + z m / sp - (sp - 1/sp)) = 0.
                const Complex residM =
                    m + 1.0 / (z.z() + z.z() * m / sp - (sp - 1.0 / sp));
                CHECK(std::abs(residM) < 1e-12);
                // z = (1 - 1/(sp w)) (sp - w).
                const Complex residW =
                    z.z() - (1.0 - 1.0 / (sp * w)) * (sp - w);
                CHECK(std::abs(residW) < 1e-12);
                // m_{1/phi}(z) = (m_phi(z) + (1 - phi)/z) / phi.
                const Complex swap =
                    stieltjesM(z, 1.0 / phi) -
                    (m + (1.0 - phi) / z.z()) / phi;
                CHECK(std::abs(swap) < 1e-12);
            }
        }
    }
}

TEST_CASE("branch coherence in the upper half-plane", "[mp_law]") {
    for (double phi : {0.5, 1.0, 3.0}) {
        for (double E = -1.0; E <= 7.0; E += 0.25) {
            for (double eta : {1e-6, 1e-3, 0.1, 1.0}) {
                const SpectralPoint z(E, eta, phi);
                CHECK(stieltjesM(z, phi).imag() > 0.0);
                CHECK(stieltjesW(z, phi).imag() > 0.0);
                CHECK(std::abs(stieltjesW(z, phi)) <= 1.0 + 1e-10);
            }
        }
    }
}

TEST_CASE("conjugation relation w(theta(zeta)) = -1/zeta", "[mp_law]") {
    for (double phi : {1.0, 2.0, 5.0}) {
        for (double zeta = 1.05; zeta <= 20.0; zeta *= 1.3) {
            const double z = classicalLocation(zeta, phi);
            CHECK(std::abs(stieltjesW(SpectralPoint(z, 0.0, phi), phi) -
                           Complex(-1.0 / zeta, 0.0)) < 1e-10);
        }
    }
    // Left-side branch, nonempty only for phi < 1.
    const double phi = 0.25;
    for (double zeta : {-1.05, -1.3, -1.7, -1.95}) {
        const double z = classicalLocation(zeta, phi);
        REQUIRE(z < edges(phi).first);
        CHECK(std::abs(stieltjesW(SpectralPoint(z, 0.0, phi), phi) -
                       Complex(-1.0 / zeta, 0.0)) < 1e-10);
    }
}

TEST_CASE("bulk boundary values match the density", "[mp_law]") {
    for (double phi : {0.5, 1.0, 2.0}) {
        const auto [gm, gp] = edges(phi);
        for (double frac : {0.2, 0.5, 0.8}) {
            const double E = gm + frac * (gp - gm);
            CHECK(stieltjesMBulkBoundary(E, phi).imag() ==
                  Approx(kPi * mpDensity(E, phi)).epsilon(1e-12));
            // Boundary value is the eta -> 0 limit.
            const SpectralPoint z(E, 1e-9, phi);
            CHECK(std::abs(stieltjesM(z, phi) -
                           stieltjesMBulkBoundary(E, phi)) < 1e-4);
        }
    }
}

TEST_CASE("magnitude windows on the spectral domain", "[mp_law]") {
    // |m| and |w| of order one, |1 - w^2| comparable to sqrt(kappa + eta).
    for (int K : {500, 4000}) {
        Aspect aspect(K, K);
        const DomainGrid grid = DomainGrid::make(aspect, DomainRegime::S, 15, 8);
        REQUIRE(grid.points.size() > 20);
        for (const auto& z : grid.points) {
            const Complex m = stieltjesM(z, aspect.phi);
            const Complex w = stieltjesW(z, aspect.phi);
            CHECK(std::abs(m) > 0.05);
            CHECK(std::abs(m) < 20.0);
            CHECK(std::abs(w) > 0.05);
            CHECK(std::abs(w) < 20.0);
            const double ratio =
                std::abs(1.0 - w * w) / std::sqrt(z.kappa + z.eta);
            CHECK(ratio > 0.05);
            CHECK(ratio < 20.0);
        }
    }
}

TEST_CASE("classical outlier location theta", "[mp_law]") {
    for (double phi : {0.5, 1.0, 2.0})
        CHECK(classicalLocation(1.0, phi) == Approx(edges(phi).second));
    CHECK(classicalLocation(2.0, 1.0) == Approx(4.5));
    CHECK(classicalLocation(-1.0, 4.0) == Approx(0.5));
    CHECK_THROWS_AS(classicalLocation(0.0, 1.0), DomainError);
}

TEST_CASE("inverse classical location", "[mp_law]") {
    CHECK(inverseClassicalLocation(4.5, 1.0, BulkSide::Right) == Approx(2.0));
    // Continuity at the edge.
    CHECK(inverseClassicalLocation(4.0 + 1e-9, 1.0, BulkSide::Right) ==
          Approx(1.0).margin(1e-4));
    // Round trip on a grid of mu > gamma_+.
    for (double phi : {0.8, 1.0, 3.0}) {
        const double gp = edges(phi).second;
        for (double mu = gp + 0.05; mu < gp + 10.0; mu += 0.5) {
            const double d = inverseClassicalLocation(mu, phi, BulkSide::Right);
            CHECK(classicalLocation(d, phi) == Approx(mu).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(inverseClassicalLocation(2.0, 1.0, BulkSide::Right),
                    DomainError);
    // Left side exists for phi < 1, and the admissible root is checked.
    const double phi = 0.25;
    const double mu = classicalLocation(-1.5, phi);
    CHECK(inverseClassicalLocation(mu, phi, BulkSide::Left) == Approx(-1.5));
    CHECK_THROWS_AS(inverseClassicalLocation(0.05, 4.0, BulkSide::Left),
                    DomainError);
}

TEST_CASE("cone mass", "[mp_law]") {
    CHECK(coneMass(1.0 + 1e-9, 1.0) == Approx(0.0).margin(1e-6));
    CHECK(coneMass(2.0, 1.0) == Approx(0.5));
    CHECK(coneMass(1e9, 1.0) == Approx(1.0).margin(1e-6));
    CHECK_THROWS_AS(coneMass(0.9, 1.0), DomainError);
    for (double phi : {0.3, 1.0, 4.0})
        for (double d = 1.01; d < 50.0; d *= 1.4) {
            const double u = coneMass(d, phi);
            CHECK(u > 0.0);
            CHECK(u < 1.0);
        }
}

TEST_CASE("fluctuation scale branches", "[mp_law]") {
    CHECK(fluctuationScale(1.5, 1.0) == Approx(std::sqrt(0.5)));
    CHECK(fluctuationScale(3.0, 1.0) == Approx(2.5));
    // The affine branch applies at d = 2.
    CHECK(fluctuationScale(2.0, 1.0) == Approx(2.0));
    // Ratio of one-sided limits at 2 stays in [1, 3].
    for (double phi : {0.1, 0.5, 1.0, 10.0, 100.0}) {
        const double left = fluctuationScale(2.0 - 1e-12, phi);
        const double right = fluctuationScale(2.0, phi);
        CHECK(right / left >= 1.0 - 1e-9);
        CHECK(right / left <= 3.0 + 1e-9);
    }
    CHECK_THROWS_AS(fluctuationScale(0.5, 1.0), DomainError);
    CHECK_THROWS_AS(fluctuationScale(-0.5, 1.0), DomainError);
    // Negative branch needs phi < 1.
    CHECK(fluctuationScale(-1.5, 0.25) > 0.0);
}

TEST_CASE("classical eigenvalue locations", "[mp_law]") {
    Aspect aspect(60, 60);
    // Monotone nonincreasing in the index.
    std::vector<int> idx = {1, 5, 10, 30, 55, 60};
    const auto gammas = classicalEigenvalueLocations(aspect, idx);
    for (std::size_t i = 1; i < gammas.size(); ++i)
        CHECK(gammas[i] <= gammas[i - 1] + 1e-12);
    // Full-mass quantile continues into the lower edge.
    CHECK(gammas.back() == Approx(aspect.gammaMinus).margin(1e-9));
    CHECK_THROWS_AS(classicalEigenvalueLocation(0, aspect), DomainError);
    CHECK_THROWS_AS(classicalEigenvalueLocation(61, aspect), DomainError);
}

TEST_CASE("median of the square case against the quadrature oracle",
          "[mp_law]") {
    Aspect aspect(60, 60);
    const double median = classicalEigenvalueLocation(30, aspect);
    // Independent oracle: bisection on a composite-Simpson mass function.
    double lo = aspect.gammaMinus, hi = aspect.gammaPlus;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (oracleMassAbove(mid, 1.0) > 0.5)
            lo = mid;
        else
            hi = mid;
    }
    CHECK(median == Approx(0.5 * (lo + hi)).margin(1e-8));
}

TEST_CASE("rectangular aspect classical locations", "[mp_law]") {
    // phi != 1 exercises the atom bookkeeping: the K-th location reaches
    // the lower edge exactly when i/N exhausts the bulk mass.
    Aspect wide(50, 100);
    CHECK(classicalEigenvalueLocation(50, wide) ==
          Approx(wide.gammaMinus).margin(1e-9));
    Aspect tall(100, 50);
    CHECK(classicalEigenvalueLocation(50, tall) ==
          Approx(tall.gammaMinus).margin(1e-9));
    const double g1 = classicalEigenvalueLocation(1, tall);
    CHECK(g1 < tall.gammaPlus);
    CHECK(g1 > tall.gammaPlus - 0.5);
}

TEST_CASE("edge distance and spacing", "[mp_law]") {
    const auto scales = edgeDistanceAndSpacing(1, 1000);
    CHECK(scales.kappa == Approx(0.01));
    CHECK(scales.spacing == Approx(0.01));
    // Symmetry in a <-> K + 1 - a.
    CHECK(edgeDistance(1000, 1000) == Approx(edgeDistance(1, 1000)));
    CHECK(edgeDistance(7, 1000) == Approx(edgeDistance(994, 1000)));
    CHECK_THROWS_AS(edgeDistance(0, 10), DomainError);
    CHECK_THROWS_AS(edgeSpacing(6, 10), DomainError);
}

TEST_CASE("domain grids obey their regime constraints", "[mp_law]") {
    Aspect aspect(500, 500);
    const DomainGrid s = DomainGrid::make(aspect, DomainRegime::S, 20, 10);
    REQUIRE_FALSE(s.points.empty());
    for (const auto& z : s.points) {
        CHECK(z.kappa <= 10.0 + 1e-12);
        CHECK(z.eta >= std::pow(500.0, -0.9) - 1e-15);
        CHECK(z.eta <= 10.0 + 1e-12);
        CHECK(std::abs(z.z()) >= 0.1);
    }
    const DomainGrid st = DomainGrid::make(aspect, DomainRegime::STilde, 20, 10);
    REQUIRE_FALSE(st.points.empty());
    for (const auto& z : st.points) {
        CHECK((z.E < aspect.gammaMinus || z.E > aspect.gammaPlus));
        CHECK(z.kappa >= std::pow(500.0, -2.0 / 3.0 + 0.1) - 1e-15);
        CHECK(z.eta > 0.0);
    }
    CHECK_THROWS_AS(DomainGrid::make(aspect, DomainRegime::S, 0, 5),
                    DomainError);
}

TEST_CASE("aspect rejects wildly mismatched dimensions", "[mp_law]") {
    CHECK_THROWS_AS(Aspect(2, 100000), DomainError);
    CHECK_NOTHROW(Aspect(100, 100000));
}
