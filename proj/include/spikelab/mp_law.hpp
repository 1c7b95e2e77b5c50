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

// Closed-form spectral laws for the rescaled sample covariance ensemble:
// Marchenko-Pastur densities, their Stieltjes transforms m and w, classical
// outlier and eigenvalue locations, cone mass and fluctuation scales.
// Everything here is a pure function of (phi, z, d).

#pragma once

#include <complex>
#include <vector>

#include "spikelab/numeric.hpp"

namespace spikelab {

using Complex = std::complex<double>;

// Dimensions of one ensemble; phi = M/N is the aspect ratio and K = min(M,N)
// the number of nontrivial eigenvalues.
struct Aspect {
    int M = 0;
    int N = 0;
    double phi = 0.0;
    int K = 0;
    double gammaMinus = 0.0;
    double gammaPlus = 0.0;

    Aspect() = default;
    Aspect(int m, int n, double dimensionBound = 8.0) : M(m), N(n) {
        if (m <= 0 || n <= 0) throw DomainError("Aspect: dimensions must be positive");
        phi = static_cast<double>(m) / static_cast<double>(n);
        K = std::min(m, n);
        const double lm = std::log(static_cast<double>(m));
        const double ln = std::log(static_cast<double>(n));
        // N^{1/C} <= M <= N^C with the configured exponent bound.
        if (n > 1 && m > 1 &&
            (lm > dimensionBound * ln || lm * dimensionBound < ln))
            throw DomainError("Aspect: M outside [N^{1/C}, N^C]");
        const double s = std::sqrt(phi) + 1.0 / std::sqrt(phi);
        gammaMinus = s - 2.0;
        gammaPlus = s + 2.0;
    }
};

// Spectral parameter z = E + i*eta together with its distance to the edges.
struct SpectralPoint {
    double E = 0.0;
    double eta = 0.0;
    double kappa = 0.0;

    SpectralPoint() = default;
    SpectralPoint(double e, double imag, double phi) : E(e), eta(imag) {
        if (imag < 0.0) throw DomainError("SpectralPoint: eta must be >= 0");
        const auto [gm, gp] = edges(phi);
        kappa = std::min(std::abs(gp - E), std::abs(gm - E));
    }

    Complex z() const { return {E, eta}; }

    static std::pair<double, double> edges(double phi) {
        if (phi <= 0.0) throw DomainError("edges: phi must be positive");
        const double s = std::sqrt(phi) + 1.0 / std::sqrt(phi);
        return {s - 2.0, s + 2.0};
    }
};

inline std::pair<double, double> edges(double phi) {
    return SpectralPoint::edges(phi);
}

// ---------------------------------------------------------------------------
// Densities.
// ---------------------------------------------------------------------------

// Absolutely continuous part of the Marchenko-Pastur law rho_phi; the atom at
// zero is reported by mpAtom, never folded into the density.
inline double mpDensity(double x, double phi) {
    const auto [gm, gp] = edges(phi);
    if (x <= 0.0 || x < gm || x > gp) return 0.0;
    const double rad = (x - gm) * (gp - x);
    if (rad <= 0.0) return 0.0;
    return std::sqrt(phi) * std::sqrt(rad) / (2.0 * kPi * x);
}

inline double mpAtom(double phi) {
    if (phi <= 0.0) throw DomainError("mpAtom: phi must be positive");
    return std::max(0.0, 1.0 - phi);
}

// Companion law: the bulk density of the rescaled M x M matrix, i.e.
// rho_{phi^{-1}}, whose atom at zero has mass (1 - phi^{-1})_+.
inline double mpDensityCompanion(double x, double phi) {
    if (phi <= 0.0) throw DomainError("mpDensityCompanion: phi must be positive");
    return mpDensity(x, 1.0 / phi);
}

inline double mpAtomCompanion(double phi) {
    if (phi <= 0.0) throw DomainError("mpAtomCompanion: phi must be positive");
    return std::max(0.0, 1.0 - 1.0 / phi);
}

// ---------------------------------------------------------------------------
// Stieltjes transforms.
// ---------------------------------------------------------------------------

namespace detail {

// sqrt(zeta^2 - 4) on the branch that behaves like zeta at infinity, cut on
// [-2, 2]. The factorization sqrt(zeta-2)*sqrt(zeta+2) with principal square
// roots realizes exactly this branch.
inline Complex sqrtShifted(Complex zeta) {
    return std::sqrt(zeta - 2.0) * std::sqrt(zeta + 2.0);
}

// Stieltjes transform of the unit semicircle on [-2, 2], on the branch with
// m(z) -> 0 at infinity (equivalently |m| <= 1 off the support).
inline Complex semicircleStieltjes(Complex zeta) {
    return 0.5 * (-zeta + sqrtShifted(zeta));
}

inline void requireOffBulk(const SpectralPoint& z, double phi,
                           const char* who) {
    if (z.eta > 0.0) return;
    const auto [gm, gp] = edges(phi);
    // The edges themselves carry well-defined boundary values.
    if (z.E > gm && z.E < gp)
        throw DomainError(std::string(who) +
                          ": real-axis evaluation inside the bulk");
}

}  // namespace detail

// w_phi(z): Stieltjes transform of the semicircle centred at
// sqrt(phi) + 1/sqrt(phi); symmetric under phi <-> 1/phi, |w| <= 1 off the
// support, and w(theta(zeta)) = -1/zeta for |zeta| > 1.
inline Complex stieltjesW(const SpectralPoint& z, double phi) {
    if (phi <= 0.0) throw DomainError("stieltjesW: phi must be positive");
    detail::requireOffBulk(z, phi, "stieltjesW");
    const double centre = std::sqrt(phi) + 1.0 / std::sqrt(phi);
    return detail::semicircleStieltjes(z.z() - centre);
}

// m_phi(z) = (w_phi(z) - phi^{-1/2}) / (phi^{-1/2} z).
inline Complex stieltjesM(const SpectralPoint& z, double phi) {
    if (phi <= 0.0) throw DomainError("stieltjesM: phi must be positive");
    detail::requireOffBulk(z, phi, "stieltjesM");
    if (z.E == 0.0 && z.eta == 0.0)
        throw DomainError("stieltjesM: z = 0");
    const double sp = std::sqrt(phi);
    return (stieltjesW(z, phi) - 1.0 / sp) * sp / z.z();
}

// Boundary values on the real axis inside the bulk (explicit, flagged use;
// Im m there is pi times the density).
inline Complex stieltjesMBulkBoundary(double E, double phi) {
    const auto [gm, gp] = edges(phi);
    if (E < gm || E > gp)
        throw DomainError("stieltjesMBulkBoundary: E outside the bulk");
    if (E == 0.0) throw DomainError("stieltjesMBulkBoundary: E = 0");
    const double rad = std::max(0.0, (E - gm) * (gp - E));
    const double sp = std::sqrt(phi);
    const double re = (sp - 1.0 / sp - E) / (2.0 * E / sp);
    const double im = std::sqrt(rad) / (2.0 * E / sp);
    return {re, im};
}

inline Complex stieltjesWBulkBoundary(double E, double phi) {
    const auto [gm, gp] = edges(phi);
    if (E < gm || E > gp)
        throw DomainError("stieltjesWBulkBoundary: E outside the bulk");
    const double rad = std::max(0.0, (E - gm) * (gp - E));
    const double centre = std::sqrt(phi) + 1.0 / std::sqrt(phi);
    return {0.5 * (centre - E), 0.5 * std::sqrt(rad)};
}

// ---------------------------------------------------------------------------
// Classical locations and scales.
// ---------------------------------------------------------------------------

// theta(d) = sqrt(phi) + 1/sqrt(phi) + d + 1/d, the classical location of the
// outlier generated by a spike of strength d.
inline double classicalLocation(double d, double phi) {
    if (phi <= 0.0) throw DomainError("classicalLocation: phi must be positive");
    if (d == 0.0) throw DomainError("classicalLocation: d = 0");
    return std::sqrt(phi) + 1.0 / std::sqrt(phi) + d + 1.0 / d;
}

enum class BulkSide { Right, Left };

// Inverts theta on |d| > 1. Right side needs mu > gamma_+, left side needs
// mu < gamma_- and an admissible root in (-phi^{-1/2}, -1).
inline double inverseClassicalLocation(double mu, double phi, BulkSide side) {
    const auto [gm, gp] = edges(phi);
    const double t = mu - std::sqrt(phi) - 1.0 / std::sqrt(phi);
    if (mu >= gm && mu <= gp)
        throw DomainError("inverseClassicalLocation: mu inside the bulk (no outlier)");
    if (side == BulkSide::Right && mu < gp)
        throw DomainError("inverseClassicalLocation: right side needs mu > gammaPlus");
    if (side == BulkSide::Left && mu > gm)
        throw DomainError("inverseClassicalLocation: left side needs mu < gammaMinus");
    const double sign = t >= 0.0 ? 1.0 : -1.0;
    const double d = 0.5 * (t + sign * std::sqrt(t * t - 4.0));
    if (side == BulkSide::Left && d <= -1.0 / std::sqrt(phi))
        throw DomainError("inverseClassicalLocation: no admissible root in (-phi^{-1/2}, -1)");
    return d;
}

// Squared overlap ("cone mass") of an outlier eigenvector with its spike
// direction: u(d) = sigma / (sqrt(phi) theta(d)) * (1 - d^{-2}), d > 1.
inline double coneMass(double d, double phi) {
    if (d <= 1.0) throw DomainError("coneMass: requires d > 1");
    const double sigma = 1.0 + std::sqrt(phi) * d;
    return sigma / (std::sqrt(phi) * classicalLocation(d, phi)) *
           (1.0 - 1.0 / (d * d));
}

// Outlier fluctuation scale Delta(d). The two positive branches overlap at
// d = 2; the larger (affine) one applies there, matching the constant the
// outlier fluctuations actually carry at that point.
inline double fluctuationScale(double d, double phi) {
    if (phi <= 0.0) throw DomainError("fluctuationScale: phi must be positive");
    const double invSqrtPhi = 1.0 / std::sqrt(phi);
    if (d > -invSqrtPhi && d < -1.0)
        return std::sqrt(phi) * classicalLocation(d, phi) /
               (1.0 + 1.0 / std::sqrt(std::abs(d) - 1.0));
    if (d > 1.0 && d < 2.0) return std::sqrt(d - 1.0);
    if (d >= 2.0) return 1.0 + d / (1.0 + invSqrtPhi);
    throw DomainError("fluctuationScale: d must lie in (-phi^{-1/2},-1) or (1,inf)");
}

// Typical distance from the a-th eigenvalue to the nearest spectral edge.
inline double edgeDistance(int a, int K) {
    if (a < 1 || a > K) throw DomainError("edgeDistance: index out of range");
    const double m = static_cast<double>(std::min(a, K + 1 - a));
    return std::pow(static_cast<double>(K), -2.0 / 3.0) * std::pow(m, 2.0 / 3.0);
}

// Typical spacing between the a-th and (a+1)-th eigenvalues; defined for
// indices in the top half of the spectrum only.
inline double edgeSpacing(int a, int K) {
    if (a < 1 || 2 * a > K) throw DomainError("edgeSpacing: requires 1 <= a <= K/2");
    return std::pow(static_cast<double>(K), -2.0 / 3.0) *
           std::pow(static_cast<double>(a), -1.0 / 3.0);
}

struct EdgeScales {
    double kappa = 0.0;
    double spacing = 0.0;
};

inline EdgeScales edgeDistanceAndSpacing(int a, int K) {
    return {edgeDistance(a, K), edgeSpacing(a, K)};
}

// ---------------------------------------------------------------------------
// Classical eigenvalue locations gamma_i: integral of rho_phi over
// [gamma_i, infinity) equals i/N.
// ---------------------------------------------------------------------------

namespace detail {

// Bulk mass of rho_phi above t, computed on the smooth parametrization
// x = centre - 2 cos(s) which removes the square-root edge singularities.
inline double mpMassAbove(double t, double phi, double relTol = 1e-10) {
    const auto [gm, gp] = edges(phi);
    if (t >= gp) return 0.0;
    const double tc = std::max(t, gm);
    const double centre = 0.5 * (gm + gp);
    const double sLo = std::acos(std::clamp((centre - tc) / 2.0, -1.0, 1.0));
    auto integrand = [phi, centre](double s) {
        const double x = centre - 2.0 * std::cos(s);
        // rho(x) dx with dx = 2 sin(s) ds and sqrt((x-gm)(gp-x)) = 2 sin(s).
        return std::sqrt(phi) * 4.0 * std::sin(s) * std::sin(s) /
               (2.0 * kPi * x);
    };
    return integrate(integrand, sLo, kPi, relTol).value;
}

}  // namespace detail

// Total absolutely continuous mass of rho_phi (min(1, phi)); the remainder
// sits in the atom at zero.
inline double mpBulkMass(double phi) { return std::min(1.0, phi); }

inline double classicalEigenvalueLocation(int i, const Aspect& aspect,
                                          double relTol = 1e-10) {
    if (i < 1 || i > aspect.K)
        throw DomainError("classicalEigenvalueLocation: index out of [1, K]");
    const double target = static_cast<double>(i) / aspect.N;
    const double total = mpBulkMass(aspect.phi);
    if (target > total + 1e-12)
        throw DomainError("classicalEigenvalueLocation: quantile beyond bulk mass");
    const double gm = aspect.gammaMinus;
    const double gp = aspect.gammaPlus;
    if (target >= total) return gm;
    auto f = [&](double t) {
        return detail::mpMassAbove(t, aspect.phi, relTol) - target;
    };
    return solveBracketed(f, gm, gp, 1e-12);
}

inline std::vector<double> classicalEigenvalueLocations(
    const Aspect& aspect, const std::vector<int>& indices,
    double relTol = 1e-10) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (int i : indices)
        out.push_back(classicalEigenvalueLocation(i, aspect, relTol));
    return out;
}

// ---------------------------------------------------------------------------
// Spectral-domain grids.
// ---------------------------------------------------------------------------

enum class DomainRegime { S, STilde, SHat };

struct DomainGrid {
    std::vector<SpectralPoint> points;
    DomainRegime regime = DomainRegime::S;
    double omega = 0.1;

    // Deterministic rectangular grid filtered by the regime's admissibility
    // conditions. nE energies x nEta (log-spaced) imaginary parts.
    static DomainGrid make(const Aspect& aspect, DomainRegime regime,
                           int nE, int nEta, double omega = 0.1) {
        if (nE < 1 || nEta < 1 || omega <= 0.0 || omega >= 1.0)
            throw DomainError("DomainGrid: bad grid parameters");
        DomainGrid grid;
        grid.regime = regime;
        grid.omega = omega;
        const double K = aspect.K;
        const double gm = aspect.gammaMinus;
        const double gp = aspect.gammaPlus;
        const double kapMax = 1.0 / omega;
        const double etaMax = 1.0 / omega;
        const double etaMin = regime == DomainRegime::S
                                  ? std::pow(K, -1.0 + omega)
                                  : std::pow(K, -6.0);
        const double eLo = std::max(gm - kapMax, 0.0);
        const double eHi = gp + kapMax;
        for (int ie = 0; ie < nE; ++ie) {
            const double E =
                nE == 1 ? 0.5 * (eLo + eHi)
                        : eLo + (eHi - eLo) * ie / static_cast<double>(nE - 1);
            for (int je = 0; je < nEta; ++je) {
                const double frac =
                    nEta == 1 ? 0.5 : je / static_cast<double>(nEta - 1);
                const double eta =
                    etaMin * std::pow(etaMax / etaMin, frac);
                SpectralPoint z(E, eta, aspect.phi);
                if (grid.admissible(z, aspect)) grid.points.push_back(z);
            }
        }
        return grid;
    }

    bool admissible(const SpectralPoint& z, const Aspect& aspect) const {
        const double K = aspect.K;
        const double kapMax = 1.0 / omega;
        const double etaMax = 1.0 / omega;
        const double absZ = std::abs(z.z());
        switch (regime) {
            case DomainRegime::S:
                return z.kappa <= kapMax && z.eta >= std::pow(K, -1.0 + omega) &&
                       z.eta <= etaMax && absZ >= omega;
            case DomainRegime::STilde:
                return (z.E < aspect.gammaMinus || z.E > aspect.gammaPlus) &&
                       z.kappa >= std::pow(K, -2.0 / 3.0 + omega) &&
                       z.kappa <= kapMax && z.eta > 0.0 && z.eta <= etaMax &&
                       absZ >= omega;
            case DomainRegime::SHat:
                return (z.E < aspect.gammaMinus || z.E > aspect.gammaPlus) &&
                       z.kappa >= std::pow(K, -2.0 / 3.0 + omega) && z.eta > 0.0;
        }
        return false;
    }
};

}  // namespace spikelab
