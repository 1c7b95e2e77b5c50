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

// Spike inference from observed spectra: supercritical spike estimation by
// inverting the classical location map, eigenvector de-biasing by the cone
// mass, sparse support recovery, subcritical-spike detection through the
// edge eigenvector bias, and detectability regime reports.

#pragma once

#include <optional>

#include "spikelab/mp_law.hpp"
#include "spikelab/spectral.hpp"

namespace spikelab {

struct SpikeEstimate {
    double mu = 0.0;        // observed outlier eigenvalue
    double dHat = 0.0;      // estimated spike strength (> 1)
    double sigmaHat = 0.0;  // 1 + sqrt(phi) dHat
    double stderrHat = 0.0; // Delta(dHat) K^{-1/2}
    double coneCorrection = 0.0;  // u(dHat)
    int eigenvalueIndex = 0;      // 1-based position in the sorted spectrum
};

// Eigenvalues exceeding gamma_+ + gapFactor * K^{-2/3} are treated as
// outliers and inverted through theta. Empty result when nothing detaches.
inline std::vector<SpikeEstimate> estimateSupercriticalSpikes(
    const Vector& spectrum, const Aspect& aspect, double gapFactor = 10.0) {
    for (int i = 1; i < spectrum.size(); ++i)
        if (spectrum(i) > spectrum(i - 1) + 1e-12)
            throw DomainError("estimateSupercriticalSpikes: spectrum not sorted");
    const double threshold =
        aspect.gammaPlus +
        gapFactor * std::pow(static_cast<double>(aspect.K), -2.0 / 3.0);
    std::vector<SpikeEstimate> out;
    for (int i = 0; i < spectrum.size(); ++i) {
        if (spectrum(i) <= threshold) break;
        SpikeEstimate est;
        est.mu = spectrum(i);
        est.eigenvalueIndex = i + 1;
        est.dHat =
            inverseClassicalLocation(spectrum(i), aspect.phi, BulkSide::Right);
        est.sigmaHat = 1.0 + std::sqrt(aspect.phi) * est.dHat;
        est.stderrHat = fluctuationScale(est.dHat, aspect.phi) /
                        std::sqrt(static_cast<double>(aspect.K));
        est.coneCorrection = coneMass(est.dHat, aspect.phi);
        out.push_back(est);
    }
    return out;
}

struct CorrectedEigenvector {
    Vector direction;
    double overlap = 0.0;       // predicted squared overlap u(dHat)
    bool informative = true;    // false when the overlap is negligible
};

// Attaches the predicted squared overlap so consumers can de-bias inner
// products: <v, xi> -> <v, xi> / sqrt(u(dHat)).
inline CorrectedEigenvector correctedEigenvectorEstimate(const Vector& xi,
                                                         double dHat,
                                                         double phi,
                                                         double floor = 1e-3) {
    if (dHat <= 1.0)
        throw DomainError("correctedEigenvectorEstimate: dHat must exceed 1");
    CorrectedEigenvector out;
    out.direction = xi;
    out.overlap = coneMass(dHat, phi);
    out.informative = out.overlap > floor;
    return out;
}

struct SupportRecovery {
    std::vector<int> indices;  // 0-based coordinates
    // Constant spike profiles are the regime with guarantees; anything else
    // is a heuristic read of the same thresholding rule.
    bool heuristicForNonconstantProfile = true;
};

// {k : |xi(k)| >= threshold * M^{-1/2}}; thresholds above 1 separate signal
// from the delocalized background, smaller values degrade to the full set.
inline SupportRecovery recoverSupport(const Vector& xi, double threshold) {
    if (threshold <= 0.0)
        throw DomainError("recoverSupport: threshold must be positive");
    const double cut =
        threshold / std::sqrt(static_cast<double>(xi.size()));
    SupportRecovery out;
    for (int k = 0; k < xi.size(); ++k)
        if (std::abs(xi(k)) >= cut) out.indices.push_back(k);
    return out;
}

struct SubcriticalBiasResult {
    double biasScore = 0.0;       // mean over the range of M <w, xi_a>^2
    double impliedShift = 0.0;    // |d - 1| implied by the score
    double predictedScale = 0.0;  // sigma / (d - 1)^2 for the hypothesis
    bool detected = false;
};

// Mean edge-eigenvector bias in a candidate direction. An unbiased
// (completely delocalized) direction scores about 1; a spike with
// |d - 1| << 1 inflates the score to about sigma / (d - 1)^2. The score is
// insensitive to the sign of d - 1, so only the implied |d - 1| is
// reported, never a side.
inline SubcriticalBiasResult detectSubcriticalBias(
    const Eigensystem& data, const Vector& candidate, int edgeIndexLo,
    int edgeIndexHi, const Aspect& aspect, double detectionFactor = 5.0,
    std::optional<double> hypothesizedD = std::nullopt,
    int outlierCount = 0) {
    if (edgeIndexLo < 1 || edgeIndexHi < edgeIndexLo ||
        edgeIndexHi > data.topCount)
        throw DomainError("detectSubcriticalBias: bad edge index range");
    if (edgeIndexLo <= outlierCount)
        throw DomainError("detectSubcriticalBias: range touches outlier indices");
    SubcriticalBiasResult out;
    double acc = 0.0;
    for (int a = edgeIndexLo; a <= edgeIndexHi; ++a) {
        const double comp = candidate.dot(data.vectors.col(a - 1));
        acc += static_cast<double>(aspect.M) * comp * comp;
    }
    out.biasScore = acc / (edgeIndexHi - edgeIndexLo + 1);
    out.detected = out.biasScore > detectionFactor;
    // Invert biasScore ~ sigma / (d-1)^2 with sigma at its near-critical
    // value unless the caller hypothesizes d.
    const double sigmaGuess =
        hypothesizedD ? 1.0 + std::sqrt(aspect.phi) * *hypothesizedD
                      : 1.0 + std::sqrt(aspect.phi);
    if (out.biasScore > sigmaGuess)
        out.impliedShift = std::sqrt(sigmaGuess / out.biasScore);
    else
        out.impliedShift = 1.0;
    if (hypothesizedD) {
        const double shift = *hypothesizedD - 1.0;
        if (shift != 0.0) out.predictedScale = sigmaGuess / (shift * shift);
    }
    return out;
}

struct DetectabilityReport {
    bool naiveEntrywise = false;
    double naiveMargin = 0.0;  // (sigma - 1) / (|S| / sqrt(N)), in "much
                               // greater than" units
    bool pcaSupercritical = false;
    double pcaMargin = 0.0;    // (sigma - 1) / sqrt(phi)
    bool sizeFeasible = false;
    double sizeMargin = 0.0;   // |S| / sqrt(phi)
    bool subcriticalBiasDetectable = false;
    double predictedBiasScale = 0.0;
};

// Evaluates the detectability chain for a single spike of total strength
// sigma supported on |S| coordinates; "much greater than" separations become
// the configured factor.
inline DetectabilityReport detectabilityReport(double sigma, int supportSize,
                                               const Aspect& aspect,
                                               double factor = 5.0) {
    if (sigma < 1.0) throw DomainError("detectabilityReport: sigma must be >= 1");
    if (supportSize < 1)
        throw DomainError("detectabilityReport: support size must be >= 1");
    DetectabilityReport rep;
    const double excess = sigma - 1.0;
    const double sqrtPhi = std::sqrt(aspect.phi);
    rep.naiveMargin =
        excess / (static_cast<double>(supportSize) / std::sqrt(aspect.N));
    rep.naiveEntrywise = rep.naiveMargin >= factor;
    rep.pcaMargin = excess / sqrtPhi;
    rep.pcaSupercritical = rep.pcaMargin >= factor;
    rep.sizeMargin = static_cast<double>(supportSize) / sqrtPhi;
    rep.sizeFeasible = rep.sizeMargin >= factor;
    const double d = excess / sqrtPhi;
    if (d > 0.0 && std::abs(d - 1.0) > 1e-12 && std::abs(d - 1.0) < 1.0) {
        rep.predictedBiasScale = sigma / ((d - 1.0) * (d - 1.0));
        rep.subcriticalBiasDetectable = rep.predictedBiasScale >= factor;
    }
    return rep;
}

}  // namespace spikelab
