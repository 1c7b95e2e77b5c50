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

// Construction of spiked populations Sigma = I + sqrt(phi) sum d_i v_i v_i*,
// factor matrices T (optionally with r extra columns mixed in by an
// orthogonal O), noise draws X, and the derived sample covariance matrices
// Q, Qdot and their uncorrelated references H, Hdot from the same draw.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spikelab/mp_law.hpp"
#include "spikelab/rng.hpp"

namespace spikelab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class EntryLaw { Gaussian, Rademacher, Uniform };

inline std::string entryLawName(EntryLaw law) {
    switch (law) {
        case EntryLaw::Gaussian: return "gaussian";
        case EntryLaw::Rademacher: return "rademacher";
        case EntryLaw::Uniform: return "uniform";
    }
    return "?";
}

inline EntryLaw entryLawFromName(const std::string& name) {
    if (name == "gaussian") return EntryLaw::Gaussian;
    if (name == "rademacher") return EntryLaw::Rademacher;
    if (name == "uniform") return EntryLaw::Uniform;
    throw DomainError("unknown entry law: " + name);
}

// One spike of the population covariance: strength d and unit direction v.
struct Spike {
    double d = 0.0;
    Vector v;
};

struct SpikeSpec {
    std::vector<Spike> spikes;  // sorted nonincreasing in d
    int r = 0;                  // extra factor columns
    int maxSpikes = 8;

    void validate(const Aspect& aspect) const {
        if (r < 0) throw DomainError("SpikeSpec: r must be >= 0");
        if (static_cast<int>(spikes.size()) > maxSpikes)
            throw DomainError("SpikeSpec: spike count exceeds configured bound");
        const double invSqrtPhi = 1.0 / std::sqrt(aspect.phi);
        for (std::size_t i = 0; i < spikes.size(); ++i) {
            const auto& s = spikes[i];
            if (s.d == 0.0) throw DomainError("SpikeSpec: spike with d = 0");
            if (s.d <= -invSqrtPhi)
                throw DomainError("SpikeSpec: d <= -phi^{-1/2} breaks positivity");
            if (s.v.size() != aspect.M)
                throw DomainError("SpikeSpec: direction has wrong dimension");
            if (std::abs(s.v.norm() - 1.0) > 1e-10)
                throw DomainError("SpikeSpec: direction not unit length");
            if (i > 0 && spikes[i - 1].d < s.d - 1e-15)
                throw DomainError("SpikeSpec: spikes not sorted nonincreasing");
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(s.v.dot(spikes[j].v)) > 1e-12)
                    throw DomainError("SpikeSpec: directions not orthonormal");
        }
    }

    // Coordinate directions e_1, e_2, ... for the given strengths.
    static SpikeSpec coordinate(const std::vector<double>& ds, int M, int r = 0) {
        std::vector<double> sorted = ds;
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        SpikeSpec spec;
        spec.r = r;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            Spike s;
            s.d = sorted[i];
            s.v = Vector::Zero(M);
            s.v(static_cast<int>(i)) = 1.0;
            spec.spikes.push_back(std::move(s));
        }
        return spec;
    }
};

// Population structure shared by all draws of one experiment.
struct Population {
    Aspect aspect;
    SpikeSpec spec;
    Matrix Sigma;      // M x M
    Matrix SigmaHalf;  // M x M symmetric square root
    Matrix T;          // M x (M+r)
    Matrix O;          // (M+r) x (M+r) orthogonal, T = SigmaHalf * (I,0) * O
    Matrix V;          // M x |R| spike isometry
    Vector d;          // |R| strengths, nonincreasing
};

namespace detail {

// Deterministic orthogonal mixer: product of seeded Householder reflections.
// Any fixed orthogonal O is admissible here; this one is reproducible and
// cheap to build at any dimension.
inline Matrix householderMixer(int n, std::uint64_t seed, int reflections = 8) {
    Matrix O = Matrix::Identity(n, n);
    PhiloxStream rng(seed, 0xC0FFEE);
    const int count = std::min(reflections, n);
    for (int k = 0; k < count; ++k) {
        Vector u(n);
        for (int i = 0; i < n; ++i) u(i) = rng.gaussian();
        u.normalize();
        O -= 2.0 * u * (u.transpose() * O);
    }
    return O;
}

}  // namespace detail

// Sigma = I + sqrt(phi) sum d_i v_i v_i*; T = Sigma^{1/2} (I_M, 0) O.
// Sigma^{1/2} comes from the symmetric eigendecomposition with eigenvalues
// clamped at 1e-14 against rounding.
inline Population buildPopulation(const SpikeSpec& spec, const Aspect& aspect) {
    spec.validate(aspect);
    Population pop;
    pop.aspect = aspect;
    pop.spec = spec;
    const int M = aspect.M;
    const int rank = static_cast<int>(spec.spikes.size());

    pop.V = Matrix::Zero(M, rank);
    pop.d = Vector::Zero(rank);
    for (int i = 0; i < rank; ++i) {
        pop.V.col(i) = spec.spikes[i].v;
        pop.d(i) = spec.spikes[i].d;
    }

    pop.Sigma = Matrix::Identity(M, M);
    if (rank > 0)
        pop.Sigma += std::sqrt(aspect.phi) * pop.V * pop.d.asDiagonal() *
                     pop.V.transpose();

    if (rank == 0) {
        pop.SigmaHalf = Matrix::Identity(M, M);
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(pop.Sigma);
        if (es.info() != Eigen::Success)
            throw NumericError("buildPopulation: Sigma eigendecomposition failed");
        Vector evals = es.eigenvalues();
        if (evals.minCoeff() <= 0.0)
            throw DomainError("buildPopulation: Sigma not positive definite");
        for (int i = 0; i < M; ++i) evals(i) = std::max(evals(i), 1e-14);
        pop.SigmaHalf = es.eigenvectors() *
                        evals.cwiseSqrt().asDiagonal() *
                        es.eigenvectors().transpose();
    }

    if (spec.r == 0) {
        pop.O = Matrix::Identity(M, M);
        pop.T = pop.SigmaHalf;
    } else {
        const int n = M + spec.r;
        pop.O = detail::householderMixer(
            n, 0x5EED0000ull + static_cast<std::uint64_t>(n));
        pop.T = pop.SigmaHalf * pop.O.topRows(M);
    }
    return pop;
}

// Independent noise entries with mean zero and variance (NM)^{-1/2};
// bit-identical for identical (law, dims, seed, stream).
inline Matrix sampleNoise(EntryLaw law, int rows, int cols, const Aspect& aspect,
                          std::uint64_t seed, std::uint64_t stream = 0) {
    if (rows <= 0 || cols <= 0) throw DomainError("sampleNoise: bad dims");
    const double scale =
        std::pow(static_cast<double>(aspect.N) * aspect.M, -0.25);
    Matrix X(rows, cols);
    PhiloxStream rng(seed, stream);
    switch (law) {
        case EntryLaw::Gaussian:
            for (int j = 0; j < cols; ++j)
                for (int i = 0; i < rows; ++i) X(i, j) = scale * rng.gaussian();
            break;
        case EntryLaw::Rademacher:
            for (int j = 0; j < cols; ++j)
                for (int i = 0; i < rows; ++i)
                    X(i, j) = scale * rng.rademacher();
            break;
        case EntryLaw::Uniform: {
            // Uniform on [-a, a] with a = sqrt(3) * scale matches the
            // required variance.
            const double a = std::sqrt(3.0) * scale;
            for (int j = 0; j < cols; ++j)
                for (int i = 0; i < rows; ++i)
                    X(i, j) = a * (2.0 * rng.uniform() - 1.0);
            break;
        }
    }
    return X;
}

struct AssembleNeeds {
    bool Q = true;
    bool Qdot = false;
    bool H = false;
    bool Hdot = false;

    static AssembleNeeds all() { return {true, true, true, true}; }
};

// One sample draw: the matrices derived from a single noise realization.
struct SampleDraw {
    Matrix X;     // (M+r) x N
    Matrix Q;     // T X X* T*
    Matrix Qdot;  // N/(N-1) T Xc Xc* T*,   Xc = X (I - e e*)
    Matrix H;     // Y Y*,                  Y  = (I,0) O X
    Matrix Hdot;  // N/(N-1) Yc Yc*
    std::uint64_t seed = 0;
    std::string ensembleRef;
};

namespace detail {

inline Matrix symmetricProduct(const Matrix& A, double factor = 1.0) {
    const int m = static_cast<int>(A.rows());
    Matrix S = Matrix::Zero(m, m);
    S.selfadjointView<Eigen::Lower>().rankUpdate(A, factor);
    S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
    return S;
}

// X (I_N - e e*) with e = N^{-1/2}(1,...,1): subtract each row's mean.
inline Matrix centerColumns(const Matrix& X) {
    Vector rowMean = X.rowwise().mean();
    return X.colwise() - rowMean;
}

}  // namespace detail

inline SampleDraw assembleMatrices(const Population& pop, const Matrix& X,
                                   const AssembleNeeds& needs = AssembleNeeds::all()) {
    const int M = pop.aspect.M;
    const int N = pop.aspect.N;
    if (X.rows() != M + pop.spec.r || X.cols() != N)
        throw DomainError("assembleMatrices: X has wrong shape");
    SampleDraw draw;
    draw.X = X;
    const double dotFactor = static_cast<double>(N) / (N - 1);

    std::optional<Matrix> TX;
    if (needs.Q || needs.Qdot) TX = pop.T * X;
    if (needs.Q) draw.Q = detail::symmetricProduct(*TX);
    if (needs.Qdot)
        draw.Qdot = detail::symmetricProduct(detail::centerColumns(*TX), dotFactor);

    if (needs.H || needs.Hdot) {
        Matrix Y = pop.spec.r == 0 ? X : (pop.O.topRows(M) * X).eval();
        if (needs.H) draw.H = detail::symmetricProduct(Y);
        if (needs.Hdot)
            draw.Hdot =
                detail::symmetricProduct(detail::centerColumns(Y), dotFactor);
    }
    return draw;
}

inline SampleDraw drawSample(const Population& pop, EntryLaw law,
                             std::uint64_t seed, std::uint64_t trial,
                             const AssembleNeeds& needs = {}) {
    Matrix X = sampleNoise(law, pop.aspect.M + pop.spec.r, pop.aspect.N,
                           pop.aspect, seed, trial);
    SampleDraw draw = assembleMatrices(pop, X, needs);
    draw.seed = derivedSeed(seed, trial);
    return draw;
}

// Outlier bookkeeping: O = {i : |d_i| >= 1 + K^{-1/3}} with the BBP margins
// alpha_pm = min_i |d_i -+ 1| taken over all M directions (unspiked ones
// contribute d = 0).
struct OutlierIndexSet {
    std::vector<int> indices;  // positions within the sorted spike list
    int sPlus = 0;
    int sMinus = 0;
    double alphaPlus = 1.0;
    double alphaMinus = 1.0;
};

inline OutlierIndexSet outlierIndexSet(const SpikeSpec& spec, int K) {
    OutlierIndexSet out;
    const double threshold = 1.0 + std::pow(static_cast<double>(K), -1.0 / 3.0);
    for (std::size_t i = 0; i < spec.spikes.size(); ++i) {
        const double d = spec.spikes[i].d;
        if (std::abs(d) >= threshold) {
            out.indices.push_back(static_cast<int>(i));
            if (d > 0)
                ++out.sPlus;
            else
                ++out.sMinus;
        }
        out.alphaPlus = std::min(out.alphaPlus, std::abs(d - 1.0));
        out.alphaMinus = std::min(out.alphaMinus, std::abs(d + 1.0));
    }
    return out;
}

}  // namespace spikelab
