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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace spikelab {

inline constexpr double kPi = 3.14159265358979323846;

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (7-15 pair, bisection refinement).
// ---------------------------------------------------------------------------

namespace detail {

// Nodes/weights for the Kronrod 15-point rule on [-1,1]; the embedded
// Gauss 7-point rule uses every other node (odd indices).
inline constexpr double kGK15Nodes[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

inline constexpr double kK15Weights[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

inline constexpr double kG7Weights[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct PanelEstimate {
    double integral = 0.0;
    double error = 0.0;
};

template <class F>
PanelEstimate gaussKronrodPanel(const F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double k15 = 0.0;
    double g7 = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double fx = f(mid + half * kGK15Nodes[i]);
        k15 += kK15Weights[i] * fx;
        if (i % 2 == 1) g7 += kG7Weights[i / 2] * fx;
    }
    PanelEstimate est;
    est.integral = half * k15;
    est.error = std::abs(half * (k15 - g7));
    return est;
}

}  // namespace detail

struct QuadratureResult {
    double value = 0.0;
    double errorEstimate = 0.0;
    int panels = 0;
};

// Integrates f over [a, b] to the requested relative tolerance (with an
// absolute floor), subdividing the worst panel first.
template <class F>
QuadratureResult integrate(const F& f, double a, double b,
                           double relTol = 1e-10, double absTol = 1e-14,
                           int maxPanels = 4000) {
    struct Item {
        double a, b;
        detail::PanelEstimate est;
        bool operator<(const Item& o) const { return est.error < o.est.error; }
    };
    std::priority_queue<Item> queue;
    queue.push({a, b, detail::gaussKronrodPanel(f, a, b)});
    double total = queue.top().est.integral;
    double totalErr = queue.top().est.error;
    int panels = 1;
    while (panels < maxPanels &&
           totalErr > std::max(absTol, relTol * std::abs(total))) {
        Item worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Item left{worst.a, mid, detail::gaussKronrodPanel(f, worst.a, mid)};
        Item right{mid, worst.b, detail::gaussKronrodPanel(f, mid, worst.b)};
        total += left.est.integral + right.est.integral - worst.est.integral;
        totalErr += left.est.error + right.est.error - worst.est.error;
        queue.push(left);
        queue.push(right);
        ++panels;
    }
    if (totalErr > std::max(absTol * 10, relTol * 10 * std::abs(total)) &&
        panels >= maxPanels) {
        throw NumericError("quadrature did not converge; residual error " +
                           std::to_string(totalErr));
    }
    return {total, totalErr, panels};
}

// ---------------------------------------------------------------------------
// Root bracketing: bisection with a secant acceleration step.
// ---------------------------------------------------------------------------

template <class F>
double solveBracketed(const F& f, double lo, double hi, double xTol = 1e-12,
                      int maxIter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericError("root not bracketed");
    for (int it = 0; it < maxIter && hi - lo > xTol; ++it) {
        // Secant proposal, clamped to the bracket interior; fall back to the
        // midpoint whenever it degenerates.
        double x = lo - flo * (hi - lo) / (fhi - flo);
        const double mid = 0.5 * (lo + hi);
        if (!(x > lo && x < hi)) x = mid;
        if (it % 2 == 1) x = mid;
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Special functions.
// ---------------------------------------------------------------------------

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise (Lentz).
inline double regularizedGammaP(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw DomainError("regularizedGammaP: bad args");
    if (x == 0.0) return 0.0;
    const double lgA = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lgA);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lgA) * h;
}

// chi^2 with one degree of freedom: P(1/2, x/2).
inline double chiSquared1Cdf(double x) {
    if (x <= 0.0) return 0.0;
    return regularizedGammaP(0.5, 0.5 * x);
}

inline double chiSquared1Quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw DomainError("chiSquared1Quantile: p in (0,1)");
    return solveBracketed([p](double x) { return chiSquared1Cdf(x) - p; }, 0.0,
                          200.0, 1e-13);
}

// Regularized incomplete beta I_x(a, b) by the standard continued fraction.
inline double regularizedBeta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0 && a > 0.0 && b > 0.0))
        throw DomainError("regularizedBeta: bad args");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double logBeta =
        std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    auto contFrac = [](double x_, double a_, double b_) {
        const double tiny = 1e-300;
        double c = 1.0;
        double d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 400; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (b_ - m) * x_ / ((a_ + m2 - 1.0) * (a_ + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(a_ + m) * (a_ + b_ + m) * x_ /
                  ((a_ + m2) * (a_ + m2 + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < 1e-16) break;
        }
        return h;
    };
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - logBeta);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * contFrac(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - logBeta) *
                     contFrac(1.0 - x, b, a) / b;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov statistics (the statistic only; pass/fail thresholds
// are configuration, not distribution theory).
// ---------------------------------------------------------------------------

// sup_x |F_n(x) - F(x)| for a sorted or unsorted sample against a CDF.
inline double ksDistance(std::vector<double> sample,
                         const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ksDistance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double fx = cdf(sample[i]);
        d = std::max(d, std::abs(fx - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - fx));
    }
    return d;
}

// Two-sample sup-distance between empirical CDFs.
inline double ksTwoSample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ksTwoSample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    return d;
}

// Deterministic order-statistic quantile: the ceil(p*n)-th smallest value.
inline double sampleQuantile(std::vector<double> sample, double p) {
    if (sample.empty()) throw DomainError("sampleQuantile: empty sample");
    if (p < 0.0 || p > 1.0) throw DomainError("sampleQuantile: p in [0,1]");
    std::sort(sample.begin(), sample.end());
    const auto n = sample.size();
    std::size_t k =
        static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    if (k == 0) k = 1;
    if (k > n) k = n;
    return sample[k - 1];
}

inline double sampleMean(const std::vector<double>& sample) {
    if (sample.empty()) throw DomainError("sampleMean: empty sample");
    double s = 0.0;
    for (double x : sample) s += x;
    return s / static_cast<double>(sample.size());
}

inline double sampleMedian(std::vector<double> sample) {
    if (sample.empty()) throw DomainError("sampleMedian: empty sample");
    std::sort(sample.begin(), sample.end());
    const auto n = sample.size();
    if (n % 2 == 1) return sample[n / 2];
    return 0.5 * (sample[n / 2 - 1] + sample[n / 2]);
}

}  // namespace spikelab
