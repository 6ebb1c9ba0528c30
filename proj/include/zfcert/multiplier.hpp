// Copyright 2026 The zfcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "zfcert/lti.hpp"

namespace zfcert {

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};
struct InfiniteB : std::runtime_error {
    explicit InfiniteB(const std::string& what) : std::runtime_error(what) {}
};

enum class KernelSide { Causal, Anticausal };

/**
 * Unit-mass exponential kernel: rate*exp(-rate*t) on t >= 0 (causal) or its
 * mirror on t <= 0 (anticausal). Transforms are rate/(rate + jw) and
 * rate/(rate - jw).
 */
struct KernelElement {
    double rate = 1.0;
    KernelSide side = KernelSide::Causal;

    Complex ft(double omega) const {
        const double sgn = side == KernelSide::Causal ? 1.0 : -1.0;
        return rate / Complex(rate, sgn * omega);
    }
    double value(double t) const {
        if (side == KernelSide::Causal) return t >= 0.0 ? rate * std::exp(-rate * t) : 0.0;
        return t <= 0.0 ? rate * std::exp(rate * t) : 0.0;
    }
};

/// Finite family of unit-mass exponential kernels spanning the search space.
struct KernelBasis {
    std::vector<KernelElement> elements;

    std::size_t size() const { return elements.size(); }

    /// rate_count log-spaced rates on [lo, hi], mirrored causal/anticausal.
    static KernelBasis mirrored_log_rates(std::size_t rate_count = 10, double lo = 1e-2, double hi = 1e2) {
        KernelBasis basis;
        if (rate_count == 0) return basis;
        basis.elements.reserve(rate_count * 2);
        for (std::size_t i = 0; i < rate_count; ++i) {
            const double t = rate_count == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(rate_count - 1);
            const double rate = std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo)));
            basis.elements.push_back({rate, KernelSide::Causal});
            basis.elements.push_back({rate, KernelSide::Anticausal});
        }
        return basis;
    }

    /**
     * Prefix-nested family for growing-basis sweeps: rates are drawn from a
     * fixed log-spaced master list in bit-reversed order, so every smaller
     * basis is a subset of every larger one and spans the whole rate range
     * early. element_count must be even (one causal/anticausal pair per rate).
     */
    static KernelBasis ladder(std::size_t element_count, std::size_t master_rates = 20, double lo = 1e-2,
                              double hi = 1e2) {
        if (element_count % 2 != 0) {
            throw std::invalid_argument("KernelBasis::ladder: element count must be even");
        }
        const std::size_t want = element_count / 2;
        if (want > master_rates) {
            throw std::invalid_argument("KernelBasis::ladder: master rate list too small");
        }
        // Bit-reversed visit order over the next power of two, skipping
        // indices beyond the master list.
        std::size_t bits = 0;
        while ((1u << bits) < master_rates) ++bits;
        std::vector<std::size_t> order;
        order.reserve(master_rates);
        for (std::size_t k = 0; k < (std::size_t{1} << bits); ++k) {
            std::size_t rev = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (k & (std::size_t{1} << b)) rev |= std::size_t{1} << (bits - 1 - b);
            if (rev < master_rates) order.push_back(rev);
        }
        KernelBasis basis;
        basis.elements.reserve(element_count);
        for (std::size_t i = 0; i < want; ++i) {
            const double t =
                master_rates == 1 ? 0.5 : static_cast<double>(order[i]) / static_cast<double>(master_rates - 1);
            const double rate = std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo)));
            basis.elements.push_back({rate, KernelSide::Causal});
            basis.elements.push_back({rate, KernelSide::Anticausal});
        }
        return basis;
    }
};

enum class CandidateMode { Nonneg, Signed };

/**
 * Kernel z = sum_k (cpos_k - cneg_k) * basis_k with nonnegative coefficients.
 * In Nonneg mode cneg is pinned to zero and sum(cpos) equals the L1 norm
 * exactly; in Signed mode sum(cpos + cneg) is only an upper bound on the L1
 * norm (triangle inequality over overlapping kernels).
 */
struct MultiplierCandidate {
    KernelBasis basis;
    std::vector<double> coeff_pos;
    std::vector<double> coeff_neg;
    CandidateMode mode = CandidateMode::Nonneg;

    static MultiplierCandidate zero(KernelBasis b, CandidateMode m = CandidateMode::Nonneg) {
        MultiplierCandidate cand;
        cand.coeff_pos.assign(b.size(), 0.0);
        cand.coeff_neg.assign(b.size(), 0.0);
        cand.basis = std::move(b);
        cand.mode = m;
        return cand;
    }

    void validate() const {
        if (coeff_pos.size() != basis.size() || coeff_neg.size() != basis.size()) {
            throw std::invalid_argument("MultiplierCandidate: coefficient/basis size mismatch");
        }
        for (const KernelElement& el : basis.elements) {
            if (!(el.rate > 0.0) || !std::isfinite(el.rate)) {
                throw std::invalid_argument("MultiplierCandidate: kernel rates must be positive");
            }
        }
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (coeff_pos[k] < 0.0 || coeff_neg[k] < 0.0) {
                throw std::invalid_argument("MultiplierCandidate: coefficients must be nonnegative");
            }
            if (mode == CandidateMode::Nonneg && coeff_neg[k] != 0.0) {
                throw std::invalid_argument("MultiplierCandidate: nonneg mode forbids negative-part coefficients");
            }
        }
    }

    /// Exact L1 norm in Nonneg mode; certified upper bound in Signed mode.
    double l1_budget() const {
        double sum = 0.0;
        for (double c : coeff_pos) sum += c;
        for (double c : coeff_neg) sum += c;
        return sum;
    }

    /// Z(jw) as the closed-form sum of the element transforms.
    Complex z_value(double omega) const {
        Complex acc(0.0, 0.0);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const double c = coeff_pos[k] - coeff_neg[k];
            if (c != 0.0) acc += c * basis.elements[k].ft(omega);
        }
        return acc;
    }

    /// Z vanishes at infinity for every integrable kernel.
    double z_at_infinity() const { return 0.0; }

    /// Kernel value z(t) in the time domain.
    double kernel_value(double t) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const double c = coeff_pos[k] - coeff_neg[k];
            if (c != 0.0) acc += c * basis.elements[k].value(t);
        }
        return acc;
    }
};

inline Complex z_transform_value(const MultiplierCandidate& cand, double omega) { return cand.z_value(omega); }
inline double l1_budget(const MultiplierCandidate& cand) { return cand.l1_budget(); }

/**
 * Slope restriction (a, b): 0 <= a < b, with b = +infinity selecting the
 * monotone (one-sided) class.
 */
struct SlopeBand {
    double a = 0.0;
    double b = kInf;

    SlopeBand() = default;
    SlopeBand(double a_, double b_) : a(a_), b(b_) {
        if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("SlopeBand: requires 0 <= a < b");
    }

    static SlopeBand monotone() { return SlopeBand(0.0, kInf); }
    bool b_finite() const { return std::isfinite(b); }
    double b_inv() const { return b_finite() ? 1.0 / b : 0.0; }
    bool is_monotone() const { return a == 0.0 && !b_finite(); }
};

using Mat2c = std::array<std::array<Complex, 2>, 2>;

/**
 * Frequency-indexed 2x2 Hermitian multiplier matrix. The monotone form has a
 * zero diagonal with 1-Z(jw) on the anti-diagonal; the slope form carries the
 * (a, b) weighting of M = 1-Z.
 */
struct PiMatrix {
    enum class Form { Monotone, Slope };
    Form form = Form::Monotone;
    MultiplierCandidate candidate;
    SlopeBand band;

    Mat2c at(double omega) const { return assemble(Complex(1.0, 0.0) - candidate.z_value(omega)); }
    Mat2c at_infinity() const { return assemble(Complex(1.0, 0.0)); }

    /// Spectral norm of the 2x2 Hermitian value.
    static double norm2(const Mat2c& m) {
        const double p = m[0][0].real();
        const double r = m[1][1].real();
        const double q = std::abs(m[0][1]);
        const double mid = 0.5 * (p + r);
        const double rad = std::hypot(0.5 * (p - r), q);
        return std::max(std::abs(mid + rad), std::abs(mid - rad));
    }

    /// sup over the grid (plus the infinity limit) of the spectral norm.
    double sup_norm(const FrequencyGrid& grid) const {
        double best = grid.include_infinity ? norm2(at_infinity()) : 0.0;
        for (double w : grid.omegas) best = std::max(best, norm2(at(w)));
        return best;
    }

   private:
    Mat2c assemble(Complex m) const {
        Mat2c out;
        if (form == Form::Monotone) {
            out[0][0] = out[1][1] = Complex(0.0, 0.0);
            out[0][1] = std::conj(m);
            out[1][0] = m;
            return out;
        }
        const double binv = band.b_inv();
        const Complex sym = m + std::conj(m);
        out[0][0] = -band.a * sym;
        out[0][1] = band.a * binv * m + std::conj(m);
        out[1][0] = band.a * binv * std::conj(m) + m;
        out[1][1] = -binv * sym;
        return out;
    }
};

inline void require_budget(const MultiplierCandidate& cand) {
    cand.validate();
    if (cand.l1_budget() > 1.0 + 1e-12) {
        throw BudgetExceeded("multiplier kernel exceeds the unit L1 budget: " + std::to_string(cand.l1_budget()));
    }
}

inline PiMatrix build_pi_monotone(const MultiplierCandidate& cand) {
    require_budget(cand);
    return PiMatrix{PiMatrix::Form::Monotone, cand, SlopeBand::monotone()};
}

inline PiMatrix build_pi_slope(const MultiplierCandidate& cand, const SlopeBand& band) {
    require_budget(cand);
    if (!band.b_finite()) {
        throw InfiniteB("build_pi_slope: b must be finite; use the monotone form for b = infinity");
    }
    return PiMatrix{PiMatrix::Form::Slope, cand, band};
}

/**
 * Per-frequency certification integrand Re{(1-Z(jw)) * (G(jw) - 1/b) * (a*conj(G(jw)) - 1)}.
 * With (a, b) = (0, inf) this reduces to Re{(1-Z(jw)) * (-G(jw))}.
 */
inline double condition_value(const RationalTF& g, const MultiplierCandidate& cand, const SlopeBand& band,
                              double omega) {
    const Complex gv = g.at(omega);
    const Complex m = Complex(1.0, 0.0) - cand.z_value(omega);
    const Complex k = (gv - band.b_inv()) * (band.a * std::conj(gv) - 1.0);
    return (m * k).real();
}

inline double condition_value_at_infinity(const RationalTF& g, const SlopeBand& band) {
    const double gv = g.at_infinity();  // Z(inf) = 0, so M = 1
    return (gv - band.b_inv()) * (band.a * gv - 1.0);
}

/**
 * Minimum of the certification integrand over the grid, including the
 * infinity limit when the grid carries it. A positive value certifies the
 * frequency-domain condition at grid resolution with that margin.
 */
inline double condition_margin(const RationalTF& g, const MultiplierCandidate& cand, const SlopeBand& band,
                               const FrequencyGrid& grid) {
    if (!in_rh_inf(g)) throw std::invalid_argument("condition_margin: plant must be in RH-infinity");
    require_budget(cand);
    if (grid.omegas.empty() && !grid.include_infinity) {
        throw EmptyGrid("condition_margin: empty frequency grid");
    }
    double best = kInf;
    for (double w : grid.omegas) best = std::min(best, condition_value(g, cand, band, w));
    if (grid.include_infinity) best = std::min(best, condition_value_at_infinity(g, band));
    return best;
}

/**
 * Discrete convolution of a sampled signal with one unit-mass exponential
 * kernel. The recursion integrates the kernel exactly against the linear
 * interpolant of the input, so the only error is the piecewise-linear
 * signal model. The anticausal side runs the same recursion time-reversed.
 */
inline std::vector<double> convolve_kernel(const KernelElement& el, const std::vector<double>& w, double dt) {
    const std::size_t n = w.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    const double lam = el.rate;
    const double decay = std::exp(-lam * dt);
    const double a = 1.0 - decay;                            // integral of the kernel over one step
    const double bcoef = ((1.0 - decay) / lam - dt * decay) / dt;  // weight of the older sample
    auto forward = [&](auto idx) {
        double acc = 0.0;
        out[idx(0)] = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            acc = decay * acc + (a - bcoef) * w[idx(i)] + bcoef * w[idx(i - 1)];
            out[idx(i)] = acc;
        }
    };
    if (el.side == KernelSide::Causal) {
        forward([](std::size_t i) { return i; });
    } else {
        forward([n](std::size_t i) { return n - 1 - i; });
    }
    return out;
}

/// (1 - Z) applied to a sampled signal: w minus the kernel convolution.
inline std::vector<double> apply_one_minus_z(const MultiplierCandidate& cand, const std::vector<double>& w,
                                             double dt) {
    std::vector<double> out = w;
    for (std::size_t k = 0; k < cand.basis.size(); ++k) {
        const double c = cand.coeff_pos[k] - cand.coeff_neg[k];
        if (c == 0.0) continue;
        const std::vector<double> conv = convolve_kernel(cand.basis.elements[k], w, dt);
        for (std::size_t i = 0; i < w.size(); ++i) out[i] -= c * conv[i];
    }
    return out;
}

}  // namespace zfcert
