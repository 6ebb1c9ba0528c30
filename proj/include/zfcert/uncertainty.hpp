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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "zfcert/lti.hpp"
#include "zfcert/multiplier.hpp"

namespace zfcert {

struct LengthMismatch : std::runtime_error {
    explicit LengthMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct NoDecreasingPair : std::runtime_error {
    explicit NoDecreasingPair(const std::string& what) : std::runtime_error(what) {}
};

// Proof-signal discretization: unit blocks sampled at this step.
inline constexpr double kTraceDt = 1e-2;

/// Uniformly sampled real signal on [0, dt*len), truncated to zero beyond.
struct SignalTrace {
    double dt = kTraceDt;
    std::vector<double> samples;

    SignalTrace() = default;
    SignalTrace(double step, std::vector<double> data) : dt(step), samples(std::move(data)) {
        if (!(dt > 0.0)) throw std::invalid_argument("SignalTrace: dt must be positive");
        for (double v : samples) {
            if (!std::isfinite(v)) throw std::invalid_argument("SignalTrace: samples must be finite");
        }
    }

    double horizon() const { return dt * static_cast<double>(samples.size()); }
    double norm() const {
        double acc = 0.0;
        for (double v : samples) acc += v * v;
        return std::sqrt(dt * acc);
    }
};

/**
 * Piecewise-linear static map with end-slope extension. Required to map 0 to
 * 0. Monotonicity and oddness are computed from the data, so the flags can
 * never disagree with the breakpoint table.
 */
class StaticNonlinearity {
   public:
    StaticNonlinearity(std::vector<double> breakpoints, std::vector<double> values)
        : xs_(std::move(breakpoints)), ys_(std::move(values)) {
        if (xs_.size() != ys_.size() || xs_.size() < 2) {
            throw std::invalid_argument("StaticNonlinearity: need matching lists of at least two breakpoints");
        }
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            if (!(xs_[i] > xs_[i - 1])) {
                throw std::invalid_argument("StaticNonlinearity: breakpoints must be strictly increasing");
            }
        }
        slopes_.resize(xs_.size() - 1);
        double scale = 1.0;
        for (double v : ys_) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
            slopes_[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        }
        if (std::abs((*this)(0.0)) > 1e-9 * scale) {
            throw std::invalid_argument("StaticNonlinearity: must map 0 to 0");
        }
        min_slope_ = *std::min_element(slopes_.begin(), slopes_.end());
        max_slope_ = *std::max_element(slopes_.begin(), slopes_.end());
        monotone_ = min_slope_ >= -1e-12 * (1.0 + std::abs(max_slope_));
        odd_ = true;
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            if (std::abs((*this)(-xs_[i]) + ys_[i]) > 1e-9 * scale) {
                odd_ = false;
                break;
            }
        }
    }

    double operator()(double x) const {
        if (x <= xs_.front()) return ys_.front() + slopes_.front() * (x - xs_.front());
        if (x >= xs_.back()) return ys_.back() + slopes_.back() * (x - xs_.back());
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        return ys_[i] + slopes_[i] * (x - xs_[i]);
    }

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    bool claims_monotone() const { return monotone_; }
    bool claims_odd() const { return odd_; }
    std::pair<double, double> slope_range() const { return {min_slope_, max_slope_}; }

    static StaticNonlinearity saturation(double level = 1.0) {
        return StaticNonlinearity({-2.0 * level, -level, level, 2.0 * level}, {-level, -level, level, level});
    }
    static StaticNonlinearity identity() { return StaticNonlinearity({-1.0, 1.0}, {-1.0, 1.0}); }
    static StaticNonlinearity linear(double gain) { return StaticNonlinearity({-1.0, 1.0}, {-gain, gain}); }

   private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> slopes_;
    double min_slope_ = 0.0;
    double max_slope_ = 0.0;
    bool monotone_ = false;
    bool odd_ = false;
};

inline SignalTrace apply(const StaticNonlinearity& nl, const SignalTrace& x) {
    std::vector<double> out(x.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = nl(x.samples[i]);
    return SignalTrace(x.dt, std::move(out));
}

/// Bounded causal LTI uncertainty, carried as its transfer function.
struct LtiUncertainty {
    RationalTF tf;
    explicit LtiUncertainty(RationalTF f) : tf(std::move(f)) {
        if (!tf.proper()) throw std::invalid_argument("LtiUncertainty: transfer function must be proper");
        if (!is_hurwitz(tf.den())) {
            throw std::invalid_argument("LtiUncertainty: transfer function must be stable");
        }
    }
};

/**
 * Discretized inner product <x - y/b, (1-Z)(-a x + y)>. The kernel
 * convolution runs the exact exponential recursions of the basis, so the
 * discretization error comes from the piecewise-linear signal model and the
 * trapezoidal quadrature only.
 */
inline double iqc_inner_product(const SignalTrace& x, const SignalTrace& y, const MultiplierCandidate& cand,
                                const SlopeBand& band) {
    if (x.samples.size() != y.samples.size() || x.dt != y.dt) {
        throw LengthMismatch("iqc_inner_product: traces must share dt and length");
    }
    const std::size_t n = x.samples.size();
    if (n == 0) return 0.0;
    const double binv = band.b_inv();
    std::vector<double> u(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = x.samples[i] - binv * y.samples[i];
        w[i] = -band.a * x.samples[i] + y.samples[i];
    }
    const std::vector<double> v = apply_one_minus_z(cand, w, x.dt);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += u[i] * v[i];
    acc -= 0.5 * (u.front() * v.front() + u.back() * v.back());
    return acc * x.dt;
}

namespace detail {

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(seed * 0x9E3779B97F4A7C15ull + index + 1);
}

inline SignalTrace random_trace(std::mt19937_64& rng, double amplitude, std::size_t len = 800,
                                double dt = kTraceDt) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> s(len, 0.0);
    for (int mode = 0; mode < 4; ++mode) {
        const double amp = amplitude * (0.2 + 0.8 * unit(rng));
        const double decay = 0.05 + 0.45 * unit(rng);
        const double freq = 0.2 + 5.8 * unit(rng);
        const double phase = 2.0 * M_PI * unit(rng);
        for (std::size_t i = 0; i < len; ++i) {
            const double t = static_cast<double>(i) * dt;
            s[i] += amp * std::exp(-decay * t) * std::sin(freq * t + phase);
        }
    }
    return SignalTrace(dt, std::move(s));
}

inline MultiplierCandidate random_nonneg_candidate(std::mt19937_64& rng, double max_budget = 1.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MultiplierCandidate cand = MultiplierCandidate::zero(KernelBasis::mirrored_log_rates(5, 1e-1, 1e1));
    double total = 0.0;
    for (double& c : cand.coeff_pos) {
        c = unit(rng);
        total += c;
    }
    const double budget = max_budget * unit(rng);
    for (double& c : cand.coeff_pos) c *= budget / total;
    return cand;
}

}  // namespace detail

struct SlopeViolation {
    double x1 = 0.0;
    double x2 = 0.0;
    double quotient = 0.0;
};

struct MembershipReport {
    bool member = false;
    double slope_min = 0.0;
    double slope_max = 0.0;
    std::optional<SlopeViolation> violation;
    int trials_run = 0;
    // Worst spot-check value of the inner product, normalized by ||x|| ||y||.
    double worst_iqc_margin = 0.0;
};

/**
 * Exact membership of a piecewise-linear map in the slope class (a, b): the
 * difference quotients over every breakpoint pair, together with the two
 * extension slopes, decide membership. Randomized inner-product spot checks
 * are attached to the report as corroborating evidence.
 */
inline MembershipReport membership_test_static(const StaticNonlinearity& nl, const SlopeBand& band,
                                               int trials = 0, std::uint64_t seed = 0) {
    MembershipReport report;
    const auto [smin, smax] = nl.slope_range();
    report.slope_min = smin;
    report.slope_max = smax;

    const double lo_tol = 1e-12 * (1.0 + std::abs(band.a));
    const double hi_tol = band.b_finite() ? 1e-12 * (1.0 + band.b) : 0.0;
    auto admissible = [&](double q) {
        return q >= band.a - lo_tol && (!band.b_finite() || q <= band.b + hi_tol);
    };

    report.member = true;
    const auto& xs = nl.breakpoints();
    const auto& ys = nl.values();
    // End extensions first (they realize the extreme quotients beyond the table).
    if (!admissible(smin) || !admissible(smax)) {
        report.member = false;
        const double bad = !admissible(smin) ? smin : smax;
        report.violation = SlopeViolation{0.0, 0.0, bad};
    }
    for (std::size_t i = 0; report.member && i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double q = (ys[j] - ys[i]) / (xs[j] - xs[i]);
            if (!admissible(q)) {
                report.member = false;
                report.violation = SlopeViolation{xs[i], xs[j], q};
                break;
            }
        }
    }

    const double amplitude = std::max(1.0, std::max(std::abs(xs.front()), std::abs(xs.back())));
    report.worst_iqc_margin = kInf;
    for (int t = 0; t < trials; ++t) {
        auto rng = detail::trial_rng(seed, static_cast<std::uint64_t>(t));
        const SignalTrace x = detail::random_trace(rng, amplitude);
        const SignalTrace y = apply(nl, x);
        const MultiplierCandidate cand = detail::random_nonneg_candidate(rng);
        const double value = iqc_inner_product(x, y, cand, band);
        const double scale = std::max(1e-30, x.norm() * y.norm());
        report.worst_iqc_margin = std::min(report.worst_iqc_margin, value / scale);
        ++report.trials_run;
    }
    if (trials == 0) report.worst_iqc_margin = 0.0;
    return report;
}

/**
 * Alternating square wave of 2L+2 unit blocks exposing a decreasing pair:
 * the shift-by-one-block correlation exceeds the aligned correlation once L
 * passes a computable threshold, which falsifies the shift inequality that
 * defines the monotone-compatible class.
 */
struct FalsificationResult {
    SignalTrace trace;
    double shifted_integral = 0.0;
    double unshifted_integral = 0.0;
    long min_l = 0;
    double x1 = 0.0;
    double x2 = 0.0;
};

inline FalsificationResult falsify_nonmonotone(const StaticNonlinearity& nl, long blocks_l) {
    if (blocks_l < 0) throw std::invalid_argument("falsify_nonmonotone: L must be nonnegative");
    // Strongest decreasing pair over breakpoints plus the two extensions.
    const auto& xs = nl.breakpoints();
    std::vector<double> probes(xs.begin(), xs.end());
    probes.insert(probes.begin(), xs.front() - 1.0);
    probes.push_back(xs.back() + 1.0);
    double best_drop = 0.0, x1 = 0.0, x2 = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        for (std::size_t j = i + 1; j < probes.size(); ++j) {
            const double drop = nl(probes[i]) - nl(probes[j]);
            if (drop > best_drop) {
                best_drop = drop;
                x1 = probes[i];
                x2 = probes[j];
            }
        }
    }
    if (best_drop <= 0.0) {
        throw NoDecreasingPair("falsify_nonmonotone: map is monotone nondecreasing; no witness exists");
    }

    const long samples_per_block = static_cast<long>(std::llround(1.0 / kTraceDt));
    const long total = (2 * blocks_l + 2) * samples_per_block;
    std::vector<double> s(static_cast<std::size_t>(total));
    for (long i = 0; i < total; ++i) {
        const long block = i / samples_per_block;
        s[static_cast<std::size_t>(i)] = block % 2 == 0 ? x1 : x2;
    }
    FalsificationResult result;
    result.trace = SignalTrace(kTraceDt, std::move(s));
    result.x1 = x1;
    result.x2 = x2;

    const auto& sig = result.trace.samples;
    double plain = 0.0, shifted = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        plain += sig[i] * nl(sig[i]);
        const std::size_t ahead = i + static_cast<std::size_t>(samples_per_block);
        shifted += sig[i] * (ahead < sig.size() ? nl(sig[ahead]) : nl(0.0));
    }
    result.unshifted_integral = plain * kTraceDt;
    result.shifted_integral = shifted * kTraceDt;

    // Threshold L from the per-period gain of the shifted sum.
    const double gain_a = x1 * (nl(x2) - nl(x1));
    const double gain_b = x2 * (nl(x1) - nl(x2));
    const double q = (x2 * nl(x2) - gain_a) / (gain_a + gain_b);
    result.min_l = q < 0.0 ? 0 : static_cast<long>(std::floor(q)) + 1;
    return result;
}

struct OddFalsificationReport {
    bool violation_found = false;
    double worst_margin = 0.0;  // min over pairs of T0 - |T1|; negative = violation
    double x1 = 0.0;
    double x2 = 0.0;
    std::string construction;
    SignalTrace witness;
    double shifted_integral = 0.0;
    double unshifted_integral = 0.0;
    long blocks_l = 0;
};

/**
 * Odd-class falsification for a monotone map: both two-sided block
 * constructions (x1 against -x2 and x2 against -x1) are scanned over a
 * lattice of positive levels; a monotone map that is not odd violates the
 * absolute-value shift inequality for large enough L.
 */
inline OddFalsificationReport falsify_noneven_odd(const StaticNonlinearity& nl, long blocks_l) {
    if (!nl.claims_monotone()) {
        throw std::invalid_argument("falsify_noneven_odd: map must be monotone (falsify_nonmonotone applies)");
    }
    if (blocks_l < 0) throw std::invalid_argument("falsify_noneven_odd: L must be nonnegative");

    std::vector<double> levels;
    for (double x : nl.breakpoints()) {
        const double ax = std::abs(x);
        if (ax > 1e-12) {
            levels.push_back(ax);
            levels.push_back(0.5 * ax);
            levels.push_back(1.5 * ax);
        }
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 levels.end());

    const double lcount = static_cast<double>(blocks_l);
    auto eval_construction = [&](double p, double q, bool first) {
        // first: blocks (p, -q); otherwise blocks (q, -p).
        const double pos = first ? p : q;
        const double neg = first ? q : p;
        const double t0 = (lcount + 1.0) * (pos * nl(pos) - neg * nl(-neg));
        const double t1 = (lcount + 1.0) * pos * nl(-neg) - lcount * neg * nl(pos);
        return std::pair<double, double>(t0, t1);
    };

    OddFalsificationReport report;
    report.blocks_l = blocks_l;
    report.worst_margin = kInf;
    bool first_best = true;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = i + 1; j < levels.size(); ++j) {
            for (bool first : {true, false}) {
                const auto [t0, t1] = eval_construction(levels[i], levels[j], first);
                const double margin = t0 - std::abs(t1);
                if (margin < report.worst_margin) {
                    report.worst_margin = margin;
                    report.x1 = levels[i];
                    report.x2 = levels[j];
                    first_best = first;
                }
            }
        }
    }
    if (!std::isfinite(report.worst_margin)) {
        report.worst_margin = 0.0;
        return report;
    }
    report.construction = first_best ? "x1/-x2" : "x2/-x1";
    report.violation_found = report.worst_margin < -1e-9;

    // Materialize the witness trace and integrate it directly.
    const double pos = first_best ? report.x1 : report.x2;
    const double neg = first_best ? report.x2 : report.x1;
    const long samples_per_block = static_cast<long>(std::llround(1.0 / kTraceDt));
    const long total = (2 * blocks_l + 2) * samples_per_block;
    std::vector<double> s(static_cast<std::size_t>(total));
    for (long i = 0; i < total; ++i) {
        s[static_cast<std::size_t>(i)] = (i / samples_per_block) % 2 == 0 ? pos : -neg;
    }
    report.witness = SignalTrace(kTraceDt, std::move(s));
    const auto& sig = report.witness.samples;
    double plain = 0.0, shifted = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        plain += sig[i] * nl(sig[i]);
        const std::size_t ahead = i + static_cast<std::size_t>(samples_per_block);
        shifted += sig[i] * (ahead < sig.size() ? nl(sig[ahead]) : nl(0.0));
    }
    report.unshifted_integral = plain * kTraceDt;
    report.shifted_integral = shifted * kTraceDt;
    return report;
}

struct LtiWitness {
    double omega = 0.0;
    double tau = 0.0;
    double value = 0.0;
    std::string branch;
};

struct LtiMembershipReport {
    bool member = false;
    bool constant = false;
    double dc_value = 0.0;
    double max_deviation = 0.0;
    std::optional<LtiWitness> witness;
};

/**
 * Frequency-domain membership of an LTI uncertainty: admissible systems are
 * exactly the nonnegative constants. Non-members get an explicit (omega, tau)
 * pair violating Re{D(jw)(1 + exp(jw tau))} >= 0, chosen per the sign pattern
 * of D(jw) = alpha + j beta; when both parts are nonzero the witness solves
 * tan(w tau / 2) = (alpha + 1)/beta.
 */
inline LtiMembershipReport lti_membership_test(const LtiUncertainty& u, const FrequencyGrid& grid,
                                               int tau_samples = 64) {
    LtiMembershipReport report;
    const double d0 = u.tf.at(0.0).real();
    report.dc_value = d0;
    double deviation = 0.0;
    for (double w : grid.omegas) deviation = std::max(deviation, std::abs(u.tf.at(w) - d0));
    report.max_deviation = deviation;
    report.constant = deviation <= 1e-9;

    auto value_at = [&](double omega, double tau) {
        const Complex d = u.tf.at(omega);
        return (d * (1.0 + std::exp(Complex(0.0, omega * tau)))).real();
    };
    // The analytic branches produce the reported witness; the lattice sweep
    // only backs them up in case a violation hides from every branch.
    std::optional<LtiWitness> analytic, lattice;
    auto consider = [&](std::optional<LtiWitness>& slot, double omega, double tau, const std::string& branch) {
        const double v = value_at(omega, tau);
        if (v < -1e-12 && (!slot || v < slot->value)) slot = LtiWitness{omega, tau, v, branch};
    };

    if (2.0 * d0 < 0.0) consider(analytic, 0.0, 0.0, "alpha<0 at omega=0");
    for (double w : grid.omegas) {
        if (w <= 0.0) continue;
        const Complex d = u.tf.at(w);
        const double alpha = d.real(), beta = d.imag();
        if (std::abs(beta) <= 1e-12 * (1.0 + std::abs(alpha))) {
            if (alpha < 0.0) consider(analytic, w, (M_PI / 2.0) / w, "beta=0, alpha<0");
        } else if (std::abs(alpha) <= 1e-12 * (1.0 + std::abs(beta))) {
            consider(analytic, w, (beta > 0.0 ? M_PI / 2.0 : 1.5 * M_PI) / w, "alpha=0, beta!=0");
        } else {
            double phase = 2.0 * std::atan((alpha + 1.0) / beta);
            if (phase <= 0.0) phase += 2.0 * M_PI;
            consider(analytic, w, phase / w, "tan(omega*tau/2)=(alpha+1)/beta");
        }
        for (int k = 1; k <= tau_samples; ++k) {
            const double tau = 2.0 * M_PI * static_cast<double>(k) / (static_cast<double>(tau_samples) * w);
            consider(lattice, w, tau, "lattice");
        }
    }

    report.witness = analytic ? analytic : lattice;
    report.member = report.constant && d0 >= 0.0 && !report.witness.has_value();
    return report;
}

struct HomotopyReport {
    bool all_passed = false;
    int steps = 0;
    std::vector<double> failed_thetas;
};

/**
 * Checks that the straight-line homotopy theta*D + (1-theta)*a stays inside
 * the slope class for theta on a uniform grid over [0, 1].
 */
inline HomotopyReport homotopy_sweep(const StaticNonlinearity& nl, const SlopeBand& band, int theta_steps) {
    if (theta_steps < 1) throw std::invalid_argument("homotopy_sweep: need at least one step");
    if (!membership_test_static(nl, band).member) {
        throw std::invalid_argument("homotopy_sweep: map must belong to the slope class");
    }
    HomotopyReport report;
    report.steps = theta_steps + 1;
    for (int k = 0; k <= theta_steps; ++k) {
        const double theta = static_cast<double>(k) / static_cast<double>(theta_steps);
        std::vector<double> blended(nl.values().size());
        for (std::size_t i = 0; i < blended.size(); ++i) {
            blended[i] = theta * nl.values()[i] + (1.0 - theta) * band.a * nl.breakpoints()[i];
        }
        const StaticNonlinearity mixed(nl.breakpoints(), blended);
        if (!membership_test_static(mixed, band, /*trials=*/2, /*seed=*/static_cast<std::uint64_t>(k)).member) {
            report.failed_thetas.push_back(theta);
        }
    }
    report.all_passed = report.failed_thetas.empty();
    return report;
}

}  // namespace zfcert
