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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "zfcert/uncertainty.hpp"
#include "oracles.hpp"

using namespace zfcert;
using Catch::Approx;

namespace {

// Monotone but not odd: slope 2 on the negative axis, slope 1 on the positive.
StaticNonlinearity kinked_monotone() { return StaticNonlinearity({-1.0, 0.0, 1.0}, {-2.0, 0.0, 1.0}); }

StaticNonlinearity negated_identity() { return StaticNonlinearity({-1.0, 1.0}, {1.0, -1.0}); }

StaticNonlinearity deadzone_unit_slope() {
    return StaticNonlinearity({-2.0, -0.5, 0.5, 2.0}, {-1.5, 0.0, 0.0, 1.5});
}

StaticNonlinearity random_monotone(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> step(0.0, 1.0);
    std::vector<double> xs;
    double x = -2.0;
    for (int i = 0; i < 9; ++i) {
        xs.push_back(x);
        x += 0.1 + 0.4 * step(rng);
    }
    std::vector<double> raw(xs.size(), 0.0);
    for (std::size_t i = 1; i < raw.size(); ++i) raw[i] = raw[i - 1] + step(rng) * (xs[i] - xs[i - 1]);
    // Anchor the interpolated value at x = 0 so the map sends 0 to 0.
    std::size_t seg = 0;
    while (seg + 2 < xs.size() && xs[seg + 1] < 0.0) ++seg;
    const double slope = (raw[seg + 1] - raw[seg]) / (xs[seg + 1] - xs[seg]);
    const double at0 = raw[seg] + slope * (0.0 - xs[seg]);
    for (double& v : raw) v -= at0;
    return StaticNonlinearity(xs, raw);
}

}  // namespace

TEST_CASE("StaticNonlinearity") {
    SECTION("saturation evaluates to the clipped identity") {
        const StaticNonlinearity sat = StaticNonlinearity::saturation();
        CHECK(sat(-2.0) == Approx(-1.0));
        CHECK(sat(0.5) == Approx(0.5));
        CHECK(sat(3.0) == Approx(1.0));
        CHECK(sat.claims_monotone());
        CHECK(sat.claims_odd());
        CHECK(sat.slope_range().first == Approx(0.0));
        CHECK(sat.slope_range().second == Approx(1.0));
    }
    SECTION("identity extends with unit slope") {
        const StaticNonlinearity id = StaticNonlinearity::identity();
        CHECK(id(7.5) == Approx(7.5));
        CHECK(id(-3.0) == Approx(-3.0));
    }
    SECTION("monotone and odd flags come from the data") {
        CHECK_FALSE(negated_identity().claims_monotone());
        CHECK(negated_identity().claims_odd());
        CHECK(kinked_monotone().claims_monotone());
        CHECK_FALSE(kinked_monotone().claims_odd());
    }
    SECTION("must map zero to zero") {
        CHECK_THROWS_AS(StaticNonlinearity({-1.0, 1.0}, {0.5, 1.5}), std::invalid_argument);
    }
    SECTION("breakpoints must increase") {
        CHECK_THROWS_AS(StaticNonlinearity({1.0, -1.0}, {1.0, -1.0}), std::invalid_argument);
    }
}

TEST_CASE("apply") {
    const SignalTrace x(kTraceDt, {-2.0, 0.5, 3.0});
    SECTION("identity is a no-op") {
        const SignalTrace out = apply(StaticNonlinearity::identity(), x);
        for (std::size_t i = 0; i < x.samples.size(); ++i) CHECK(out.samples[i] == Approx(x.samples[i]));
    }
    SECTION("unit saturation clips") {
        const SignalTrace out = apply(StaticNonlinearity::saturation(), x);
        CHECK(out.samples[0] == Approx(-1.0));
        CHECK(out.samples[1] == Approx(0.5));
        CHECK(out.samples[2] == Approx(1.0));
    }
    SECTION("monotone maps preserve difference signs") {
        std::mt19937_64 rng(1);
        const StaticNonlinearity nl = random_monotone(rng);
        auto gen = detail::trial_rng(3, 0);
        const SignalTrace trace = detail::random_trace(gen, 2.0, 300);
        const SignalTrace out = apply(nl, trace);
        for (std::size_t i = 1; i < trace.samples.size(); ++i) {
            const double dx = trace.samples[i] - trace.samples[i - 1];
            const double dy = out.samples[i] - out.samples[i - 1];
            CHECK(dx * dy >= -1e-12);
        }
    }
}

TEST_CASE("iqc_inner_product") {
    const SlopeBand mono = SlopeBand::monotone();
    const MultiplierCandidate zero = MultiplierCandidate::zero(KernelBasis::mirrored_log_rates());

    SECTION("zero output gives zero") {
        const SignalTrace x(kTraceDt, {1.0, 2.0, 3.0});
        const SignalTrace y(kTraceDt, {0.0, 0.0, 0.0});
        CHECK(iqc_inner_product(x, y, zero, mono) == Approx(0.0));
    }
    SECTION("zero kernel on matched traces recovers the squared norm") {
        auto gen = detail::trial_rng(8, 0);
        const SignalTrace x = detail::random_trace(gen, 1.0, 500);
        const double ip = iqc_inner_product(x, x, zero, mono);
        CHECK(ip > 0.0);
        CHECK(ip == Approx(x.norm() * x.norm()).epsilon(0.01));
    }
    SECTION("length and step mismatches are rejected") {
        const SignalTrace x(kTraceDt, {1.0, 2.0});
        const SignalTrace y(kTraceDt, {1.0});
        CHECK_THROWS_AS(iqc_inner_product(x, y, zero, mono), LengthMismatch);
        const SignalTrace z(2 * kTraceDt, {1.0, 2.0});
        CHECK_THROWS_AS(iqc_inner_product(x, z, zero, mono), LengthMismatch);
    }
    SECTION("saturation against admissible kernels stays nonnegative") {
        const StaticNonlinearity sat = StaticNonlinearity::saturation();
        for (int t = 0; t < 20; ++t) {
            auto rng = detail::trial_rng(101, static_cast<std::uint64_t>(t));
            const SignalTrace x = detail::random_trace(rng, 2.0);
            const SignalTrace y = apply(sat, x);
            const MultiplierCandidate cand = detail::random_nonneg_candidate(rng);
            const double value = iqc_inner_product(x, y, cand, mono);
            CHECK(value >= -1e-6 * x.norm() * y.norm());
        }
    }
}

TEST_CASE("membership_test_static") {
    SECTION("saturation in the unit slope band") {
        const MembershipReport r = membership_test_static(StaticNonlinearity::saturation(), SlopeBand(0.0, 1.0), 5, 7);
        CHECK(r.member);
        CHECK(r.worst_iqc_margin > -1e-4);
    }
    SECTION("negated identity is not monotone-compatible") {
        const MembershipReport r = membership_test_static(negated_identity(), SlopeBand::monotone());
        CHECK_FALSE(r.member);
        REQUIRE(r.violation.has_value());
        CHECK(r.violation->quotient < 0.0);
    }
    SECTION("deadzone misses a positive lower slope") {
        const MembershipReport r = membership_test_static(deadzone_unit_slope(), SlopeBand(0.5, 2.0));
        CHECK_FALSE(r.member);
        REQUIRE(r.violation.has_value());
        CHECK(r.violation->quotient < 0.5);
    }
}

TEST_CASE("falsify_nonmonotone") {
    SECTION("negated identity yields a strictly positive shift gap at L = 50") {
        const FalsificationResult r = falsify_nonmonotone(negated_identity(), 50);
        CHECK(r.shifted_integral - r.unshifted_integral > 0.0);
        CHECK(r.trace.samples.size() == 102 * 100);
        // Closed-form block sums for the chosen pair.
        const StaticNonlinearity nl = negated_identity();
        const double ga = r.x1 * (nl(r.x2) - nl(r.x1));
        const double gb = r.x2 * (nl(r.x1) - nl(r.x2));
        const double expected_gap = 51.0 * ga + 50.0 * gb - r.x2 * nl(r.x2);
        CHECK(r.shifted_integral - r.unshifted_integral == Approx(expected_gap).margin(1e-9));
    }
    SECTION("monotone maps cannot be falsified") {
        CHECK_THROWS_AS(falsify_nonmonotone(StaticNonlinearity::saturation(), 10), NoDecreasingPair);
    }
    SECTION("threshold block count is reported and sharp") {
        // Shallow dip: the violation needs many repetitions to dominate.
        const StaticNonlinearity dip({-1.0, 1.0, 2.0}, {-1.0, 1.0, 0.9});
        const FalsificationResult probe = falsify_nonmonotone(dip, 0);
        REQUIRE(probe.min_l > 0);
        const FalsificationResult at = falsify_nonmonotone(dip, probe.min_l);
        CHECK(at.shifted_integral - at.unshifted_integral > 0.0);
        const FalsificationResult below = falsify_nonmonotone(dip, probe.min_l - 1);
        CHECK(below.shifted_integral - below.unshifted_integral <= 1e-12);
    }
    SECTION("every random non-monotone map is falsified within the block budget") {
        std::mt19937_64 rng(55);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < 25; ++t) {
            // Monotone ramp with one forced dip.
            std::vector<double> xs{-2.0, -1.0, 0.0, 1.0, 2.0};
            std::vector<double> ys(xs.size());
            ys[0] = -2.0;
            for (std::size_t i = 1; i < ys.size(); ++i) ys[i] = ys[i - 1] + unit(rng);
            const std::size_t dip_at = 1 + static_cast<std::size_t>(unit(rng) * 3.0);
            ys[dip_at] = ys[dip_at - 1] - (0.1 + unit(rng));
            // Anchor the value at x = 0 (index 2).
            const double shift = ys[2];
            for (double& v : ys) v -= shift;
            const StaticNonlinearity nl(xs, ys);
            if (nl.claims_monotone()) continue;
            const FalsificationResult r = falsify_nonmonotone(nl, 0);
            CHECK(r.min_l <= 10000);
            const FalsificationResult at_l = falsify_nonmonotone(nl, r.min_l);
            CHECK(at_l.shifted_integral - at_l.unshifted_integral > 0.0);
        }
    }
}

TEST_CASE("falsify_noneven_odd") {
    SECTION("monotone kink is rejected") {
        const OddFalsificationReport r = falsify_noneven_odd(kinked_monotone(), 50);
        CHECK(r.violation_found);
        CHECK(r.worst_margin < 0.0);
        // The witness trace reproduces the closed-form block sums.
        const StaticNonlinearity nl = kinked_monotone();
        const double pos = r.construction == "x1/-x2" ? r.x1 : r.x2;
        const double neg = r.construction == "x1/-x2" ? r.x2 : r.x1;
        const double t0 = 51.0 * (pos * nl(pos) - neg * nl(-neg));
        const double t1 = 51.0 * pos * nl(-neg) - 50.0 * neg * nl(pos);
        CHECK(r.unshifted_integral == Approx(t0).margin(1e-9));
        CHECK(r.shifted_integral == Approx(t1).margin(1e-9));
        CHECK(r.worst_margin <= t0 - std::abs(t1) + 1e-9);
    }
    SECTION("odd maps survive") {
        CHECK_FALSE(falsify_noneven_odd(StaticNonlinearity::identity(), 50).violation_found);
        CHECK_FALSE(falsify_noneven_odd(StaticNonlinearity::saturation(), 50).violation_found);
    }
    SECTION("non-monotone input is a precondition violation") {
        CHECK_THROWS_AS(falsify_noneven_odd(negated_identity(), 10), std::invalid_argument);
    }
}

TEST_CASE("lti_membership_test") {
    const FrequencyGrid grid = FrequencyGrid::standard(200);

    SECTION("nonnegative constants are members") {
        for (double c : {0.0, 0.5, 2.0}) {
            const LtiUncertainty u(RationalTF(Polynomial{c}, Polynomial{1.0}));
            const LtiMembershipReport r = lti_membership_test(u, grid);
            CHECK(r.member);
            CHECK(r.dc_value == Approx(c));
        }
    }
    SECTION("negative constants fail on the quarter-period branch") {
        const LtiUncertainty u(RationalTF(Polynomial{-1.0}, Polynomial{1.0}));
        const LtiMembershipReport r = lti_membership_test(u, grid);
        CHECK_FALSE(r.member);
        REQUIRE(r.witness.has_value());
        CHECK(r.witness->value < 0.0);
    }
    SECTION("first-order lag gets a tangent-branch witness") {
        const LtiUncertainty u(RationalTF(Polynomial{1.0}, Polynomial{1.0, 1.0}));
        const LtiMembershipReport r = lti_membership_test(u, grid);
        CHECK_FALSE(r.member);
        REQUIRE(r.witness.has_value());
        CHECK(r.witness->value < 0.0);
        const Complex d = u.tf.at(r.witness->omega);
        const double lhs = std::tan(r.witness->omega * r.witness->tau / 2.0);
        const double rhs = (d.real() + 1.0) / d.imag();
        CHECK(std::abs(lhs - rhs) < 1e-6 * (1.0 + std::abs(rhs)));
    }
    SECTION("battery: only nonnegative constants pass") {
        const std::vector<std::pair<RationalTF, bool>> battery = {
            {RationalTF(Polynomial{0.7}, Polynomial{1.0}), true},
            {RationalTF(Polynomial{-0.1}, Polynomial{1.0}), false},
            {RationalTF(Polynomial{1.0}, Polynomial{1.0, 1.0}), false},
            {RationalTF(Polynomial{2.0}, Polynomial{1.0, 3.0}), false},
            {RationalTF(Polynomial{1.0, 2.0}, Polynomial{1.0, 1.0}), false},
        };
        for (const auto& [tf, expect] : battery) {
            CHECK(lti_membership_test(LtiUncertainty(tf), grid).member == expect);
        }
    }
    SECTION("unstable or improper uncertainty is rejected at construction") {
        CHECK_THROWS_AS(LtiUncertainty(RationalTF(Polynomial{1.0}, Polynomial{1.0, -1.0})),
                        std::invalid_argument);
        CHECK_THROWS_AS(LtiUncertainty(RationalTF(Polynomial{1.0, 0.0, 0.0}, Polynomial{1.0, 1.0})),
                        std::invalid_argument);
    }
}

TEST_CASE("homotopy_sweep") {
    SECTION("saturation sweeps cleanly through the unit band") {
        const HomotopyReport r = homotopy_sweep(StaticNonlinearity::saturation(), SlopeBand(0.0, 1.0), 10);
        CHECK(r.all_passed);
        CHECK(r.steps == 11);
    }
    SECTION("positive lower slope keeps the blend inside the band") {
        const StaticNonlinearity ramp({-1.0, 1.0}, {-0.8, 0.8});
        const HomotopyReport r = homotopy_sweep(ramp, SlopeBand(0.5, 1.0), 8);
        CHECK(r.all_passed);
    }
    SECTION("non-members are rejected up front") {
        CHECK_THROWS_AS(homotopy_sweep(negated_identity(), SlopeBand::monotone(), 4), std::invalid_argument);
    }
}

TEST_CASE("loop transform maps slope members to monotone members") {
    std::mt19937_64 rng(2468);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const SlopeBand band(0.3, 2.0);
    for (int t = 0; t < 50; ++t) {
        // Random member with slopes strictly inside (a, b).
        std::vector<double> xs{-2.0, -1.0, 0.0, 0.7, 1.8};
        std::vector<double> ys(xs.size(), 0.0);
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double slope = band.a + 0.05 + (band.b - band.a - 0.1) * unit(rng);
            ys[i] = ys[i - 1] + slope * (xs[i] - xs[i - 1]);
        }
        const double shift = ys[2];
        for (double& v : ys) v -= shift;
        const StaticNonlinearity nl(xs, ys);
        REQUIRE(membership_test_static(nl, band).member);

        // Transformed coordinates: xbar = x - y/b, ybar = -a x + y.
        std::vector<double> xbar(xs.size()), ybar(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xbar[i] = xs[i] - ys[i] / band.b;
            ybar[i] = -band.a * xs[i] + ys[i];
        }
        const StaticNonlinearity transformed(xbar, ybar);
        CHECK(membership_test_static(transformed, SlopeBand::monotone()).member);

        // Members also survive the blend sweep toward the lower slope.
        if (t < 5) CHECK(homotopy_sweep(nl, band, 4).all_passed);
    }
}
