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

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zfcert/lti.hpp"
#include "zfcert/multiplier.hpp"
#include "zfcert/search.hpp"

namespace zfcert {

struct ParameterOutOfRange : std::runtime_error {
    explicit ParameterOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void check_xi_eps(double xi, double eps) {
    if (!(xi > 0.0) || xi > 0.25) {
        throw ParameterOutOfRange("oshea plant: xi must lie in (0, 0.25]");
    }
    if (!(eps > 0.0) || eps >= 1.0) {
        throw ParameterOutOfRange("oshea plant: eps must be a small positive number");
    }
}

inline Polynomial oshea_denominator(double xi) {
    const Polynomial base{1.0, 2.0 * xi, 1.0};
    return base * base;  // (s^2 + 2 xi s + 1)^2
}

}  // namespace detail

/**
 * Plant whose Nyquist curve clears the nonnegative real axis although no
 * admissible multiplier kernel exists:
 *     G = -s^2/(s^2 + 2 xi s + 1)^2 - eps.
 */
inline RationalTF oshea_monotone_plant(double xi, double eps) {
    detail::check_xi_eps(xi, eps);
    const Polynomial den = detail::oshea_denominator(xi);
    const Polynomial s2{1.0, 0.0, 0.0};
    return RationalTF(-s2 - eps * den, den);
}

/**
 * Slope-band analogue for 0 < a < b:
 *     G = ((1/b - eps) D - (1/a) xi^2 s^2) / ((1 - a eps) D - xi^2 s^2),
 * with D = (s^2 + 2 xi s + 1)^2. Satisfies
 *     (G - 1/b)(a G - 1)^{-1} = (1/a) xi^2 s^2 / D + eps.
 */
inline RationalTF oshea_slope_plant(double xi, double eps, double a, double b) {
    detail::check_xi_eps(xi, eps);
    if (!(a > 0.0) || !(b > a) || !std::isfinite(b)) {
        throw ParameterOutOfRange("oshea slope plant: requires 0 < a < b < infinity");
    }
    const Polynomial d = detail::oshea_denominator(xi);
    const Polynomial n{xi * xi, 0.0, 0.0};
    return RationalTF((1.0 / b - eps) * d - (1.0 / a) * n, (1.0 - a * eps) * d - n);
}

/**
 * Largest grid deviation between the loop-transformed plant
 * (G - 1/b)(a G - 1)^{-1} and its closed-form target
 * kappa * s^2 / (s^2 + 2 xi s + 1)^2 + eps, where kappa is 1 for the
 * monotone construction and xi^2/a for the slope construction.
 */
inline double oshea_identity_residual(const RationalTF& g, double xi, double eps, const SlopeBand& band,
                                      const FrequencyGrid& grid) {
    const Polynomial d = detail::oshea_denominator(xi);
    const double kappa = band.a > 0.0 ? xi * xi / band.a : 1.0;
    const RationalTF target(Polynomial{kappa, 0.0, 0.0} + eps * d, d);
    double worst = 0.0;
    for (double w : grid.omegas) {
        const Complex gv = g.at(w);
        const Complex lhs = (gv - band.b_inv()) / (band.a * gv - 1.0);
        worst = std::max(worst, std::abs(lhs - target.at(w)));
    }
    return worst;
}

struct GapReport {
    RationalTF plant;
    SlopeBand band;
    bool plant_in_rh_inf = false;
    bool gain_loop_stable = false;  // loop closed around the lower slope a
    double clearance = 0.0;         // Nyquist distance to [1/b, 1/a]
    double identity_residual = 0.0;
    std::vector<std::pair<std::size_t, double>> ladder;
    bool uniformly_stable_over_constants = false;
    bool multiplier_found = false;
    std::string verdict;
};

/**
 * Full gap pipeline: construct the plant, check RH-infinity membership and
 * Nyquist clearance of the critical interval, validate the loop-transform
 * identity, then sweep the LP over growing bases. A clear interval with an
 * all-nonpositive ladder exhibits robust stability over constant gains
 * without any finite-basis multiplier.
 */
inline GapReport run_gap_analysis(double xi, double eps, const SlopeBand& band, const FrequencyGrid& grid,
                                  const FrequencyGrid& ladder_grid, std::size_t max_basis) {
    GapReport report;
    report.band = band;
    report.plant = band.a > 0.0 ? oshea_slope_plant(xi, eps, band.a, band.b) : oshea_monotone_plant(xi, eps);
    report.plant_in_rh_inf = in_rh_inf(report.plant);
    report.gain_loop_stable = band.a > 0.0 ? constant_gain_loop_stable(report.plant, band.a) : true;
    const double hi = band.a > 0.0 ? 1.0 / band.a : kInf;
    report.clearance = interval_clearance(report.plant, grid, band.b_inv(), hi);
    report.identity_residual = oshea_identity_residual(report.plant, xi, eps, band, grid);

    SearchProblem prob = SearchProblem::make(report.plant, band, KernelBasis{}, CandidateMode::Signed,
                                             ladder_grid, /*verify_factor=*/1);
    report.ladder = infeasibility_report(prob, max_basis);

    report.uniformly_stable_over_constants =
        report.plant_in_rh_inf && report.gain_loop_stable && report.clearance > 0.0;
    report.multiplier_found = false;
    for (const auto& [size, optimum] : report.ladder) {
        if (optimum > 0.0) report.multiplier_found = true;
    }
    if (report.uniformly_stable_over_constants && !report.multiplier_found) {
        report.verdict =
            "uniformly stable over the constant-gain class at grid resolution, yet no finite-basis "
            "multiplier found";
    } else if (report.multiplier_found) {
        report.verdict = "a finite-basis multiplier exists; no gap exhibited for these parameters";
    } else {
        report.verdict = "constant-gain stability could not be certified at grid resolution";
    }
    return report;
}

}  // namespace zfcert
