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
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zfcert/lti.hpp"
#include "zfcert/multiplier.hpp"
#include "zfcert/simplex.hpp"

namespace zfcert {

struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};
struct PreconditionViolation : std::runtime_error {
    explicit PreconditionViolation(const std::string& what) : std::runtime_error(what) {}
};
struct NonpositiveMargin : std::runtime_error {
    explicit NonpositiveMargin(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Stability of the loop closed around a constant gain, under the positive
 * feedback convention: the characteristic polynomial is den - gain * num.
 * This is the convention under which a constant gain in [a, b] destabilizes
 * exactly when the Nyquist curve meets [1/b, 1/a].
 */
inline bool constant_gain_loop_stable(const RationalTF& g, double gain) {
    const Polynomial chi = g.den() - gain * g.num();
    if (chi.is_zero()) return false;
    return is_hurwitz(chi);
}

struct SearchProblem {
    RationalTF plant;
    SlopeBand band;
    KernelBasis basis;
    CandidateMode mode = CandidateMode::Nonneg;
    FrequencyGrid grid;
    FrequencyGrid verify_grid;

    static SearchProblem make(RationalTF plant, SlopeBand band, KernelBasis basis, CandidateMode mode,
                              FrequencyGrid grid, int verify_factor = 10) {
        SearchProblem p;
        p.plant = std::move(plant);
        p.band = band;
        p.basis = std::move(basis);
        p.mode = mode;
        p.verify_grid = grid.refined(verify_factor);
        p.grid = std::move(grid);
        p.validate();
        return p;
    }

    void validate() const {
        if (!in_rh_inf(plant)) {
            throw PreconditionViolation("SearchProblem: plant must be in RH-infinity");
        }
        if (band.a > 0.0 && !constant_gain_loop_stable(plant, band.a)) {
            throw PreconditionViolation("SearchProblem: the loop closed around the lower slope a is unstable");
        }
        if (verify_grid.omegas.size() < grid.omegas.size()) {
            throw std::invalid_argument("SearchProblem: verify grid must refine the search grid");
        }
    }
};

enum class CertStatus { Feasible, InfeasibleAtBasis, VerificationFailed };

inline const char* to_string(CertStatus s) {
    switch (s) {
        case CertStatus::Feasible: return "feasible";
        case CertStatus::InfeasibleAtBasis: return "infeasible_at_basis";
        case CertStatus::VerificationFailed: return "verification_failed";
    }
    return "unknown";
}

struct Certificate {
    CertStatus status = CertStatus::InfeasibleAtBasis;
    std::optional<MultiplierCandidate> candidate;
    // Margin on the search grid; for InfeasibleAtBasis this is the LP optimum
    // (nonpositive).
    double epsilon = 0.0;
    double verified_epsilon = 0.0;
    std::optional<double> gain_bound;

    struct Provenance {
        std::size_t search_grid_points = 0;
        std::size_t verify_grid_points = 0;
        std::size_t basis_size = 0;
        std::string mode;
        long solver_iterations = 0;
        double lp_optimum = 0.0;
    } provenance;
    std::vector<std::string> caveats;
};

namespace detail {

struct LpOutcome {
    double optimum = 0.0;
    MultiplierCandidate candidate;
    long iterations = 0;
};

/**
 * LP over (cpos, cneg, eps): maximize eps subject to
 *   sum_k (cpos_k - cneg_k) Re{F_k(jw) K(jw)} + eps <= Re{K(jw)}  per grid row,
 *   sum(cpos) + sum(cneg) <= 1,  coefficients >= 0,
 * where K = (G - 1/b)(a conj(G) - 1). eps is free and enters split in two
 * nonnegative parts.
 */
inline LpOutcome solve_margin_lp(const SearchProblem& prob) {
    const std::size_t basis_n = prob.basis.size();
    const bool with_neg = prob.mode == CandidateMode::Signed;
    const std::size_t ncoef = with_neg ? 2 * basis_n : basis_n;
    const std::size_t nvar = ncoef + 2;  // + eps_plus, eps_minus
    const std::size_t eps_plus = ncoef;
    const std::size_t eps_minus = ncoef + 1;

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    rows.reserve(prob.grid.omegas.size() + 2);
    rhs.reserve(prob.grid.omegas.size() + 2);

    for (double w : prob.grid.omegas) {
        const Complex g = prob.plant.at(w);
        const Complex k = (g - prob.band.b_inv()) * (prob.band.a * std::conj(g) - 1.0);
        std::vector<double> row(nvar, 0.0);
        for (std::size_t j = 0; j < basis_n; ++j) {
            const double coef = (prob.basis.elements[j].ft(w) * k).real();
            row[j] = coef;
            if (with_neg) row[basis_n + j] = -coef;
        }
        row[eps_plus] = 1.0;
        row[eps_minus] = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back((k).real());
    }
    if (prob.grid.include_infinity) {
        // Z vanishes at infinity, so only eps is constrained there.
        std::vector<double> row(nvar, 0.0);
        row[eps_plus] = 1.0;
        row[eps_minus] = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back(condition_value_at_infinity(prob.plant, prob.band));
    }
    {
        std::vector<double> budget(nvar, 0.0);
        for (std::size_t j = 0; j < ncoef; ++j) budget[j] = 1.0;
        rows.push_back(std::move(budget));
        rhs.push_back(1.0);
    }

    std::vector<double> objective(nvar, 0.0);
    objective[eps_plus] = 1.0;
    objective[eps_minus] = -1.0;

    const SimplexResult lp = simplex_maximize(rows, rhs, objective);
    if (lp.status != SimplexResult::Status::Optimal) {
        throw SolverFailure(std::string("margin LP did not reach optimality (") +
                            (lp.status == SimplexResult::Status::Infeasible      ? "phase-1 failure"
                             : lp.status == SimplexResult::Status::Unbounded     ? "unbounded"
                                                                                 : "iteration limit") +
                            ")");
    }

    LpOutcome out;
    out.iterations = lp.iterations;
    out.optimum = lp.x[eps_plus] - lp.x[eps_minus];
    out.candidate = MultiplierCandidate::zero(prob.basis, prob.mode);
    for (std::size_t j = 0; j < basis_n; ++j) {
        out.candidate.coeff_pos[j] = std::max(0.0, lp.x[j]);
        if (with_neg) out.candidate.coeff_neg[j] = std::max(0.0, lp.x[basis_n + j]);
    }
    // Guard the budget invariant against simplex roundoff.
    const double budget = out.candidate.l1_budget();
    if (budget > 1.0) {
        const double scale = 1.0 / budget;
        for (double& v : out.candidate.coeff_pos) v *= scale;
        for (double& v : out.candidate.coeff_neg) v *= scale;
    }
    return out;
}

inline std::vector<std::string> standard_caveats(const SearchProblem& prob, CertStatus status) {
    std::vector<std::string> caveats;
    caveats.push_back("frequency-domain conditions are certified at grid resolution only");
    if (status == CertStatus::InfeasibleAtBasis) {
        caveats.push_back(
            "infeasible_at_basis refers to the finite kernel basis searched; it is not a proof "
            "that no admissible multiplier exists");
    }
    if (prob.mode == CandidateMode::Signed) {
        caveats.push_back(
            "signed mode bounds the kernel L1 norm by the sum of coefficient magnitudes, which is "
            "conservative; a failed signed search is evidence, not proof, of infeasibility");
    }
    caveats.push_back("basis completeness at finite truncation is not certified");
    return caveats;
}

}  // namespace detail

/**
 * Re-verify a feasible certificate on the dense grid, plus a local
 * refinement around the minimizing frequency. Downgrades the certificate
 * when the dense-grid margin drops below half of the search-grid margin.
 */
inline Certificate verify(Certificate cert, const SearchProblem& prob) {
    if (cert.status != CertStatus::Feasible || !cert.candidate.has_value()) return cert;
    const MultiplierCandidate& cand = *cert.candidate;

    double margin = kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < prob.verify_grid.omegas.size(); ++i) {
        const double v = condition_value(prob.plant, cand, prob.band, prob.verify_grid.omegas[i]);
        if (v < margin) {
            margin = v;
            arg = i;
        }
    }
    if (prob.verify_grid.include_infinity) {
        margin = std::min(margin, condition_value_at_infinity(prob.plant, prob.band));
    }
    // 10x local refinement around the minimizer.
    if (!prob.verify_grid.omegas.empty()) {
        const auto& w = prob.verify_grid.omegas;
        const double lo = w[arg > 0 ? arg - 1 : arg];
        const double hi = w[arg + 1 < w.size() ? arg + 1 : arg];
        for (int k = 1; k < 20; ++k) {
            const double omega = lo + (hi - lo) * static_cast<double>(k) / 20.0;
            margin = std::min(margin, condition_value(prob.plant, cand, prob.band, omega));
        }
    }

    cert.verified_epsilon = margin;
    if (margin < cert.epsilon / 2.0) {
        cert.status = CertStatus::VerificationFailed;
        cert.gain_bound.reset();
    }
    return cert;
}

/**
 * Uniform closed-loop gain bound implied by a frequency-domain margin eps.
 * The chain below follows from the two graph inequalities
 *     <v2, Pi v2> >= 0           on the uncertainty graph,
 *     <v1, Pi v1> <= -eps_hat ||v1||^2  on the plant graph,
 * with eps_hat = 2 eps / (1 + ||G||_inf^2):
 *     eps_hat ||v1||^2 <= ||Pi|| ||v2-v1||^2 + 2 ||Pi|| ||v2-v1|| ||v1||
 *                      <= (||Pi|| + 2||Pi||^2/eps_hat) ||v2-v1||^2 + (eps_hat/2) ||v1||^2,
 * so ||v1||^2 <= C ||v2-v1||^2 with C = 2(||Pi|| + 2||Pi||^2/eps_hat)/eps_hat,
 * and with ||v2||^2 <= 2||v2-v1||^2 + 2||v1||^2 the loop signals obey
 *     gamma (||v1||^2 + ||v2||^2) <= ||v2-v1||^2,  gamma = 1/(3C + 2).
 * The closed-loop map is then bounded by 1/sqrt(gamma).
 */
inline double gain_bound(double epsilon, const RationalTF& plant, const MultiplierCandidate& cand,
                         const SlopeBand& band = SlopeBand::monotone(),
                         const FrequencyGrid& grid = FrequencyGrid::standard()) {
    if (!(epsilon > 0.0)) throw NonpositiveMargin("gain_bound: margin must be positive");
    const double hinf = hinf_norm_estimate(plant, grid);
    const double eps_hat = 2.0 * epsilon / (1.0 + hinf * hinf);
    const PiMatrix pi = band.b_finite() ? build_pi_slope(cand, band) : build_pi_monotone(cand);
    const double pi_norm = pi.sup_norm(grid);
    const double c = 2.0 * (pi_norm + 2.0 * pi_norm * pi_norm / eps_hat) / eps_hat;
    const double gamma = 1.0 / (3.0 * c + 2.0);
    return 1.0 / std::sqrt(gamma);
}

/**
 * LP synthesis of a multiplier maximizing the grid margin, followed by
 * dense-grid re-verification and the uniform gain bound when feasible.
 */
inline Certificate synthesize(const SearchProblem& prob) {
    prob.validate();
    const detail::LpOutcome lp = detail::solve_margin_lp(prob);

    Certificate cert;
    cert.provenance.search_grid_points = prob.grid.omegas.size() + (prob.grid.include_infinity ? 1 : 0);
    cert.provenance.verify_grid_points =
        prob.verify_grid.omegas.size() + (prob.verify_grid.include_infinity ? 1 : 0);
    cert.provenance.basis_size = prob.basis.size();
    cert.provenance.mode = prob.mode == CandidateMode::Signed ? "signed" : "nonneg";
    cert.provenance.solver_iterations = lp.iterations;
    cert.provenance.lp_optimum = lp.optimum;

    // The certified quantity is the recomputed margin of the clipped
    // candidate, not the raw LP objective.
    const double margin =
        lp.optimum > 0.0 ? condition_margin(prob.plant, lp.candidate, prob.band, prob.grid) : lp.optimum;
    if (margin <= 0.0) {
        cert.status = CertStatus::InfeasibleAtBasis;
        cert.epsilon = std::min(margin, lp.optimum);
        cert.verified_epsilon = cert.epsilon;
        cert.caveats = detail::standard_caveats(prob, cert.status);
        return cert;
    }

    cert.status = CertStatus::Feasible;
    cert.candidate = lp.candidate;
    cert.epsilon = margin;
    cert = verify(std::move(cert), prob);
    if (cert.status == CertStatus::Feasible && cert.verified_epsilon > 0.0) {
        cert.gain_bound = gain_bound(std::min(cert.epsilon, cert.verified_epsilon), prob.plant, lp.candidate,
                                     prob.band, prob.verify_grid);
    }
    cert.caveats = detail::standard_caveats(prob, cert.status);
    return cert;
}

/**
 * LP optima for growing, prefix-nested bases (sizes 0, 2, 4, ..., max_basis).
 * By feasible-set nesting the sequence is nondecreasing; all-nonpositive
 * optima are finite-basis evidence against the existence of a multiplier.
 */
inline std::vector<std::pair<std::size_t, double>> infeasibility_report(const SearchProblem& prob,
                                                                        std::size_t max_basis) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t size = 0; size <= max_basis; size += 2) {
        SearchProblem sub = prob;
        sub.basis = KernelBasis::ladder(size, std::max<std::size_t>(10, max_basis / 2));
        const detail::LpOutcome lp = detail::solve_margin_lp(sub);
        out.emplace_back(size, lp.optimum);
    }
    return out;
}

}  // namespace zfcert
