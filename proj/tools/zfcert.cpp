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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "zfcert/counterexample.hpp"
#include "zfcert/io.hpp"
#include "zfcert/lti.hpp"
#include "zfcert/multiplier.hpp"
#include "zfcert/search.hpp"
#include "zfcert/uncertainty.hpp"

namespace {

using namespace zfcert;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;  // infeasible at basis / non-member
constexpr int kExitVerificationFailed = 3;

std::size_t resolve_grid_points(const CLI::Option* opt, std::size_t from_flag) {
    if (opt->count() > 0) return from_flag;
    if (const char* env = std::getenv("ZF_CERTIFY_GRID_POINTS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 2) return static_cast<std::size_t>(v);
        std::cerr << "warning: ignoring invalid ZF_CERTIFY_GRID_POINTS value '" << env << "'\n";
    }
    return from_flag;
}

KernelBasis basis_for(std::size_t basis_size) {
    if (basis_size % 2 != 0) {
        throw std::runtime_error("--basis-size must be even (mirrored causal/anticausal pairs)");
    }
    return KernelBasis::mirrored_log_rates(basis_size / 2);
}

std::filesystem::path sibling_with_extension(std::filesystem::path p, const char* ext) {
    p.replace_extension(ext);
    return p;
}

struct CertifyConfig {
    std::string plant_path;
    double a = 0.0;
    double b = kInf;
    std::size_t basis_size = 20;
    std::string mode = "nonneg";
    std::size_t grid_points = kDefaultGridPoints;
    std::string out = "certificate.json";
    const CLI::Option* grid_opt = nullptr;
};

int run_certify(const CertifyConfig& cfg) {
    const RationalTF plant = load_plant(cfg.plant_path);
    const SlopeBand band(cfg.a, cfg.b);
    const std::size_t points = resolve_grid_points(cfg.grid_opt, cfg.grid_points);
    const CandidateMode mode = cfg.mode == "signed" ? CandidateMode::Signed : CandidateMode::Nonneg;

    const SearchProblem prob =
        SearchProblem::make(plant, band, basis_for(cfg.basis_size), mode, FrequencyGrid::standard(points));
    const Certificate cert = synthesize(prob);

    write_text_atomic(cfg.out, certificate_to_json(cert).dump(2) + "\n");
    const MultiplierCandidate cand =
        cert.candidate ? *cert.candidate : MultiplierCandidate::zero(prob.basis, mode);
    write_text_atomic(sibling_with_extension(cfg.out, ".csv"), constraint_csv(plant, cand, band, prob.grid));

    std::cout << "status: " << to_string(cert.status) << "  epsilon: " << cert.epsilon
              << "  verified: " << cert.verified_epsilon;
    if (cert.gain_bound) std::cout << "  gain_bound: " << *cert.gain_bound;
    std::cout << "\nwrote " << cfg.out << "\n";

    switch (cert.status) {
        case CertStatus::Feasible: return kExitOk;
        case CertStatus::InfeasibleAtBasis: return kExitNegative;
        case CertStatus::VerificationFailed: return kExitVerificationFailed;
    }
    return kExitError;
}

struct CounterexampleConfig {
    std::string name = "oshea-monotone";
    double xi = 0.25;
    double eps = 1e-3;
    double a = 0.5;
    double b = 2.0;
    std::size_t basis_size = 40;
    std::size_t grid_points = kDefaultGridPoints;
    std::string out = "gap_report.json";
    const CLI::Option* grid_opt = nullptr;
};

int run_counterexample(const CounterexampleConfig& cfg) {
    const std::size_t points = resolve_grid_points(cfg.grid_opt, cfg.grid_points);
    SlopeBand band = SlopeBand::monotone();
    if (cfg.name == "oshea-slope") {
        band = SlopeBand(cfg.a, cfg.b);
        if (!(cfg.a > 0.0)) throw ParameterOutOfRange("oshea-slope requires 0 < a < b");
    } else if (cfg.name != "oshea-monotone") {
        throw std::runtime_error("unknown counterexample name: " + cfg.name);
    }
    // The LP ladder runs on a reduced grid; dropping rows relaxes the LP, so
    // nonpositive optima remain valid evidence for any finer grid.
    const FrequencyGrid grid = FrequencyGrid::standard(points);
    const FrequencyGrid ladder_grid = FrequencyGrid::standard(std::max<std::size_t>(120, points / 8));
    const GapReport report = run_gap_analysis(cfg.xi, cfg.eps, band, grid, ladder_grid, cfg.basis_size);

    write_text_atomic(cfg.out, gap_report_to_json(report).dump(2) + "\n");
    std::cout << "plant in RH-infinity: " << (report.plant_in_rh_inf ? "yes" : "no")
              << "\nclearance of [1/b, 1/a]: " << report.clearance
              << "\nloop-transform identity residual: " << report.identity_residual << "\nladder:";
    for (const auto& [size, opt] : report.ladder) std::cout << " (" << size << ", " << opt << ")";
    std::cout << "\nverdict: " << report.verdict << "\nwrote " << cfg.out << "\n";
    return kExitOk;
}

struct NyquistConfig {
    std::string plant_path;
    double a = 0.0;
    double b = kInf;
    std::size_t grid_points = kDefaultGridPoints;
    std::string out = "nyquist.svg";
    const CLI::Option* grid_opt = nullptr;
};

int run_nyquist(const NyquistConfig& cfg) {
    const RationalTF plant = load_plant(cfg.plant_path);
    const SlopeBand band(cfg.a, cfg.b);
    const std::size_t points = resolve_grid_points(cfg.grid_opt, cfg.grid_points);
    const FrequencyGrid grid = FrequencyGrid::standard(points);
    const double lo = band.b_inv();
    const double hi = band.a > 0.0 ? 1.0 / band.a : kInf;
    const double clearance = interval_clearance(plant, grid, lo, hi);

    write_text_atomic(cfg.out, nyquist_svg(plant, grid, lo, hi, clearance));
    write_text_atomic(sibling_with_extension(cfg.out, ".csv"), nyquist_csv(plant, grid));
    std::cout << "clearance: " << clearance << (clearance > 0.0 ? "" : "  INTERSECTS") << "\nwrote " << cfg.out
              << "\n";
    return kExitOk;
}

struct IqcTestConfig {
    std::string nl_path;
    std::string lti_path;
    double a = 0.0;
    double b = kInf;
    bool odd = false;
    int trials = 20;
    std::uint64_t seed = 0;
    long blocks = 50;
    std::size_t grid_points = kDefaultGridPoints;
    std::string out = "iqc_report.json";
    const CLI::Option* grid_opt = nullptr;
};

int run_iqc_test(const IqcTestConfig& cfg) {
    if (cfg.nl_path.empty() == cfg.lti_path.empty()) {
        throw std::runtime_error("iqc-test needs exactly one of --nl or --lti");
    }
    Json out;
    bool member = false;

    if (!cfg.lti_path.empty()) {
        const LtiUncertainty u(load_plant(cfg.lti_path));
        const std::size_t points = resolve_grid_points(cfg.grid_opt, cfg.grid_points);
        const LtiMembershipReport report = lti_membership_test(u, FrequencyGrid::standard(points));
        member = report.member;
        out["kind"] = "lti";
        out["report"] = lti_report_to_json(report);
    } else {
        const StaticNonlinearity nl = nonlinearity_from_json(Json::parse(read_text(cfg.nl_path)));
        const SlopeBand band(cfg.a, cfg.b);
        const MembershipReport report = membership_test_static(nl, band, cfg.trials, cfg.seed);
        member = report.member;
        out["kind"] = "static";
        out["report"] = membership_report_to_json(report);
        if (!report.member && !nl.claims_monotone()) {
            out["falsification"] = falsification_to_json(falsify_nonmonotone(nl, cfg.blocks));
        }
        if (cfg.odd && nl.claims_monotone()) {
            const OddFalsificationReport odd_report = falsify_noneven_odd(nl, cfg.blocks);
            out["odd_falsification"] = odd_falsification_to_json(odd_report);
            if (odd_report.violation_found) member = false;
        }
    }
    out["verdict"] = member ? "member" : "non-member";
    write_text_atomic(cfg.out, out.dump(2) + "\n");
    std::cout << "verdict: " << (member ? "member" : "non-member") << "\nwrote " << cfg.out << "\n";
    return member ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Feedback-stability certification against monotone, odd, and slope-restricted\n"
        "uncertainty via multiplier synthesis over a finite kernel basis.\n"
        "Defaults: frequency grid = 2000 log points on [1e-3, 1e3] rad/s plus omega = 0\n"
        "and the feedthrough limit (override with --grid-points or ZF_CERTIFY_GRID_POINTS);\n"
        "basis = 20 mirrored exponential kernels with log-spaced rates on [1e-2, 1e2].\n"
        "Certificate CSV columns: omega, re_g, im_g, condition_value.\n"
        "Nyquist CSV columns: omega, re, im."};
    app.require_subcommand(1);

    CertifyConfig certify;
    auto* cmd_certify = app.add_subcommand(
        "certify", "Search for a multiplier certifying feedback stability; writes certificate JSON + CSV");
    cmd_certify->add_option("--plant", certify.plant_path, "plant JSON file {\"num\": [...], \"den\": [...]}")
        ->required();
    cmd_certify->add_option("--a", certify.a, "lower slope bound (default 0)");
    cmd_certify->add_option("--b", certify.b, "upper slope bound (default infinity)");
    cmd_certify->add_option("--basis-size", certify.basis_size, "kernel basis size, even (default 20)");
    cmd_certify->add_option("--mode", certify.mode, "kernel sign mode: nonneg | signed")
        ->check(CLI::IsMember({"nonneg", "signed"}));
    certify.grid_opt = cmd_certify->add_option("--grid-points", certify.grid_points,
                                               "log-grid point count (default 2000 or ZF_CERTIFY_GRID_POINTS)");
    cmd_certify->add_option("--out", certify.out, "certificate output path (default certificate.json)");

    CounterexampleConfig cx;
    auto* cmd_cx = app.add_subcommand("counterexample",
                                      "Reproduce the stability-without-multiplier gap construction");
    cmd_cx->add_option("name", cx.name, "oshea-monotone | oshea-slope")->required();
    cmd_cx->add_option("--xi", cx.xi, "damping parameter in (0, 0.25] (default 0.25)");
    cmd_cx->add_option("--eps", cx.eps, "plant shift, small positive (default 1e-3)");
    cmd_cx->add_option("--a", cx.a, "lower slope bound for oshea-slope (default 0.5)");
    cmd_cx->add_option("--b", cx.b, "upper slope bound for oshea-slope (default 2)");
    cmd_cx->add_option("--basis-size", cx.basis_size, "largest ladder basis size (default 40)");
    cx.grid_opt = cmd_cx->add_option("--grid-points", cx.grid_points, "log-grid point count for the checks");
    cmd_cx->add_option("--out", cx.out, "report output path (default gap_report.json)");

    NyquistConfig nyq;
    auto* cmd_nyq = app.add_subcommand("nyquist", "Emit the Nyquist curve SVG + CSV with interval clearance");
    cmd_nyq->add_option("--plant", nyq.plant_path, "plant JSON file")->required();
    cmd_nyq->add_option("--a", nyq.a, "lower slope bound; interval is [1/b, 1/a] (default 0)");
    cmd_nyq->add_option("--b", nyq.b, "upper slope bound (default infinity)");
    nyq.grid_opt = cmd_nyq->add_option("--grid-points", nyq.grid_points, "log-grid point count");
    cmd_nyq->add_option("--out", nyq.out, "SVG output path (default nyquist.svg; CSV written alongside)");

    IqcTestConfig iqc;
    auto* cmd_iqc = app.add_subcommand("iqc-test", "Class membership tests for static or LTI uncertainty");
    cmd_iqc->add_option("--nl", iqc.nl_path, "static nonlinearity JSON {\"breakpoints\": [...], \"values\": [...]}");
    cmd_iqc->add_option("--lti", iqc.lti_path, "LTI uncertainty as a plant JSON file");
    cmd_iqc->add_option("--a", iqc.a, "lower slope bound (default 0)");
    cmd_iqc->add_option("--b", iqc.b, "upper slope bound (default infinity)");
    cmd_iqc->add_flag("--odd", iqc.odd, "additionally require odd symmetry (static maps)");
    cmd_iqc->add_option("--trials", iqc.trials, "randomized inner-product spot checks (default 20)");
    cmd_iqc->add_option("--seed", iqc.seed, "seed for the randomized spot checks (default 0)");
    cmd_iqc->add_option("--blocks", iqc.blocks, "block count L for falsification signals (default 50)");
    iqc.grid_opt = cmd_iqc->add_option("--grid-points", iqc.grid_points, "log-grid point count for LTI tests");
    cmd_iqc->add_option("--out", iqc.out, "report output path (default iqc_report.json)");

    try {
        app.parse(argc, argv);
        if (cmd_certify->parsed()) return run_certify(certify);
        if (cmd_cx->parsed()) return run_counterexample(cx);
        if (cmd_nyq->parsed()) return run_nyquist(nyq);
        if (cmd_iqc->parsed()) return run_iqc_test(iqc);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
