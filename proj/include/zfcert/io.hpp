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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "zfcert/counterexample.hpp"
#include "zfcert/lti.hpp"
#include "zfcert/multiplier.hpp"
#include "zfcert/search.hpp"
#include "zfcert/uncertainty.hpp"

namespace zfcert {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

/// Write-then-rename so readers never observe a partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Plant files: {"num": [...], "den": [...]} in descending powers of s.

inline RationalTF plant_from_json(const Json& j) {
    if (!j.contains("num") || !j.contains("den")) {
        throw std::runtime_error("plant file must contain \"num\" and \"den\" coefficient arrays");
    }
    const RationalTF tf(Polynomial(j.at("num").get<std::vector<double>>()),
                        Polynomial(j.at("den").get<std::vector<double>>()));
    if (!tf.proper()) {
        throw std::runtime_error("plant rejected: improper (numerator degree exceeds denominator degree)");
    }
    if (!is_hurwitz(tf.den())) {
        throw std::runtime_error("plant rejected: denominator is not Hurwitz (pole in the closed right half plane)");
    }
    return tf;
}

inline RationalTF load_plant(const std::filesystem::path& path) {
    return plant_from_json(Json::parse(read_text(path)));
}

inline Json plant_to_json(const RationalTF& tf) {
    return Json{{"num", tf.num().coeffs()}, {"den", tf.den().coeffs()}};
}

// ---------------------------------------------------------------------------
// Multiplier candidates.

inline Json candidate_to_json(const MultiplierCandidate& cand) {
    Json j;
    j["mode"] = cand.mode == CandidateMode::Signed ? "signed" : "nonneg";
    std::vector<double> rates;
    std::vector<std::string> sides;
    for (const KernelElement& el : cand.basis.elements) {
        rates.push_back(el.rate);
        sides.push_back(el.side == KernelSide::Causal ? "causal" : "anticausal");
    }
    j["rates"] = rates;
    j["sides"] = sides;
    j["cpos"] = cand.coeff_pos;
    j["cneg"] = cand.coeff_neg;
    return j;
}

inline MultiplierCandidate candidate_from_json(const Json& j) {
    MultiplierCandidate cand;
    cand.mode = j.at("mode").get<std::string>() == "signed" ? CandidateMode::Signed : CandidateMode::Nonneg;
    const auto rates = j.at("rates").get<std::vector<double>>();
    const auto sides = j.at("sides").get<std::vector<std::string>>();
    if (rates.size() != sides.size()) throw std::runtime_error("candidate: rates/sides length mismatch");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        cand.basis.elements.push_back(
            {rates[i], sides[i] == "causal" ? KernelSide::Causal : KernelSide::Anticausal});
    }
    cand.coeff_pos = j.at("cpos").get<std::vector<double>>();
    cand.coeff_neg = j.at("cneg").get<std::vector<double>>();
    cand.validate();
    return cand;
}

// ---------------------------------------------------------------------------
// Certificates.

inline Json certificate_to_json(const Certificate& cert) {
    Json j;
    j["status"] = to_string(cert.status);
    j["epsilon"] = cert.epsilon;
    j["verified_epsilon"] = cert.verified_epsilon;
    if (cert.gain_bound) {
        j["gain_bound"] = *cert.gain_bound;
    } else {
        j["gain_bound"] = nullptr;
    }
    if (cert.candidate) {
        j["candidate"] = candidate_to_json(*cert.candidate);
    } else {
        j["candidate"] = nullptr;
    }
    j["provenance"] = Json{{"search_grid_points", cert.provenance.search_grid_points},
                           {"verify_grid_points", cert.provenance.verify_grid_points},
                           {"basis_size", cert.provenance.basis_size},
                           {"mode", cert.provenance.mode},
                           {"solver_iterations", cert.provenance.solver_iterations},
                           {"lp_optimum", cert.provenance.lp_optimum}};
    j["caveats"] = cert.caveats;
    return j;
}

inline Certificate certificate_from_json(const Json& j) {
    Certificate cert;
    const std::string status = j.at("status").get<std::string>();
    if (status == "feasible") {
        cert.status = CertStatus::Feasible;
    } else if (status == "infeasible_at_basis") {
        cert.status = CertStatus::InfeasibleAtBasis;
    } else if (status == "verification_failed") {
        cert.status = CertStatus::VerificationFailed;
    } else {
        throw std::runtime_error("certificate: unknown status " + status);
    }
    cert.epsilon = j.at("epsilon").get<double>();
    cert.verified_epsilon = j.at("verified_epsilon").get<double>();
    if (!j.at("gain_bound").is_null()) cert.gain_bound = j.at("gain_bound").get<double>();
    if (!j.at("candidate").is_null()) cert.candidate = candidate_from_json(j.at("candidate"));
    const Json& p = j.at("provenance");
    cert.provenance.search_grid_points = p.at("search_grid_points").get<std::size_t>();
    cert.provenance.verify_grid_points = p.at("verify_grid_points").get<std::size_t>();
    cert.provenance.basis_size = p.at("basis_size").get<std::size_t>();
    cert.provenance.mode = p.at("mode").get<std::string>();
    cert.provenance.solver_iterations = p.at("solver_iterations").get<long>();
    cert.provenance.lp_optimum = p.at("lp_optimum").get<double>();
    cert.caveats = j.at("caveats").get<std::vector<std::string>>();
    return cert;
}

// ---------------------------------------------------------------------------
// Static nonlinearities and class reports.

inline StaticNonlinearity nonlinearity_from_json(const Json& j) {
    return StaticNonlinearity(j.at("breakpoints").get<std::vector<double>>(),
                              j.at("values").get<std::vector<double>>());
}

inline Json membership_report_to_json(const MembershipReport& r) {
    Json j;
    j["verdict"] = r.member ? "member" : "non-member";
    j["slope_min"] = r.slope_min;
    j["slope_max"] = r.slope_max;
    if (r.violation) {
        j["violation"] = Json{{"x1", r.violation->x1}, {"x2", r.violation->x2}, {"quotient", r.violation->quotient}};
    } else {
        j["violation"] = nullptr;
    }
    j["trials"] = r.trials_run;
    j["worst_iqc_margin"] = r.worst_iqc_margin;
    return j;
}

inline Json lti_report_to_json(const LtiMembershipReport& r) {
    Json j;
    j["verdict"] = r.member ? "member" : "non-member";
    j["constant"] = r.constant;
    j["dc_value"] = r.dc_value;
    j["max_deviation"] = r.max_deviation;
    if (r.witness) {
        j["witness"] = Json{{"omega", r.witness->omega},
                            {"tau", r.witness->tau},
                            {"value", r.witness->value},
                            {"branch", r.witness->branch}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

inline Json falsification_to_json(const FalsificationResult& r) {
    Json j;
    j["x1"] = r.x1;
    j["x2"] = r.x2;
    j["shifted_integral"] = r.shifted_integral;
    j["unshifted_integral"] = r.unshifted_integral;
    j["gap"] = r.shifted_integral - r.unshifted_integral;
    j["min_L"] = r.min_l;
    j["trace_samples"] = r.trace.samples.size();
    return j;
}

inline Json odd_falsification_to_json(const OddFalsificationReport& r) {
    Json j;
    j["violation_found"] = r.violation_found;
    j["worst_margin"] = r.worst_margin;
    j["x1"] = r.x1;
    j["x2"] = r.x2;
    j["construction"] = r.construction;
    j["shifted_integral"] = r.shifted_integral;
    j["unshifted_integral"] = r.unshifted_integral;
    j["L"] = r.blocks_l;
    return j;
}

inline Json gap_report_to_json(const GapReport& r) {
    Json j;
    j["plant"] = plant_to_json(r.plant);
    j["band"] = Json{{"a", r.band.a}, {"b", r.band.b_finite() ? Json(r.band.b) : Json("inf")}};
    j["plant_in_rh_inf"] = r.plant_in_rh_inf;
    j["gain_loop_stable"] = r.gain_loop_stable;
    j["clearance"] = r.clearance;
    j["identity_residual"] = r.identity_residual;
    Json ladder = Json::array();
    for (const auto& [size, optimum] : r.ladder) {
        ladder.push_back(Json{{"basis_size", size}, {"lp_optimum", optimum}});
    }
    j["ladder"] = ladder;
    j["uniformly_stable_over_constants"] = r.uniformly_stable_over_constants;
    j["multiplier_found"] = r.multiplier_found;
    j["verdict"] = r.verdict;
    return j;
}

// ---------------------------------------------------------------------------
// CSV and SVG emission.

/// Columns: omega, re_g, im_g, condition_value (certification integrand).
inline std::string constraint_csv(const RationalTF& plant, const MultiplierCandidate& cand,
                                  const SlopeBand& band, const FrequencyGrid& grid) {
    std::string csv = "omega,re_g,im_g,condition_value\n";
    for (double w : grid.omegas) {
        const Complex g = plant.at(w);
        csv += format_double(w) + "," + format_double(g.real()) + "," + format_double(g.imag()) + "," +
               format_double(condition_value(plant, cand, band, w)) + "\n";
    }
    if (grid.include_infinity) {
        const double g = plant.at_infinity();
        csv += "inf," + format_double(g) + ",0," + format_double(condition_value_at_infinity(plant, band)) + "\n";
    }
    return csv;
}

/// Columns: omega, re, im.
inline std::string nyquist_csv(const RationalTF& plant, const FrequencyGrid& grid) {
    std::string csv = "omega,re,im\n";
    for (double w : grid.omegas) {
        const Complex g = plant.at(w);
        csv += format_double(w) + "," + format_double(g.real()) + "," + format_double(g.imag()) + "\n";
    }
    if (grid.include_infinity) {
        csv += "inf," + format_double(plant.at_infinity()) + ",0\n";
    }
    return csv;
}

/**
 * Self-contained Nyquist SVG: the sampled curve, its conjugate mirror, and
 * the critical real interval [lo, hi], annotated with the clearance value.
 */
inline std::string nyquist_svg(const RationalTF& plant, const FrequencyGrid& grid, double lo, double hi,
                               double clearance) {
    const std::vector<Complex> curve = nyquist_samples(plant, grid);
    double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
    for (const Complex& p : curve) {
        re_min = std::min(re_min, p.real());
        re_max = std::max(re_max, p.real());
        im_min = std::min(im_min, std::min(p.imag(), -p.imag()));
        im_max = std::max(im_max, std::max(p.imag(), -p.imag()));
    }
    if (std::isfinite(lo)) {
        re_min = std::min(re_min, lo);
        re_max = std::max(re_max, lo);
    }
    if (std::isfinite(hi)) re_max = std::max(re_max, hi);
    const double pad_re = 0.1 * std::max(1e-6, re_max - re_min);
    const double pad_im = 0.1 * std::max(1e-6, im_max - im_min);
    re_min -= pad_re;
    re_max += pad_re;
    im_min -= pad_im;
    im_max += pad_im;

    const double width = 640.0, height = 480.0, margin = 40.0;
    auto mapx = [&](double re) { return margin + (re - re_min) / (re_max - re_min) * (width - 2 * margin); };
    auto mapy = [&](double im) { return height - margin - (im - im_min) / (im_max - im_min) * (height - 2 * margin); };
    auto f = [](double v) { return format_double(v, "%.6g"); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    // Axes.
    if (re_min < 0.0 && re_max > 0.0) {
        svg += "<line x1=\"" + f(mapx(0)) + "\" y1=\"" + f(mapy(im_min)) + "\" x2=\"" + f(mapx(0)) +
               "\" y2=\"" + f(mapy(im_max)) + "\" stroke=\"#cccccc\"/>\n";
    }
    svg += "<line x1=\"" + f(mapx(re_min)) + "\" y1=\"" + f(mapy(0)) + "\" x2=\"" + f(mapx(re_max)) +
           "\" y2=\"" + f(mapy(0)) + "\" stroke=\"#cccccc\"/>\n";
    // Critical interval on the real axis.
    const double seg_lo = std::isfinite(lo) ? lo : re_min;
    const double seg_hi = std::isfinite(hi) ? hi : re_max;
    svg += "<line x1=\"" + f(mapx(seg_lo)) + "\" y1=\"" + f(mapy(0)) + "\" x2=\"" + f(mapx(seg_hi)) +
           "\" y2=\"" + f(mapy(0)) + "\" stroke=\"#cc0000\" stroke-width=\"3\"/>\n";
    // Curve and its conjugate mirror.
    for (int mirror = 0; mirror < 2; ++mirror) {
        svg += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
        for (const Complex& p : curve) {
            const double im = mirror == 0 ? p.imag() : -p.imag();
            svg += f(mapx(p.real())) + "," + f(mapy(im)) + " ";
        }
        svg += "\"/>\n";
    }
    svg += "<text x=\"48\" y=\"28\" font-family=\"monospace\" font-size=\"14\">clearance = " + f(clearance) +
           (clearance > 0.0 ? "" : "  (INTERSECTS)") + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace zfcert
