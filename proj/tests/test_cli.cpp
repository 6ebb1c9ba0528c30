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

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "zfcert/io.hpp"

using namespace zfcert;
using Catch::Approx;

namespace {

const std::string kCli = ZFCERT_CLI_PATH;

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "zfcert_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_json(const std::string& name, const std::string& body) {
    const auto path = work_dir() / name;
    write_text_atomic(path, body);
    return path;
}

}  // namespace

TEST_CASE("certify command") {
    const auto plant = write_json("feasible_plant.json", R"({"num": [-1.0, -2.0], "den": [1.0, 1.0]})");
    const auto out = work_dir() / "cert.json";

    SECTION("feasible plant exits 0 and writes certificate + csv") {
        const int code =
            run("certify --plant " + plant.string() + " --grid-points 200 --out " + out.string());
        CHECK(code == 0);
        const Certificate cert = certificate_from_json(Json::parse(read_text(out)));
        CHECK(cert.status == CertStatus::Feasible);
        CHECK(cert.epsilon >= 0.9);
        auto csv = out;
        csv.replace_extension(".csv");
        const std::string table = read_text(csv);
        CHECK(table.rfind("omega,re_g,im_g,condition_value\n", 0) == 0);
    }
    SECTION("malformed plant file exits 1") {
        const auto broken = write_json("broken.json", "{ not json");
        CHECK(run("certify --plant " + broken.string() + " --out " + out.string()) == 1);
    }
    SECTION("unstable plant exits 1") {
        const auto unstable = write_json("unstable.json", R"({"num": [1.0], "den": [1.0, -1.0]})");
        CHECK(run("certify --plant " + unstable.string() + " --out " + out.string()) == 1);
    }
    SECTION("gap plant in signed mode exits 2") {
        // -s^2/(s^2+0.5s+1)^2 - 1e-3 expanded.
        const Polynomial base{1.0, 0.5, 1.0};
        const Polynomial den = base * base;
        const RationalTF g(Polynomial{-1.0, 0.0, 0.0} - 1e-3 * den, den);
        const auto gap = write_json("gap_plant.json", plant_to_json(g).dump());
        const int code = run("certify --plant " + gap.string() +
                             " --mode signed --basis-size 8 --grid-points 200 --out " + out.string());
        CHECK(code == 2);
    }
    SECTION("identical runs produce byte-identical artifacts") {
        const auto out1 = work_dir() / "det1.json";
        const auto out2 = work_dir() / "det2.json";
        REQUIRE(run("certify --plant " + plant.string() + " --grid-points 150 --out " + out1.string()) == 0);
        REQUIRE(run("certify --plant " + plant.string() + " --grid-points 150 --out " + out2.string()) == 0);
        CHECK(read_text(out1) == read_text(out2));
        auto csv1 = out1, csv2 = out2;
        csv1.replace_extension(".csv");
        csv2.replace_extension(".csv");
        CHECK(read_text(csv1) == read_text(csv2));
    }
    SECTION("grid points fall back to the environment variable") {
        const auto envout = work_dir() / "env.json";
        const std::string cmd = "ZF_CERTIFY_GRID_POINTS=100 " + kCli + " certify --plant " + plant.string() +
                                " --out " + envout.string() + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        REQUIRE(WEXITSTATUS(status) == 0);
        const Certificate cert = certificate_from_json(Json::parse(read_text(envout)));
        CHECK(cert.provenance.search_grid_points == 102);  // 0 + 100 log points + feedthrough
    }
}

TEST_CASE("nyquist command") {
    const auto plant = write_json("nyq_plant.json", R"({"num": [2.0], "den": [1.0, 1.0]})");
    const auto out = work_dir() / "plot.svg";
    SECTION("interval intersection is flagged") {
        // a = 1/3, b = 1 puts the critical interval at [1, 3]; dc gain 2 sits inside.
        const int code = run("nyquist --plant " + plant.string() +
                             " --a 0.333333333333333 --b 1 --grid-points 100 --out " + out.string());
        CHECK(code == 0);
        const std::string svg = read_text(out);
        CHECK(svg.find("INTERSECTS") != std::string::npos);
        auto csv = out;
        csv.replace_extension(".csv");
        CHECK(read_text(csv).rfind("omega,re,im\n", 0) == 0);
    }
    SECTION("constant plant yields a point curve with unit clearance") {
        const auto c = write_json("const_plant.json", R"({"num": [-1.0], "den": [1.0]})");
        const int code = run("nyquist --plant " + c.string() + " --grid-points 50 --out " + out.string());
        CHECK(code == 0);
        CHECK(read_text(out).find("INTERSECTS") == std::string::npos);
    }
}

TEST_CASE("iqc-test command") {
    SECTION("saturation is a member of the unit band") {
        const auto nl = write_json("sat.json",
                                   R"({"breakpoints": [-2.0, -1.0, 1.0, 2.0], "values": [-1.0, -1.0, 1.0, 1.0]})");
        const auto out = work_dir() / "iqc_sat.json";
        CHECK(run("iqc-test --nl " + nl.string() + " --b 1 --trials 3 --out " + out.string()) == 0);
        CHECK(Json::parse(read_text(out)).at("verdict") == "member");
    }
    SECTION("negated identity is rejected with a block witness") {
        const auto nl = write_json("neg.json", R"({"breakpoints": [-1.0, 1.0], "values": [1.0, -1.0]})");
        const auto out = work_dir() / "iqc_neg.json";
        CHECK(run("iqc-test --nl " + nl.string() + " --trials 2 --out " + out.string()) == 2);
        const Json j = Json::parse(read_text(out));
        CHECK(j.at("verdict") == "non-member");
        REQUIRE(j.contains("falsification"));
        CHECK(j.at("falsification").at("gap").get<double>() > 0.0);
    }
    SECTION("first-order lag fails the lti test with a witness") {
        const auto tf = write_json("lag.json", R"({"num": [1.0], "den": [1.0, 1.0]})");
        const auto out = work_dir() / "iqc_lag.json";
        CHECK(run("iqc-test --lti " + tf.string() + " --grid-points 150 --out " + out.string()) == 2);
        const Json j = Json::parse(read_text(out));
        CHECK_FALSE(j.at("report").at("witness").is_null());
    }
    SECTION("odd screening rejects the monotone kink") {
        const auto nl = write_json("kink.json", R"({"breakpoints": [-1.0, 0.0, 1.0], "values": [-2.0, 0.0, 1.0]})");
        const auto out = work_dir() / "iqc_kink.json";
        CHECK(run("iqc-test --nl " + nl.string() + " --odd --trials 2 --out " + out.string()) == 2);
        const Json j = Json::parse(read_text(out));
        CHECK(j.at("odd_falsification").at("violation_found").get<bool>());
    }
    SECTION("needs exactly one input") {
        CHECK(run("iqc-test") == 1);
    }
    SECTION("identical seeds reproduce the report byte for byte") {
        const auto nl = write_json("det_sat.json",
                                   R"({"breakpoints": [-2.0, -1.0, 1.0, 2.0], "values": [-1.0, -1.0, 1.0, 1.0]})");
        const auto out1 = work_dir() / "det_iqc1.json";
        const auto out2 = work_dir() / "det_iqc2.json";
        REQUIRE(run("iqc-test --nl " + nl.string() + " --trials 5 --seed 9 --out " + out1.string()) == 0);
        REQUIRE(run("iqc-test --nl " + nl.string() + " --trials 5 --seed 9 --out " + out2.string()) == 0);
        CHECK(read_text(out1) == read_text(out2));
    }
}

TEST_CASE("counterexample command") {
    SECTION("slope construction satisfies the loop-transform identity") {
        const auto out = work_dir() / "gap.json";
        const int code = run("counterexample oshea-slope --xi 0.25 --eps 1e-3 --a 0.5 --b 2 "
                             "--basis-size 8 --grid-points 200 --out " + out.string());
        CHECK(code == 0);
        const Json j = Json::parse(read_text(out));
        CHECK(j.at("plant_in_rh_inf").get<bool>());
        CHECK(j.at("identity_residual").get<double>() <= 1e-9);
        CHECK(j.at("clearance").get<double>() > 0.0);
    }
    SECTION("xi outside the admissible range exits 1") {
        CHECK(run("counterexample oshea-monotone --xi 0.5") == 1);
    }
}
